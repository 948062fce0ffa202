/*
 * Copyright 2026 The draftnmt Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <string>
#include <vector>

#include "draftnmt/autodiff.hpp"
#include "draftnmt/encoder.hpp"
#include "draftnmt/init.hpp"

namespace draftnmt {

/// Decoder recurrence and readout. The GRU consumes [y_{t-1} ; c_t]; the
/// readout is log_softmax(tanh(s·Ws + y·Wy + c·Wc + b)·Wo + bo).
template <typename Real>
struct DecoderParams {
  std::size_t embed_width = 0;
  std::size_t context_width = 0;
  std::size_t state_width = 0;
  std::size_t readout_width = 0;
  std::size_t vocab_size = 0;

  GruParams<Real> gru;
  Parameter<Real> readout_state;    // [n × r]
  Parameter<Real> readout_embed;    // [d × r]
  Parameter<Real> readout_context;  // [ctx × r]
  Parameter<Real> readout_bias;     // [r]
  Parameter<Real> output_proj;      // [r × V]
  Parameter<Real> output_bias;      // [V]

  static DecoderParams random(const std::string& prefix, std::size_t embed_width,
                              std::size_t context_width, std::size_t state_width,
                              std::size_t readout_width, std::size_t vocab_size, Rng& rng);

  std::vector<Parameter<Real>*> parameters();
  std::vector<const Parameter<Real>*> parameters() const;
  /// The readout and output maps only (everything the distribution depends on
  /// besides the state, embedding and context).
  std::vector<Parameter<Real>*> readout_parameters();
};

struct DecoderState {
  Var hidden;
  std::size_t step = 0;
};

/// s_t = GRU([y_{t-1} ; c_t], s_{t-1}).
template <typename Real>
DecoderState decoder_step(Tape<Real>& tape, Var y_prev_embed, const DecoderState& s_prev,
                          Var context, const DecoderParams<Real>& p);

/// Log-probabilities over the target vocabulary.
template <typename Real>
Var readout(Tape<Real>& tape, Var y_prev_embed, Var state, Var context,
            const DecoderParams<Real>& p);

/// s_0 = tanh(←h_1 · W_init) for the single-attention model.
template <typename Real>
DecoderState init_single(Tape<Real>& tape, const AnnotationSequence& annotations,
                         const Parameter<Real>& init_proj);

/// s_0 = ½(←h_1 + ←h̃_1); no learned parameters.
template <typename Real>
DecoderState init_double(Tape<Real>& tape, const AnnotationSequence& source,
                         const AnnotationSequence& draft);

extern template struct DecoderParams<float>;
extern template struct DecoderParams<double>;

}  // namespace draftnmt
