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

#include <span>
#include <string>
#include <vector>

#include "draftnmt/autodiff.hpp"
#include "draftnmt/init.hpp"

namespace draftnmt {

/// Gated recurrent unit weights. Maps are stored input-major ([in × out]) and
/// applied as row-vector products x·W.
template <typename Real>
struct GruParams {
  std::size_t input_width = 0;
  std::size_t state_width = 0;

  Parameter<Real> update_input, update_state, update_bias;
  Parameter<Real> reset_input, reset_state, reset_bias;
  Parameter<Real> candidate_input, candidate_state, candidate_bias;

  static GruParams random(const std::string& prefix, std::size_t input_width,
                          std::size_t state_width, Rng& rng);
  static GruParams zeros(const std::string& prefix, std::size_t input_width,
                         std::size_t state_width);

  std::vector<Parameter<Real>*> parameters();
  std::vector<const Parameter<Real>*> parameters() const;
};

/// One GRU transition:
///   z = σ(x·Wz + h·Uz + bz), r = σ(x·Wr + h·Ur + br),
///   h̃ = tanh(x·Wh + (r ⊙ h)·Uh + bh), h' = (1 − z) ⊙ h + z ⊙ h̃.
template <typename Real>
Var gru_step(Tape<Real>& tape, Var x, Var h_prev, const GruParams<Real>& p);

/// Encoder states for one input sequence. `annotations[i]` is
/// [forward[i] ; backward[i]] and `matrix` stacks them as rows.
struct AnnotationSequence {
  std::vector<Var> forward;
  std::vector<Var> backward;
  std::vector<Var> annotations;
  Var matrix;
  std::size_t state_width = 0;

  std::size_t length() const noexcept { return annotations.size(); }
  std::size_t width() const noexcept { return 2 * state_width; }
};

/// Bidirectional encoding; both directions start from a zero state.
template <typename Real>
AnnotationSequence encode_bidirectional(Tape<Real>& tape, std::span<const Var> embedded,
                                        const GruParams<Real>& forward,
                                        const GruParams<Real>& backward);

extern template struct GruParams<float>;
extern template struct GruParams<double>;

}  // namespace draftnmt
