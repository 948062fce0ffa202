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

/// Additive alignment scorer e_i = vᵀ tanh(s·W + h_i·U).
template <typename Real>
struct AttentionParams {
  std::size_t state_width = 0;
  std::size_t annotation_width = 0;
  std::size_t align_width = 0;

  Parameter<Real> state_proj;       // [n × a]
  Parameter<Real> annotation_proj;  // [2n × a]
  Parameter<Real> score;            // [a]

  static AttentionParams random(const std::string& prefix, std::size_t state_width,
                                std::size_t annotation_width, std::size_t align_width, Rng& rng);

  std::vector<Parameter<Real>*> parameters();
  std::vector<const Parameter<Real>*> parameters() const;
};

/// Annotations together with their projection h_i·U, computed once per
/// sentence and reused at every decoding step.
struct AttentionMemory {
  const AnnotationSequence* annotations = nullptr;
  Var keys;  // [T × a]
};

template <typename Real>
AttentionMemory prepare_attention(Tape<Real>& tape, const AnnotationSequence& annotations,
                                  const AttentionParams<Real>& p);

/// Alignment energies over all positions; s·W is computed once for the step.
template <typename Real>
Var energies(Tape<Real>& tape, Var s_prev, const AttentionMemory& memory,
             const AttentionParams<Real>& p);

template <typename Real>
Var attention_weights(Tape<Real>& tape, Var energies);

/// c = Σ_i α_i h_i.
template <typename Real>
Var context(Tape<Real>& tape, Var weights, const AnnotationSequence& annotations);

/// [c_source ; c_draft].
template <typename Real>
Var dual_context(Tape<Real>& tape, Var source_context, Var draft_context);

extern template struct AttentionParams<float>;
extern template struct AttentionParams<double>;

}  // namespace draftnmt
