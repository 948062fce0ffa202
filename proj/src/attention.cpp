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

#include "draftnmt/attention.hpp"

namespace draftnmt {

template <typename Real>
AttentionParams<Real> AttentionParams<Real>::random(const std::string& prefix,
                                                    std::size_t state_width,
                                                    std::size_t annotation_width,
                                                    std::size_t align_width, Rng& rng) {
  AttentionParams p;
  p.state_width = state_width;
  p.annotation_width = annotation_width;
  p.align_width = align_width;
  p.state_proj = uniform_parameter<Real>(prefix + ".state_proj", {state_width, align_width}, rng);
  p.annotation_proj =
      uniform_parameter<Real>(prefix + ".annotation_proj", {annotation_width, align_width}, rng);
  p.score = uniform_parameter<Real>(prefix + ".score", {align_width}, rng);
  return p;
}

template <typename Real>
std::vector<Parameter<Real>*> AttentionParams<Real>::parameters() {
  return {&state_proj, &annotation_proj, &score};
}

template <typename Real>
std::vector<const Parameter<Real>*> AttentionParams<Real>::parameters() const {
  return {&state_proj, &annotation_proj, &score};
}

template <typename Real>
AttentionMemory prepare_attention(Tape<Real>& tape, const AnnotationSequence& annotations,
                                  const AttentionParams<Real>& p) {
  if (annotations.width() != p.annotation_width) {
    throw Error(ErrorClass::kShape, "attention: annotation width " +
                                        std::to_string(annotations.width()) + " but scorer expects " +
                                        std::to_string(p.annotation_width));
  }
  return AttentionMemory{&annotations,
                         tape.matmul(annotations.matrix, tape.parameter(p.annotation_proj))};
}

template <typename Real>
Var energies(Tape<Real>& tape, Var s_prev, const AttentionMemory& memory,
             const AttentionParams<Real>& p) {
  const auto& s = tape.value(s_prev);
  if (s.rank() != 1 || s.size() != p.state_width) {
    throw Error(ErrorClass::kShape, "attention: decoder state " + shape_to_string(s.shape()) +
                                        " but scorer expects width " +
                                        std::to_string(p.state_width));
  }
  const Var query = tape.matmul(s_prev, tape.parameter(p.state_proj));
  const Var hidden = tape.tanh(tape.add_row_broadcast(memory.keys, query));
  return tape.matmul(hidden, tape.parameter(p.score));
}

template <typename Real>
Var attention_weights(Tape<Real>& tape, Var e) {
  return tape.softmax(e);
}

template <typename Real>
Var context(Tape<Real>& tape, Var weights, const AnnotationSequence& annotations) {
  const auto& w = tape.value(weights);
  if (w.rank() != 1 || w.size() != annotations.length()) {
    throw Error(ErrorClass::kShape, "context: " + std::to_string(w.size()) + " weights for " +
                                        std::to_string(annotations.length()) + " annotations");
  }
  return tape.matmul(weights, annotations.matrix);
}

template <typename Real>
Var dual_context(Tape<Real>& tape, Var source_context, Var draft_context) {
  return tape.concat(source_context, draft_context);
}

#define DRAFTNMT_INSTANTIATE(Real)                                                           \
  template struct AttentionParams<Real>;                                                     \
  template AttentionMemory prepare_attention(Tape<Real>&, const AnnotationSequence&,         \
                                             const AttentionParams<Real>&);                  \
  template Var energies(Tape<Real>&, Var, const AttentionMemory&, const AttentionParams<Real>&); \
  template Var attention_weights(Tape<Real>&, Var);                                          \
  template Var context(Tape<Real>&, Var, const AnnotationSequence&);                         \
  template Var dual_context(Tape<Real>&, Var, Var);

DRAFTNMT_INSTANTIATE(float)
DRAFTNMT_INSTANTIATE(double)
#undef DRAFTNMT_INSTANTIATE

}  // namespace draftnmt
