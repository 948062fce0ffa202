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

#include "draftnmt/encoder.hpp"

namespace draftnmt {

template <typename Real>
GruParams<Real> GruParams<Real>::random(const std::string& prefix, std::size_t input_width,
                                        std::size_t state_width, Rng& rng) {
  GruParams p;
  p.input_width = input_width;
  p.state_width = state_width;
  const Shape in{input_width, state_width};
  const Shape st{state_width, state_width};
  const Shape b{state_width};
  p.update_input = uniform_parameter<Real>(prefix + ".update_input", in, rng);
  p.update_state = uniform_parameter<Real>(prefix + ".update_state", st, rng);
  p.update_bias = uniform_parameter<Real>(prefix + ".update_bias", b, rng);
  p.reset_input = uniform_parameter<Real>(prefix + ".reset_input", in, rng);
  p.reset_state = uniform_parameter<Real>(prefix + ".reset_state", st, rng);
  p.reset_bias = uniform_parameter<Real>(prefix + ".reset_bias", b, rng);
  p.candidate_input = uniform_parameter<Real>(prefix + ".candidate_input", in, rng);
  p.candidate_state = uniform_parameter<Real>(prefix + ".candidate_state", st, rng);
  p.candidate_bias = uniform_parameter<Real>(prefix + ".candidate_bias", b, rng);
  return p;
}

template <typename Real>
GruParams<Real> GruParams<Real>::zeros(const std::string& prefix, std::size_t input_width,
                                       std::size_t state_width) {
  Rng unused(0);
  GruParams p = random(prefix, input_width, state_width, unused);
  for (auto* param : p.parameters()) param->value.fill(Real(0));
  return p;
}

template <typename Real>
std::vector<Parameter<Real>*> GruParams<Real>::parameters() {
  return {&update_input, &update_state, &update_bias,     &reset_input,     &reset_state,
          &reset_bias,   &candidate_input, &candidate_state, &candidate_bias};
}

template <typename Real>
std::vector<const Parameter<Real>*> GruParams<Real>::parameters() const {
  return {&update_input, &update_state, &update_bias,     &reset_input,     &reset_state,
          &reset_bias,   &candidate_input, &candidate_state, &candidate_bias};
}

template <typename Real>
Var gru_step(Tape<Real>& tape, Var x, Var h_prev, const GruParams<Real>& p) {
  const auto& xv = tape.value(x);
  const auto& hv = tape.value(h_prev);
  if (xv.rank() != 1 || xv.size() != p.input_width || hv.rank() != 1 ||
      hv.size() != p.state_width) {
    throw Error(ErrorClass::kShape, "gru_step: input " + shape_to_string(xv.shape()) +
                                        " and state " + shape_to_string(hv.shape()) +
                                        " do not match GRU widths (" +
                                        std::to_string(p.input_width) + ", " +
                                        std::to_string(p.state_width) + ")");
  }
  auto affine = [&](Var in, const Parameter<Real>& w_in, Var state, const Parameter<Real>& w_st,
                    const Parameter<Real>& bias) {
    const Var terms[] = {tape.matmul(in, tape.parameter(w_in)),
                         tape.matmul(state, tape.parameter(w_st)), tape.parameter(bias)};
    return tape.add_n(terms);
  };
  const Var z = tape.sigmoid(affine(x, p.update_input, h_prev, p.update_state, p.update_bias));
  const Var r = tape.sigmoid(affine(x, p.reset_input, h_prev, p.reset_state, p.reset_bias));
  const Var gated = tape.mul(r, h_prev);
  const Var candidate = tape.tanh(
      affine(x, p.candidate_input, gated, p.candidate_state, p.candidate_bias));
  // (1 − z) ⊙ h + z ⊙ h̃  ==  h + z ⊙ (h̃ − h)
  return tape.add(h_prev, tape.mul(z, tape.sub(candidate, h_prev)));
}

template <typename Real>
AnnotationSequence encode_bidirectional(Tape<Real>& tape, std::span<const Var> embedded,
                                        const GruParams<Real>& forward,
                                        const GruParams<Real>& backward) {
  if (embedded.empty()) throw Error(ErrorClass::kEmptyInput, "encode_bidirectional: empty input");
  if (forward.state_width != backward.state_width) {
    throw Error(ErrorClass::kShape, "encode_bidirectional: forward state width " +
                                        std::to_string(forward.state_width) +
                                        " differs from backward " +
                                        std::to_string(backward.state_width));
  }
  const std::size_t length = embedded.size();
  AnnotationSequence seq;
  seq.state_width = forward.state_width;
  seq.forward.resize(length);
  seq.backward.resize(length);

  const Var zero = tape.constant(Tensor<Real>(Shape{forward.state_width}));
  Var h = zero;
  for (std::size_t i = 0; i < length; ++i) {
    h = gru_step(tape, embedded[i], h, forward);
    seq.forward[i] = h;
  }
  h = zero;
  for (std::size_t i = length; i-- > 0;) {
    h = gru_step(tape, embedded[i], h, backward);
    seq.backward[i] = h;
  }
  seq.annotations.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    seq.annotations.push_back(tape.concat(seq.forward[i], seq.backward[i]));
  }
  seq.matrix = tape.stack_rows(seq.annotations);
  return seq;
}

template struct GruParams<float>;
template struct GruParams<double>;
template Var gru_step(Tape<float>&, Var, Var, const GruParams<float>&);
template Var gru_step(Tape<double>&, Var, Var, const GruParams<double>&);
template AnnotationSequence encode_bidirectional(Tape<float>&, std::span<const Var>,
                                                 const GruParams<float>&,
                                                 const GruParams<float>&);
template AnnotationSequence encode_bidirectional(Tape<double>&, std::span<const Var>,
                                                 const GruParams<double>&,
                                                 const GruParams<double>&);

}  // namespace draftnmt
