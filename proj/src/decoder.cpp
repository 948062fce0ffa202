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

#include "draftnmt/decoder.hpp"

namespace draftnmt {

template <typename Real>
DecoderParams<Real> DecoderParams<Real>::random(const std::string& prefix,
                                                std::size_t embed_width,
                                                std::size_t context_width,
                                                std::size_t state_width,
                                                std::size_t readout_width,
                                                std::size_t vocab_size, Rng& rng) {
  DecoderParams p;
  p.embed_width = embed_width;
  p.context_width = context_width;
  p.state_width = state_width;
  p.readout_width = readout_width;
  p.vocab_size = vocab_size;
  p.gru = GruParams<Real>::random(prefix + ".gru", embed_width + context_width, state_width, rng);
  p.readout_state =
      uniform_parameter<Real>(prefix + ".readout_state", {state_width, readout_width}, rng);
  p.readout_embed =
      uniform_parameter<Real>(prefix + ".readout_embed", {embed_width, readout_width}, rng);
  p.readout_context =
      uniform_parameter<Real>(prefix + ".readout_context", {context_width, readout_width}, rng);
  p.readout_bias = uniform_parameter<Real>(prefix + ".readout_bias", {readout_width}, rng);
  p.output_proj =
      uniform_parameter<Real>(prefix + ".output_proj", {readout_width, vocab_size}, rng);
  p.output_bias = uniform_parameter<Real>(prefix + ".output_bias", {vocab_size}, rng);
  return p;
}

template <typename Real>
std::vector<Parameter<Real>*> DecoderParams<Real>::parameters() {
  auto out = gru.parameters();
  for (auto* p : readout_parameters()) out.push_back(p);
  return out;
}

template <typename Real>
std::vector<const Parameter<Real>*> DecoderParams<Real>::parameters() const {
  auto out = gru.parameters();
  for (const auto* p : {&readout_state, &readout_embed, &readout_context, &readout_bias,
                        &output_proj, &output_bias}) {
    out.push_back(p);
  }
  return out;
}

template <typename Real>
std::vector<Parameter<Real>*> DecoderParams<Real>::readout_parameters() {
  return {&readout_state, &readout_embed, &readout_context,
          &readout_bias,  &output_proj,   &output_bias};
}

template <typename Real>
DecoderState decoder_step(Tape<Real>& tape, Var y_prev_embed, const DecoderState& s_prev,
                          Var context, const DecoderParams<Real>& p) {
  const auto& y = tape.value(y_prev_embed);
  const auto& c = tape.value(context);
  if (y.size() != p.embed_width || c.size() != p.context_width) {
    throw Error(ErrorClass::kShape, "decoder_step: embedding " + shape_to_string(y.shape()) +
                                        " and context " + shape_to_string(c.shape()) +
                                        " do not match decoder widths (" +
                                        std::to_string(p.embed_width) + ", " +
                                        std::to_string(p.context_width) + ")");
  }
  const Var input = tape.concat(y_prev_embed, context);
  return DecoderState{gru_step(tape, input, s_prev.hidden, p.gru), s_prev.step + 1};
}

template <typename Real>
Var readout(Tape<Real>& tape, Var y_prev_embed, Var state, Var context,
            const DecoderParams<Real>& p) {
  const auto& y = tape.value(y_prev_embed);
  const auto& s = tape.value(state);
  const auto& c = tape.value(context);
  if (y.size() != p.embed_width || s.size() != p.state_width || c.size() != p.context_width) {
    throw Error(ErrorClass::kShape, "readout: embedding " + shape_to_string(y.shape()) +
                                        ", state " + shape_to_string(s.shape()) + ", context " +
                                        shape_to_string(c.shape()) +
                                        " do not match decoder widths");
  }
  const Var terms[] = {tape.matmul(state, tape.parameter(p.readout_state)),
                       tape.matmul(y_prev_embed, tape.parameter(p.readout_embed)),
                       tape.matmul(context, tape.parameter(p.readout_context)),
                       tape.parameter(p.readout_bias)};
  const Var hidden = tape.tanh(tape.add_n(terms));
  const Var logits =
      tape.add(tape.matmul(hidden, tape.parameter(p.output_proj)), tape.parameter(p.output_bias));
  return tape.log_softmax(logits);
}

template <typename Real>
DecoderState init_single(Tape<Real>& tape, const AnnotationSequence& annotations,
                         const Parameter<Real>& init_proj) {
  if (annotations.length() == 0) {
    throw Error(ErrorClass::kEmptyInput, "init_single: no annotations");
  }
  const Var first_backward = annotations.backward.front();
  return DecoderState{tape.tanh(tape.matmul(first_backward, tape.parameter(init_proj))), 0};
}

template <typename Real>
DecoderState init_double(Tape<Real>& tape, const AnnotationSequence& source,
                         const AnnotationSequence& draft) {
  if (source.length() == 0 || draft.length() == 0) {
    throw Error(ErrorClass::kEmptyInput, "init_double: empty annotation sequence");
  }
  if (source.state_width != draft.state_width) {
    throw Error(ErrorClass::kShape, "init_double: backward widths " +
                                        std::to_string(source.state_width) + " and " +
                                        std::to_string(draft.state_width) + " differ");
  }
  const Var sum = tape.add(source.backward.front(), draft.backward.front());
  return DecoderState{tape.scale(sum, Real(0.5)), 0};
}

#define DRAFTNMT_INSTANTIATE(Real)                                                        \
  template struct DecoderParams<Real>;                                                    \
  template DecoderState decoder_step(Tape<Real>&, Var, const DecoderState&, Var,          \
                                     const DecoderParams<Real>&);                         \
  template Var readout(Tape<Real>&, Var, Var, Var, const DecoderParams<Real>&);           \
  template DecoderState init_single(Tape<Real>&, const AnnotationSequence&,               \
                                    const Parameter<Real>&);                              \
  template DecoderState init_double(Tape<Real>&, const AnnotationSequence&,               \
                                    const AnnotationSequence&);

DRAFTNMT_INSTANTIATE(float)
DRAFTNMT_INSTANTIATE(double)
#undef DRAFTNMT_INSTANTIATE

}  // namespace draftnmt
