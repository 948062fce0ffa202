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

#include "draftnmt/models.hpp"

namespace draftnmt {

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::kSingle ? "single_attention" : "double_attention";
}

ModelKind model_kind_from_string(std::string_view s) {
  if (s == "single_attention") return ModelKind::kSingle;
  if (s == "double_attention") return ModelKind::kDouble;
  throw Error(ErrorClass::kCheckpoint, "unknown model kind '" + std::string(s) + "'");
}

void ModelDims::validate() const {
  if (source_vocab <= kFirstWordId || target_vocab <= kFirstWordId) {
    throw Error(ErrorClass::kConfig, "vocabularies must hold more than the reserved tokens");
  }
  if (embed == 0 || hidden == 0 || align == 0 || readout == 0) {
    throw Error(ErrorClass::kConfig, "model widths must be positive");
  }
}

namespace {

template <typename Real>
std::vector<Var> embed_with_end(Tape<Real>& tape, const Parameter<Real>& table,
                                std::span<const TokenId> ids, const char* side,
                                bool allow_empty = false) {
  if (ids.empty() && !allow_empty) {
    throw Error(ErrorClass::kEmptyInput, std::string(side) + " sequence is empty");
  }
  const Var t = tape.parameter(table);
  const std::size_t vocab = table.value.rows();
  std::vector<Var> out;
  out.reserve(ids.size() + 1);
  for (TokenId id : ids) {
    if (id >= vocab) {
      throw Error(ErrorClass::kRange, std::string(side) + " token id " + std::to_string(id) +
                                          " outside vocabulary of " + std::to_string(vocab));
    }
    out.push_back(tape.gather_row(t, id));
  }
  out.push_back(tape.gather_row(t, kEosId));
  return out;
}

template <typename Real>
Var embed_previous(Tape<Real>& tape, const Parameter<Real>& table, TokenId previous) {
  if (previous >= table.value.rows()) {
    throw Error(ErrorClass::kRange, "target token id " + std::to_string(previous) +
                                        " outside vocabulary of " +
                                        std::to_string(table.value.rows()));
  }
  return tape.gather_row(tape.parameter(table), previous);
}

// Attends over one channel from the previous decoder state.
template <typename Real>
Var attend(Tape<Real>& tape, const DecoderState& state, const AttentionMemory& memory,
           const AttentionParams<Real>& params, std::vector<Var>& energies_out) {
  const Var e = energies(tape, state.hidden, memory, params);
  energies_out.push_back(e);
  return context(tape, attention_weights(tape, e), *memory.annotations);
}

}  // namespace

// ---------------------------------------------------------------------------
// Single-attention model

template <typename Real>
SingleAttentionModel<Real> SingleAttentionModel<Real>::random(const ModelDims& dims,
                                                              std::uint64_t seed) {
  dims.validate();
  Rng rng(seed);
  SingleAttentionModel m;
  m.dims_ = dims;
  const std::size_t n = dims.hidden;
  m.source_embedding =
      uniform_parameter<Real>("source_embedding", {dims.source_vocab, dims.embed}, rng);
  m.target_embedding =
      uniform_parameter<Real>("target_embedding", {dims.target_vocab, dims.embed}, rng);
  m.encoder_forward = GruParams<Real>::random("encoder.forward", dims.embed, n, rng);
  m.encoder_backward = GruParams<Real>::random("encoder.backward", dims.embed, n, rng);
  m.attention = AttentionParams<Real>::random("attention", n, 2 * n, dims.align, rng);
  m.decoder = DecoderParams<Real>::random("decoder", dims.embed, 2 * n, n, dims.readout,
                                          dims.target_vocab, rng);
  m.init_proj = uniform_parameter<Real>("init_proj", {n, n}, rng);
  return m;
}

template <typename Real>
std::vector<Parameter<Real>*> SingleAttentionModel<Real>::parameters() {
  std::vector<Parameter<Real>*> out{&source_embedding, &target_embedding};
  for (auto* p : encoder_forward.parameters()) out.push_back(p);
  for (auto* p : encoder_backward.parameters()) out.push_back(p);
  for (auto* p : attention.parameters()) out.push_back(p);
  for (auto* p : decoder.parameters()) out.push_back(p);
  out.push_back(&init_proj);
  return out;
}

template <typename Real>
std::vector<const Parameter<Real>*> SingleAttentionModel<Real>::parameters() const {
  auto mutable_params = const_cast<SingleAttentionModel*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

template <typename Real>
EncodedInput SingleAttentionModel<Real>::encode(Tape<Real>& tape, const ModelInput& input) const {
  const auto embedded = embed_with_end(tape, source_embedding, input.source, "source");
  EncodedInput enc;
  enc.channels.push_back(
      encode_bidirectional(tape, std::span<const Var>(embedded), encoder_forward, encoder_backward));
  enc.memories.push_back(prepare_attention(tape, enc.channels[0], attention));
  enc.initial = init_single(tape, enc.channels[0], init_proj);
  return enc;
}

template <typename Real>
StepOutput SingleAttentionModel<Real>::step(Tape<Real>& tape, const EncodedInput& encoded,
                                            TokenId previous, const DecoderState& state) const {
  StepOutput out;
  const Var y = embed_previous(tape, target_embedding, previous);
  out.context = attend(tape, state, encoded.memories.at(0), attention, out.energies);
  out.state = decoder_step(tape, y, state, out.context, decoder);
  out.log_probs = readout(tape, y, out.state.hidden, out.context, decoder);
  return out;
}

// ---------------------------------------------------------------------------
// Double-attention model

template <typename Real>
DoubleAttentionModel<Real> DoubleAttentionModel<Real>::random(const ModelDims& dims,
                                                              std::uint64_t seed) {
  dims.validate();
  Rng rng(seed);
  DoubleAttentionModel m;
  m.dims_ = dims;
  const std::size_t n = dims.hidden;
  m.source_embedding =
      uniform_parameter<Real>("source_embedding", {dims.source_vocab, dims.embed}, rng);
  m.draft_embedding =
      uniform_parameter<Real>("draft_embedding", {dims.target_vocab, dims.embed}, rng);
  m.target_embedding =
      uniform_parameter<Real>("target_embedding", {dims.target_vocab, dims.embed}, rng);
  m.source_forward = GruParams<Real>::random("source_encoder.forward", dims.embed, n, rng);
  m.source_backward = GruParams<Real>::random("source_encoder.backward", dims.embed, n, rng);
  m.draft_forward = GruParams<Real>::random("draft_encoder.forward", dims.embed, n, rng);
  m.draft_backward = GruParams<Real>::random("draft_encoder.backward", dims.embed, n, rng);
  m.source_attention =
      AttentionParams<Real>::random("source_attention", n, 2 * n, dims.align, rng);
  m.draft_attention = AttentionParams<Real>::random("draft_attention", n, 2 * n, dims.align, rng);
  m.decoder = DecoderParams<Real>::random("decoder", dims.embed, 4 * n, n, dims.readout,
                                          dims.target_vocab, rng);
  return m;
}

template <typename Real>
std::vector<Parameter<Real>*> DoubleAttentionModel<Real>::parameters() {
  std::vector<Parameter<Real>*> out{&source_embedding, &draft_embedding, &target_embedding};
  for (auto* gru : {&source_forward, &source_backward, &draft_forward, &draft_backward}) {
    for (auto* p : gru->parameters()) out.push_back(p);
  }
  for (auto* p : source_attention.parameters()) out.push_back(p);
  for (auto* p : draft_attention.parameters()) out.push_back(p);
  for (auto* p : decoder.parameters()) out.push_back(p);
  return out;
}

template <typename Real>
std::vector<const Parameter<Real>*> DoubleAttentionModel<Real>::parameters() const {
  auto mutable_params = const_cast<DoubleAttentionModel*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

template <typename Real>
EncodedInput DoubleAttentionModel<Real>::encode(Tape<Real>& tape, const ModelInput& input) const {
  const auto source = embed_with_end(tape, source_embedding, input.source, "source");
  const auto draft = embed_with_end(tape, draft_embedding, input.draft, "draft", true);
  EncodedInput enc;
  enc.channels.reserve(2);
  enc.channels.push_back(
      encode_bidirectional(tape, std::span<const Var>(source), source_forward, source_backward));
  enc.channels.push_back(
      encode_bidirectional(tape, std::span<const Var>(draft), draft_forward, draft_backward));
  enc.memories.push_back(prepare_attention(tape, enc.channels[0], source_attention));
  enc.memories.push_back(prepare_attention(tape, enc.channels[1], draft_attention));
  enc.initial = init_double(tape, enc.channels[0], enc.channels[1]);
  return enc;
}

template <typename Real>
StepOutput DoubleAttentionModel<Real>::step(Tape<Real>& tape, const EncodedInput& encoded,
                                            TokenId previous, const DecoderState& state) const {
  StepOutput out;
  const Var y = embed_previous(tape, target_embedding, previous);
  const Var c1 = attend(tape, state, encoded.memories.at(0), source_attention, out.energies);
  const Var c2 = attend(tape, state, encoded.memories.at(1), draft_attention, out.energies);
  out.context = dual_context(tape, c1, c2);
  out.state = decoder_step(tape, y, state, out.context, decoder);
  out.log_probs = readout(tape, y, out.state.hidden, out.context, decoder);
  return out;
}

// ---------------------------------------------------------------------------

template <typename Real>
ForwardResult forward(Tape<Real>& tape, const TranslationModel<Real>& model,
                      const ModelInput& input, std::span<const TokenId> target) {
  const EncodedInput enc = model.encode(tape, input);
  const std::size_t vocab = model.dims().target_vocab;
  ForwardResult result;
  result.log_probs.reserve(target.size() + 1);
  result.token_log_probs.reserve(target.size() + 1);
  DecoderState state = enc.initial;
  TokenId previous = kBosId;
  for (std::size_t t = 0; t <= target.size(); ++t) {
    const TokenId gold = t < target.size() ? target[t] : kEosId;
    if (gold >= vocab) {
      throw Error(ErrorClass::kRange, "target token id " + std::to_string(gold) +
                                          " outside vocabulary of " + std::to_string(vocab));
    }
    StepOutput out = model.step(tape, enc, previous, state);
    result.log_probs.push_back(out.log_probs);
    result.token_log_probs.push_back(tape.pick(out.log_probs, gold));
    result.energies.push_back(std::move(out.energies));
    state = out.state;
    previous = gold;
  }
  result.nll = tape.scale(tape.add_n(result.token_log_probs), Real(-1));
  return result;
}

template <typename Real>
DoubleAttentionModel<Real> inherit(const SingleAttentionModel<Real>& stage1, std::uint64_t seed) {
  return inherit(stage1, stage1.dims(), seed);
}

template <typename Real>
DoubleAttentionModel<Real> inherit(const SingleAttentionModel<Real>& stage1,
                                   const ModelDims& stage2_dims, std::uint64_t seed) {
  const auto& d1 = stage1.dims();
  if (d1.source_vocab != stage2_dims.source_vocab || d1.target_vocab != stage2_dims.target_vocab) {
    throw Error(ErrorClass::kVocabulary,
                "inherit: stage-1 vocabularies (" + std::to_string(d1.source_vocab) + ", " +
                    std::to_string(d1.target_vocab) + ") differ from stage-2 (" +
                    std::to_string(stage2_dims.source_vocab) + ", " +
                    std::to_string(stage2_dims.target_vocab) + ")");
  }
  if (d1.embed != stage2_dims.embed) {
    throw Error(ErrorClass::kShape, "inherit: embedding width " + std::to_string(d1.embed) +
                                        " differs from stage-2 " +
                                        std::to_string(stage2_dims.embed));
  }
  auto m = DoubleAttentionModel<Real>::random(stage2_dims, seed);
  m.source_embedding.value = stage1.source_embedding.value;
  m.draft_embedding.value = stage1.target_embedding.value;
  m.target_embedding.value = stage1.target_embedding.value;
  for (auto* table : m.embedding_tables()) table->frozen = true;
  return m;
}

namespace {

template <typename ToModel, typename FromModel>
ToModel cast_parameters(const FromModel& from) {
  auto to = ToModel::random(from.dims(), 0);
  auto dst = to.parameters();
  auto src = from.parameters();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    using To = typename std::remove_reference_t<decltype(dst[i]->value)>::value_type;
    dst[i]->value = tensor_cast<To>(src[i]->value);
    dst[i]->frozen = src[i]->frozen;
  }
  return to;
}

}  // namespace

template <typename To, typename From>
SingleAttentionModel<To> model_cast(const SingleAttentionModel<From>& m) {
  return cast_parameters<SingleAttentionModel<To>>(m);
}

template <typename To, typename From>
DoubleAttentionModel<To> model_cast(const DoubleAttentionModel<From>& m) {
  return cast_parameters<DoubleAttentionModel<To>>(m);
}

template class SingleAttentionModel<float>;
template class SingleAttentionModel<double>;
template class DoubleAttentionModel<float>;
template class DoubleAttentionModel<double>;

#define DRAFTNMT_INSTANTIATE(Real)                                                           \
  template ForwardResult forward(Tape<Real>&, const TranslationModel<Real>&,                 \
                                 const ModelInput&, std::span<const TokenId>);               \
  template DoubleAttentionModel<Real> inherit(const SingleAttentionModel<Real>&,             \
                                              std::uint64_t);                                \
  template DoubleAttentionModel<Real> inherit(const SingleAttentionModel<Real>&,             \
                                              const ModelDims&, std::uint64_t);

DRAFTNMT_INSTANTIATE(float)
DRAFTNMT_INSTANTIATE(double)
#undef DRAFTNMT_INSTANTIATE

template SingleAttentionModel<float> model_cast(const SingleAttentionModel<double>&);
template SingleAttentionModel<double> model_cast(const SingleAttentionModel<float>&);
template DoubleAttentionModel<float> model_cast(const DoubleAttentionModel<double>&);
template DoubleAttentionModel<double> model_cast(const DoubleAttentionModel<float>&);

}  // namespace draftnmt
