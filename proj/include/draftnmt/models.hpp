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

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "draftnmt/attention.hpp"
#include "draftnmt/autodiff.hpp"
#include "draftnmt/decoder.hpp"
#include "draftnmt/encoder.hpp"
#include "draftnmt/vocabulary.hpp"

namespace draftnmt {

enum class ModelKind { kSingle, kDouble };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view s);

struct ModelDims {
  std::size_t source_vocab = 0;
  std::size_t target_vocab = 0;
  std::size_t embed = 0;    // d
  std::size_t hidden = 0;   // n
  std::size_t align = 0;    // a
  std::size_t readout = 0;  // r

  void validate() const;
  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

/// What a model conditions on. `draft` is ignored by the single-attention
/// model. Both sequences are encoded with an end-of-sequence token appended,
/// so an empty draft reaches the draft encoder as a lone end token; an empty
/// source is rejected.
struct ModelInput {
  std::span<const TokenId> source;
  std::span<const TokenId> draft;
};

/// One sentence pair in id form (no boundary tokens); `draft` is empty for
/// stage-1 data.
struct Example {
  IdSeq source;
  IdSeq draft;
  IdSeq target;

  ModelInput input() const { return ModelInput{source, draft}; }
};

/// Encoder output for one input: one annotation sequence and attention memory
/// per attention channel (source first), plus the initial decoder state.
struct EncodedInput {
  std::vector<AnnotationSequence> channels;
  std::vector<AttentionMemory> memories;
  DecoderState initial;
};

struct StepOutput {
  DecoderState state;
  Var log_probs;
  // Per-channel alignment energies computed from the incoming state.
  std::vector<Var> energies;
  Var context;
};

/// Common decoding surface of both models.
template <typename Real>
class TranslationModel {
 public:
  virtual ~TranslationModel() = default;

  virtual ModelKind kind() const = 0;
  virtual std::vector<Parameter<Real>*> parameters() = 0;
  virtual std::vector<const Parameter<Real>*> parameters() const = 0;

  virtual EncodedInput encode(Tape<Real>& tape, const ModelInput& input) const = 0;
  virtual StepOutput step(Tape<Real>& tape, const EncodedInput& encoded, TokenId previous,
                          const DecoderState& state) const = 0;

  const ModelDims& dims() const noexcept { return dims_; }
  std::size_t context_width() const {
    return (kind() == ModelKind::kSingle ? 2 : 4) * dims_.hidden;
  }
  /// Readout and output maps; zeroing these yields the uniform distribution.
  virtual std::vector<Parameter<Real>*> readout_parameters() = 0;

 protected:
  ModelDims dims_;
};

template <typename Real>
class SingleAttentionModel final : public TranslationModel<Real> {
 public:
  Parameter<Real> source_embedding;  // [V_src × d]
  Parameter<Real> target_embedding;  // [V_tgt × d]
  GruParams<Real> encoder_forward;
  GruParams<Real> encoder_backward;
  AttentionParams<Real> attention;
  DecoderParams<Real> decoder;
  Parameter<Real> init_proj;  // [n × n]

  static SingleAttentionModel random(const ModelDims& dims, std::uint64_t seed);

  ModelKind kind() const override { return ModelKind::kSingle; }
  std::vector<Parameter<Real>*> parameters() override;
  std::vector<const Parameter<Real>*> parameters() const override;
  std::vector<Parameter<Real>*> readout_parameters() override {
    return decoder.readout_parameters();
  }

  EncodedInput encode(Tape<Real>& tape, const ModelInput& input) const override;
  StepOutput step(Tape<Real>& tape, const EncodedInput& encoded, TokenId previous,
                  const DecoderState& state) const override;
};

template <typename Real>
class DoubleAttentionModel final : public TranslationModel<Real> {
 public:
  Parameter<Real> source_embedding;  // [V_src × d]
  Parameter<Real> draft_embedding;   // [V_tgt × d]
  Parameter<Real> target_embedding;  // [V_tgt × d]
  GruParams<Real> source_forward;
  GruParams<Real> source_backward;
  GruParams<Real> draft_forward;
  GruParams<Real> draft_backward;
  AttentionParams<Real> source_attention;
  AttentionParams<Real> draft_attention;
  DecoderParams<Real> decoder;

  static DoubleAttentionModel random(const ModelDims& dims, std::uint64_t seed);

  ModelKind kind() const override { return ModelKind::kDouble; }
  std::vector<Parameter<Real>*> parameters() override;
  std::vector<const Parameter<Real>*> parameters() const override;
  std::vector<Parameter<Real>*> readout_parameters() override {
    return decoder.readout_parameters();
  }

  std::vector<Parameter<Real>*> embedding_tables() {
    return {&source_embedding, &draft_embedding, &target_embedding};
  }

  EncodedInput encode(Tape<Real>& tape, const ModelInput& input) const override;
  StepOutput step(Tape<Real>& tape, const EncodedInput& encoded, TokenId previous,
                  const DecoderState& state) const override;
};

/// Teacher-forced pass over one sentence pair. `target` excludes the end
/// token; the pass predicts target[0..T) followed by end-of-sequence, so it
/// has target.size() + 1 steps.
struct ForwardResult {
  std::vector<Var> log_probs;        // per step, [V]
  std::vector<Var> token_log_probs;  // per step, scalar log p(y_t | ...)
  std::vector<std::vector<Var>> energies;  // [step][channel]
  Var nll;
};

template <typename Real>
ForwardResult forward(Tape<Real>& tape, const TranslationModel<Real>& model,
                      const ModelInput& input, std::span<const TokenId> target);

template <typename Real>
ForwardResult forward_single(Tape<Real>& tape, const SingleAttentionModel<Real>& model,
                             std::span<const TokenId> source, std::span<const TokenId> target) {
  return forward(tape, model, ModelInput{source, {}}, target);
}

template <typename Real>
ForwardResult forward_double(Tape<Real>& tape, const DoubleAttentionModel<Real>& model,
                             std::span<const TokenId> source, std::span<const TokenId> draft,
                             std::span<const TokenId> target) {
  return forward(tape, model, ModelInput{source, draft}, target);
}

/// Stage-2 initialization: fresh parameters from `seed`, with the source
/// embeddings copied from stage 1 and the stage-1 target embeddings copied
/// into both the draft-side and output-side tables. All three are frozen.
template <typename Real>
DoubleAttentionModel<Real> inherit(const SingleAttentionModel<Real>& stage1, std::uint64_t seed);

/// As above, but first checks that the requested stage-2 dimensions agree
/// with stage 1 (vocabularies and embedding width).
template <typename Real>
DoubleAttentionModel<Real> inherit(const SingleAttentionModel<Real>& stage1,
                                   const ModelDims& stage2_dims, std::uint64_t seed);

/// Same architecture at another precision.
template <typename To, typename From>
SingleAttentionModel<To> model_cast(const SingleAttentionModel<From>& m);
template <typename To, typename From>
DoubleAttentionModel<To> model_cast(const DoubleAttentionModel<From>& m);

extern template class SingleAttentionModel<float>;
extern template class SingleAttentionModel<double>;
extern template class DoubleAttentionModel<float>;
extern template class DoubleAttentionModel<double>;

}  // namespace draftnmt
