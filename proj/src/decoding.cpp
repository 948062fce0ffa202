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

#include "draftnmt/decoding.hpp"

#include <algorithm>

namespace draftnmt {

std::size_t max_output_length(std::size_t source_length, const DecodeOptions& options) {
  return options.max_length > 0 ? options.max_length : 2 * source_length + 5;
}

template <typename Real>
Hypothesis greedy(const TranslationModel<Real>& model, const ModelInput& input,
                  const DecodeOptions& options) {
  Tape<Real> tape(TapeMode::kInference);
  const EncodedInput enc = model.encode(tape, input);
  const std::size_t limit = max_output_length(input.source.size(), options);

  Hypothesis hyp;
  hyp.state = enc.initial;
  TokenId previous = kBosId;
  for (std::size_t t = 0; t < limit; ++t) {
    const StepOutput out = model.step(tape, enc, previous, hyp.state);
    const auto& lp = tape.value(out.log_probs);
    // max_element returns the first maximum, i.e. the lowest id on ties.
    const auto best = static_cast<TokenId>(
        std::max_element(lp.values().begin(), lp.values().end()) - lp.values().begin());
    hyp.score += static_cast<double>(lp[best]);
    hyp.state = out.state;
    if (best == kEosId) {
      hyp.finished = true;
      break;
    }
    hyp.tokens.push_back(best);
    previous = best;
  }
  return hyp;
}

namespace {

struct Candidate {
  std::size_t parent;
  TokenId token;
  double score;
  double step_log_prob;
};

// Higher score first; on exact ties prefer the larger step probability, then
// the earlier parent, then the lower token id. With one parent this reduces to
// the greedy arg-max rule.
bool better(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.step_log_prob != b.step_log_prob) return a.step_log_prob > b.step_log_prob;
  if (a.parent != b.parent) return a.parent < b.parent;
  return a.token < b.token;
}

}  // namespace

template <typename Real>
std::vector<Hypothesis> beam_search(const TranslationModel<Real>& model, const ModelInput& input,
                                    std::size_t width, const DecodeOptions& options) {
  if (width < 1) throw Error(ErrorClass::kConfig, "beam width must be at least 1");
  Tape<Real> tape(TapeMode::kInference);
  const EncodedInput enc = model.encode(tape, input);
  const std::size_t limit = max_output_length(input.source.size(), options);

  std::vector<Hypothesis> live(1);
  live[0].state = enc.initial;
  std::vector<Hypothesis> finished;
  std::vector<Candidate> candidates;
  std::vector<DecoderState> next_states;

  for (std::size_t t = 0; t < limit && !live.empty(); ++t) {
    candidates.clear();
    next_states.clear();
    for (std::size_t h = 0; h < live.size(); ++h) {
      const TokenId previous = live[h].tokens.empty() ? kBosId : live[h].tokens.back();
      const StepOutput out = model.step(tape, enc, previous, live[h].state);
      next_states.push_back(out.state);
      const auto& lp = tape.value(out.log_probs);
      for (std::size_t v = 0; v < lp.size(); ++v) {
        const double step_lp = static_cast<double>(lp[v]);
        candidates.push_back({h, static_cast<TokenId>(v), live[h].score + step_lp, step_lp});
      }
    }
    const std::size_t keep = std::min(width - finished.size(), candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), better);

    std::vector<Hypothesis> next;
    next.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
      const Candidate& c = candidates[i];
      Hypothesis hyp;
      hyp.tokens = live[c.parent].tokens;
      hyp.score = c.score;
      hyp.state = next_states[c.parent];
      if (c.token == kEosId) {
        hyp.finished = true;
        finished.push_back(std::move(hyp));
      } else {
        hyp.tokens.push_back(c.token);
        next.push_back(std::move(hyp));
      }
    }
    live = std::move(next);
    if (finished.size() >= width) break;
  }

  std::vector<Hypothesis> results = std::move(finished);
  for (auto& h : live) results.push_back(std::move(h));
  auto rank = [&](const Hypothesis& h) {
    return options.length_normalize ? h.score / static_cast<double>(h.tokens.size() + 1)
                                    : h.score;
  };
  std::stable_sort(results.begin(), results.end(),
                   [&](const Hypothesis& a, const Hypothesis& b) { return rank(a) > rank(b); });
  return results;
}

template <typename Real>
double score_sequence(const TranslationModel<Real>& model, const ModelInput& input,
                      std::span<const TokenId> tokens, bool include_end) {
  Tape<Real> tape(TapeMode::kInference);
  const ForwardResult fr = forward(tape, model, input, tokens);
  const std::size_t steps = include_end ? fr.token_log_probs.size() : tokens.size();
  double total = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    total += static_cast<double>(tape.value(fr.token_log_probs[t]).item());
  }
  return total;
}

double prefix_overlap(std::span<const IdSeq> sequences) {
  if (sequences.size() < 2) {
    throw Error(ErrorClass::kEmptyInput, "prefix_overlap needs at least two hypotheses");
  }
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    for (std::size_t j = i + 1; j < sequences.size(); ++j) {
      const auto& a = sequences[i];
      const auto& b = sequences[j];
      const std::size_t shorter = std::min(a.size(), b.size());
      std::size_t common = 0;
      while (common < shorter && a[common] == b[common]) ++common;
      // Two empty sequences agree completely; one empty against a non-empty
      // one shares nothing.
      if (shorter == 0) {
        total += a.size() == b.size() ? 1.0 : 0.0;
      } else {
        total += static_cast<double>(common) / static_cast<double>(shorter);
      }
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

double prefix_overlap(std::span<const Hypothesis> hypotheses) {
  std::vector<IdSeq> seqs;
  seqs.reserve(hypotheses.size());
  for (const auto& h : hypotheses) seqs.push_back(h.tokens);
  return prefix_overlap(std::span<const IdSeq>(seqs));
}

template <typename Real>
TwoStageResult two_stage_translate(const SingleAttentionModel<Real>& stage1,
                                   const DoubleAttentionModel<Real>& stage2,
                                   std::span<const TokenId> source, std::size_t width,
                                   const DecodeOptions& options) {
  if (stage1.dims().source_vocab != stage2.dims().source_vocab ||
      stage1.dims().target_vocab != stage2.dims().target_vocab) {
    throw Error(ErrorClass::kVocabulary, "stage-1 and stage-2 vocabularies differ");
  }
  TwoStageResult result;
  result.draft = beam_search(stage1, ModelInput{source, {}}, width, options).front();
  if (result.draft.tokens.empty()) {
    result.warning = "empty draft; refining from a lone end-of-sequence token";
  }
  result.refined =
      beam_search(stage2, ModelInput{source, result.draft.tokens}, width, options).front();
  return result;
}

#define DRAFTNMT_INSTANTIATE(Real)                                                              \
  template Hypothesis greedy(const TranslationModel<Real>&, const ModelInput&,                  \
                             const DecodeOptions&);                                             \
  template std::vector<Hypothesis> beam_search(const TranslationModel<Real>&, const ModelInput&, \
                                               std::size_t, const DecodeOptions&);              \
  template double score_sequence(const TranslationModel<Real>&, const ModelInput&,              \
                                 std::span<const TokenId>, bool);                               \
  template TwoStageResult two_stage_translate(const SingleAttentionModel<Real>&,                \
                                              const DoubleAttentionModel<Real>&,                \
                                              std::span<const TokenId>, std::size_t,            \
                                              const DecodeOptions&);

DRAFTNMT_INSTANTIATE(float)
DRAFTNMT_INSTANTIATE(double)
#undef DRAFTNMT_INSTANTIATE

}  // namespace draftnmt
