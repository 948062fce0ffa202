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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "draftnmt/models.hpp"

namespace draftnmt {

/// A (partial) translation. `tokens` never contains the begin or end id;
/// `score` is the summed log-probability of the emitted tokens plus, once
/// finished, of the end token. `state` refers to the search's private tape and
/// is meaningless after the search returns.
struct Hypothesis {
  IdSeq tokens;
  double score = 0.0;
  DecoderState state;
  bool finished = false;
};

struct DecodeOptions {
  // 0 selects 2 · |source| + 5.
  std::size_t max_length = 0;
  // Rank final beam results by score / (|tokens| + 1) instead of raw score.
  bool length_normalize = false;
};

std::size_t max_output_length(std::size_t source_length, const DecodeOptions& options);

/// Arg-max decoding; ties go to the lowest token id.
template <typename Real>
Hypothesis greedy(const TranslationModel<Real>& model, const ModelInput& input,
                  const DecodeOptions& options = {});

/// Beam search keeping the `width` best partial hypotheses by accumulated
/// log-probability. Hypotheses that emit the end token are set aside and the
/// beam shrinks accordingly; search stops once `width` are finished or the
/// length cap is hit, in which case the surviving live hypotheses are returned
/// too (unfinished). Results are sorted by non-increasing score.
template <typename Real>
std::vector<Hypothesis> beam_search(const TranslationModel<Real>& model, const ModelInput& input,
                                    std::size_t width, const DecodeOptions& options = {});

/// Teacher-forced log-probability of `tokens`, optionally including the end
/// token that closes them.
template <typename Real>
double score_sequence(const TranslationModel<Real>& model, const ModelInput& input,
                      std::span<const TokenId> tokens, bool include_end);

/// Mean over unordered pairs of (longest common prefix / shorter length).
double prefix_overlap(std::span<const IdSeq> sequences);
double prefix_overlap(std::span<const Hypothesis> hypotheses);

struct TwoStageResult {
  Hypothesis draft;
  Hypothesis refined;
  std::optional<std::string> warning;
};

/// Drafts with the stage-1 beam, then re-translates with the stage-2 beam
/// conditioned on the source and the best draft.
template <typename Real>
TwoStageResult two_stage_translate(const SingleAttentionModel<Real>& stage1,
                                   const DoubleAttentionModel<Real>& stage2,
                                   std::span<const TokenId> source, std::size_t width,
                                   const DecodeOptions& options = {});

}  // namespace draftnmt
