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
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "draftnmt/bleu.hpp"
#include "draftnmt/config.hpp"
#include "draftnmt/decoding.hpp"
#include "draftnmt/training.hpp"

namespace draftnmt {

struct TrainOutcome {
  TrainingLog log;
  std::string digest;  // of the written checkpoint
};

/// Trains a single-attention model on a two-field corpus. Vocabularies come
/// from the training corpus. Without a dev corpus the training corpus is used
/// for validation. Log lines go to `log`.
TrainOutcome cmd_train_stage1(const RunConfig& config, const std::filesystem::path& corpus,
                              const std::filesystem::path& checkpoint,
                              const std::optional<std::filesystem::path>& dev = std::nullopt,
                              std::ostream* log = nullptr);

/// Decodes every source of `corpus` with the stage-1 beam and writes a
/// three-field corpus (source, target, draft). With `gold_draft` the draft
/// is the reference. Returns the number of records written.
std::size_t cmd_make_drafts(const std::filesystem::path& stage1_checkpoint,
                            const std::filesystem::path& corpus,
                            const std::filesystem::path& output, std::size_t beam_width,
                            bool gold_draft, Precision precision = Precision::kFloat32,
                            const DecodeOptions& options = {});

/// Inherits from the stage-1 checkpoint and trains the double-attention model
/// on a three-field corpus.
TrainOutcome cmd_train_stage2(const RunConfig& config,
                              const std::filesystem::path& stage1_checkpoint,
                              const std::filesystem::path& triples,
                              const std::filesystem::path& checkpoint,
                              const std::optional<std::filesystem::path>& dev = std::nullopt,
                              std::ostream* log = nullptr);

struct TranslationOutput {
  std::vector<TokenSeq> outputs;
  // Stage-1 drafts; filled only for two-checkpoint translation.
  std::vector<TokenSeq> drafts;
  // Per-sentence prefix overlap of the final stage-1 beam (width >= 2 only).
  std::vector<double> prefix_overlap;
  std::size_t empty_drafts = 0;
};

/// One checkpoint: stage-1 translation. Two: stage-1 then stage-2, in that
/// order. Only the first field of each input line is read.
TranslationOutput translate_sources(std::span<const std::filesystem::path> checkpoints,
                                    std::span<const TokenSeq> sources, std::size_t beam_width,
                                    Precision precision = Precision::kFloat32,
                                    const DecodeOptions& options = {});

/// File form of translate_sources. Writes one line per input line (draft TAB
/// refined for two checkpoints) to `out`.
TranslationOutput cmd_translate(std::span<const std::filesystem::path> checkpoints,
                                const std::filesystem::path& input, std::size_t beam_width,
                                std::ostream& out, Precision precision = Precision::kFloat32,
                                const DecodeOptions& options = {});

/// Field numbers are 1-based TAB fields; lines without TABs are one field.
BleuReport cmd_evaluate(const std::filesystem::path& hypotheses,
                        const std::filesystem::path& references, std::size_t hypothesis_field = 1,
                        std::size_t reference_field = 1);

struct PipelineSeedResult {
  std::uint64_t seed = 0;
  double stage1_bleu = 0.0;
  double two_stage_bleu = 0.0;
  double prefix_overlap = 0.0;
  std::size_t empty_drafts = 0;
  double stage1_validation = 0.0;
  double stage2_validation = 0.0;

  double delta() const { return two_stage_bleu - stage1_bleu; }
};

struct PipelineReport {
  std::string task;
  std::size_t beam_width = 0;
  std::vector<PipelineSeedResult> seeds;
  double median_stage1_bleu = 0.0;
  double median_two_stage_bleu = 0.0;
  double median_delta = 0.0;
  double mean_prefix_overlap = 0.0;

  std::string table() const;
};

/// Runs generate, train-stage1, make-drafts, train-stage2, two-stage decode and
/// evaluate for every seed, under config.output_dir/seed-<s>/. The report is
/// also written to config.output_dir/report.txt.
PipelineReport cmd_pipeline(const RunConfig& config, std::ostream* progress = nullptr);

double median(std::vector<double> values);

/// Reads a text file as lines (no trailing newline characters).
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace draftnmt
