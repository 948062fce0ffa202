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
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "draftnmt/models.hpp"

namespace draftnmt {

/// Row-major id matrix padded with kPadId.
struct IdMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<TokenId> ids;

  TokenId at(std::size_t r, std::size_t c) const { return ids[r * cols + c]; }
  /// Row contents up to the first padding id.
  IdSeq unpadded_row(std::size_t r) const;
};

/// Padded mini-batch. Target rows end with the end-of-sequence id; the mask is
/// 1 on every real target position (including that end token) and 0 on padding.
struct TrainingBatch {
  IdMatrix source;
  std::optional<IdMatrix> draft;
  IdMatrix target;
  std::vector<std::uint8_t> mask;  // target.rows × target.cols

  std::size_t size() const noexcept { return target.rows; }
  std::size_t real_tokens(std::size_t row) const;
  /// Throws unless the mask is zero exactly where target padding sits.
  void validate() const;
};

TrainingBatch make_batch(std::span<const Example> examples, bool with_draft);

/// Mean over sentences of (sentence NLL / real target tokens), on one tape.
template <typename Real>
Var batch_loss(Tape<Real>& tape, const TranslationModel<Real>& model, const TrainingBatch& batch);

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

struct AdamReport {
  bool applied = true;
  std::string reason;
};

/// Bias-corrected Adam update. Frozen parameters are left untouched. A
/// non-finite gradient anywhere skips the whole update (the step counter does
/// not advance) and is reported.
template <typename Real>
AdamReport adam_step(std::span<Parameter<Real>* const> params,
                     std::span<const Tensor<Real>> grads, AdamState& state);

struct TrainConfig {
  std::size_t steps = 1000;
  std::size_t batch_size = 80;
  double learning_rate = 1e-3;
  // Global-norm clip on the gradient; 0 disables.
  double clip_norm = 0.0;
  std::uint64_t seed = 1;
  // Validation cadence in steps; 0 means once per epoch.
  std::size_t validate_every = 0;
  // Restore the parameters with the lowest validation loss when training ends.
  bool keep_best = true;
};

struct StepRecord {
  std::size_t step = 0;
  double loss = 0.0;
};

struct ValidationRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;
  double loss = 0.0;
};

struct TrainingLog {
  std::vector<StepRecord> steps;
  std::vector<ValidationRecord> validations;
  std::size_t skipped_updates = 0;
  std::optional<std::size_t> best_step;
  double best_validation = 0.0;
};

/// Mean per-sentence, per-token NLL over a data set (no gradients).
template <typename Real>
double mean_loss(const TranslationModel<Real>& model, std::span<const Example> data);

/// Mini-batch Adam training with teacher forcing. Shuffling and batching derive
/// from config.seed; each epoch uses a fresh seeded permutation. Log lines are
/// written to `log` as space-separated key=value fields.
template <typename Real>
TrainingLog train(TranslationModel<Real>& model, std::span<const Example> train_data,
                  std::span<const Example> validation_data, const TrainConfig& config,
                  std::ostream* log = nullptr);

}  // namespace draftnmt
