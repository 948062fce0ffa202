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
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "draftnmt/corpus.hpp"
#include "draftnmt/models.hpp"
#include "draftnmt/training.hpp"

namespace draftnmt {

enum class Precision { kFloat32, kFloat64 };

std::string_view to_string(Precision p);
Precision precision_from_string(std::string_view s);

/// Settings of one run. Defaults are the desk-scale profile.
struct RunConfig {
  Task task = Task::kAgreement;
  std::size_t train_size = 5000;
  std::size_t dev_size = 500;
  std::size_t test_size = 500;
  std::size_t min_length = 3;
  std::size_t max_length = 8;
  std::size_t vocab_size = 50;

  std::size_t embed = 32;
  std::size_t hidden = 64;
  std::size_t align = 64;
  std::size_t readout = 64;

  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double clip_norm = 0.0;
  std::size_t steps = 2000;
  // 0 reuses `steps`.
  std::size_t stage2_steps = 0;
  std::size_t validate_every = 0;
  bool keep_best = true;

  std::size_t beam_width = 5;
  bool length_normalize = false;
  std::uint64_t seed = 1;
  // Seeds of a pipeline run; empty means {seed}.
  std::vector<std::uint64_t> seeds;
  bool gold_draft = false;
  Precision precision = Precision::kFloat32;
  std::filesystem::path output_dir = "run";

  /// Every recognized key, in file order.
  static const std::vector<std::string>& keys();
  /// Throws kConfig for an unknown key or a malformed value.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;
  std::map<std::string, std::string> to_map() const;

  /// Throws kConfig unless widths are positive, the beam is at least 1, etc.
  void validate() const;

  ModelDims model_dims(std::size_t source_vocab, std::size_t target_vocab) const;
  TrainConfig train_config(std::size_t stage) const;
  GeneratorSpec generator_spec(std::uint64_t run_seed) const;
  std::vector<std::uint64_t> run_seeds() const;
};

/// Applies `key=value` lines; '#' starts a comment and blank lines are skipped.
void apply_config_text(RunConfig& config, std::string_view text, std::string_view origin = "");
RunConfig load_config(const std::filesystem::path& path);
std::string format_config(const RunConfig& config);

}  // namespace draftnmt
