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
#include <vector>

#include "draftnmt/models.hpp"
#include "draftnmt/vocabulary.hpp"

namespace draftnmt {

inline constexpr int kCheckpointFormatVersion = 1;

struct BlockInfo {
  std::string name;
  Shape shape;
  bool frozen = false;

  friend bool operator==(const BlockInfo&, const BlockInfo&) = default;
};

/// Everything in the `meta` document of a checkpoint directory.
struct CheckpointMeta {
  int format_version = kCheckpointFormatVersion;
  ModelKind kind = ModelKind::kSingle;
  ModelDims dims;
  Vocabulary source_vocab;
  Vocabulary target_vocab;
  std::vector<BlockInfo> blocks;
  std::map<std::string, std::string> hyperparameters;
  std::uint64_t seed = 0;
  std::size_t training_steps = 0;
  // Digest of the checkpoint this one was initialized from; empty for stage 1.
  std::string provenance;
};

/// Writes `dir/meta` (JSON) and `dir/params` (little-endian float32 values of
/// every block, in the order of `meta.blocks`). `meta.kind`, `meta.dims` and
/// `meta.blocks` are filled from the model.
template <typename Real>
void save_checkpoint(const std::filesystem::path& dir, const TranslationModel<Real>& model,
                     CheckpointMeta meta);

CheckpointMeta read_checkpoint_meta(const std::filesystem::path& dir);

template <typename Real>
struct LoadedSingle {
  SingleAttentionModel<Real> model;
  CheckpointMeta meta;
};

template <typename Real>
struct LoadedDouble {
  DoubleAttentionModel<Real> model;
  CheckpointMeta meta;
};

/// Throws kCheckpoint on a kind mismatch, unknown version, block layout that
/// differs from the architecture, or a payload of the wrong length.
template <typename Real>
LoadedSingle<Real> load_single(const std::filesystem::path& dir);
template <typename Real>
LoadedDouble<Real> load_double(const std::filesystem::path& dir);

/// Hex SHA-256 over the meta and params files.
std::string checkpoint_digest(const std::filesystem::path& dir);

}  // namespace draftnmt
