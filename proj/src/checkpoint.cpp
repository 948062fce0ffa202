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

#include "draftnmt/checkpoint.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <memory>

#include "draftnmt/errors.hpp"

namespace draftnmt {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorClass::kIo, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorClass::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorClass::kIo, "failed writing " + path.string());
}

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
  return v;
}

Json meta_to_json(const CheckpointMeta& m) {
  Json j;
  j["format_version"] = m.format_version;
  j["model_kind"] = std::string(to_string(m.kind));
  j["dims"] = {{"source_vocab", m.dims.source_vocab}, {"target_vocab", m.dims.target_vocab},
               {"embed", m.dims.embed},               {"hidden", m.dims.hidden},
               {"align", m.dims.align},               {"readout", m.dims.readout}};
  j["seed"] = m.seed;
  j["training_steps"] = m.training_steps;
  j["provenance"] = m.provenance;
  j["hyperparameters"] = Json::object();
  for (const auto& [k, v] : m.hyperparameters) j["hyperparameters"][k] = v;
  j["blocks"] = Json::array();
  for (const auto& b : m.blocks) {
    j["blocks"].push_back({{"name", b.name}, {"shape", b.shape}, {"frozen", b.frozen}});
  }
  j["source_vocab"] = m.source_vocab.words();
  j["target_vocab"] = m.target_vocab.words();
  return j;
}

CheckpointMeta meta_from_json(const Json& j) {
  CheckpointMeta m;
  m.format_version = j.at("format_version").get<int>();
  if (m.format_version != kCheckpointFormatVersion) {
    throw Error(ErrorClass::kCheckpoint,
                "unsupported checkpoint format version " + std::to_string(m.format_version));
  }
  m.kind = model_kind_from_string(j.at("model_kind").get<std::string>());
  const Json& d = j.at("dims");
  m.dims.source_vocab = d.at("source_vocab").get<std::size_t>();
  m.dims.target_vocab = d.at("target_vocab").get<std::size_t>();
  m.dims.embed = d.at("embed").get<std::size_t>();
  m.dims.hidden = d.at("hidden").get<std::size_t>();
  m.dims.align = d.at("align").get<std::size_t>();
  m.dims.readout = d.at("readout").get<std::size_t>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.training_steps = j.at("training_steps").get<std::size_t>();
  m.provenance = j.at("provenance").get<std::string>();
  for (const auto& [k, v] : j.at("hyperparameters").items()) {
    m.hyperparameters[k] = v.get<std::string>();
  }
  for (const auto& b : j.at("blocks")) {
    m.blocks.push_back(
        {b.at("name").get<std::string>(), b.at("shape").get<Shape>(), b.at("frozen").get<bool>()});
  }
  m.source_vocab = Vocabulary::from_words(j.at("source_vocab").get<std::vector<std::string>>());
  m.target_vocab = Vocabulary::from_words(j.at("target_vocab").get<std::vector<std::string>>());
  return m;
}

template <typename Real>
std::vector<BlockInfo> block_layout(const TranslationModel<Real>& model) {
  std::vector<BlockInfo> blocks;
  for (const auto* p : model.parameters()) blocks.push_back({p->name, p->value.shape(), p->frozen});
  return blocks;
}

template <typename Model>
Model load_into(const fs::path& dir, CheckpointMeta& meta, ModelKind expected) {
  if (meta.kind != expected) {
    throw Error(ErrorClass::kCheckpoint, dir.string() + " holds a " +
                                             std::string(to_string(meta.kind)) + " model, expected " +
                                             std::string(to_string(expected)));
  }
  meta.dims.validate();
  if (meta.source_vocab.size() != meta.dims.source_vocab ||
      meta.target_vocab.size() != meta.dims.target_vocab) {
    throw Error(ErrorClass::kCheckpoint, "vocabulary lists disagree with declared dims");
  }
  Model model = Model::random(meta.dims, 0);
  auto params = model.parameters();
  if (params.size() != meta.blocks.size()) {
    throw Error(ErrorClass::kCheckpoint, "checkpoint declares " +
                                             std::to_string(meta.blocks.size()) +
                                             " blocks, architecture has " +
                                             std::to_string(params.size()));
  }
  std::size_t total = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const BlockInfo& b = meta.blocks[i];
    if (b.name != params[i]->name || b.shape != params[i]->value.shape()) {
      throw Error(ErrorClass::kCheckpoint,
                  "block " + std::to_string(i) + " is " + b.name + " " + shape_to_string(b.shape) +
                      ", architecture expects " + params[i]->name + " " +
                      shape_to_string(params[i]->value.shape()));
    }
    total += shape_size(b.shape);
  }
  const std::string bytes = read_file(dir / "params");
  if (bytes.size() != total * sizeof(float)) {
    throw Error(ErrorClass::kCheckpoint, "params holds " + std::to_string(bytes.size()) +
                                             " bytes, blocks declare " +
                                             std::to_string(total * sizeof(float)));
  }
  std::size_t offset = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i]->frozen = meta.blocks[i].frozen;
    for (auto& v : params[i]->value.data()) {
      std::uint32_t raw;
      std::memcpy(&raw, bytes.data() + offset, sizeof raw);
      offset += sizeof raw;
      v = static_cast<typename std::remove_reference_t<decltype(v)>>(
          std::bit_cast<float>(to_little_endian(raw)));
    }
  }
  return model;
}

}  // namespace

template <typename Real>
void save_checkpoint(const fs::path& dir, const TranslationModel<Real>& model,
                     CheckpointMeta meta) {
  meta.format_version = kCheckpointFormatVersion;
  meta.kind = model.kind();
  meta.dims = model.dims();
  meta.blocks = block_layout(model);
  if (meta.source_vocab.size() != meta.dims.source_vocab ||
      meta.target_vocab.size() != meta.dims.target_vocab) {
    throw Error(ErrorClass::kVocabulary,
                "vocabulary sizes " + std::to_string(meta.source_vocab.size()) + "/" +
                    std::to_string(meta.target_vocab.size()) + " do not match model dims " +
                    std::to_string(meta.dims.source_vocab) + "/" +
                    std::to_string(meta.dims.target_vocab));
  }

  std::string payload;
  for (const auto* p : model.parameters()) {
    for (Real v : p->value.values()) {
      const std::uint32_t raw = to_little_endian(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
      char buf[sizeof raw];
      std::memcpy(buf, &raw, sizeof raw);
      payload.append(buf, sizeof raw);
    }
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorClass::kIo, "cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "meta", meta_to_json(meta).dump(2) + "\n");
  write_file(dir / "params", payload);
}

CheckpointMeta read_checkpoint_meta(const fs::path& dir) {
  const std::string text = read_file(dir / "meta");
  try {
    return meta_from_json(Json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorClass::kCheckpoint, (dir / "meta").string() + ": " + e.what());
  }
}

template <typename Real>
LoadedSingle<Real> load_single(const fs::path& dir) {
  CheckpointMeta meta = read_checkpoint_meta(dir);
  auto model = load_into<SingleAttentionModel<Real>>(dir, meta, ModelKind::kSingle);
  return {std::move(model), std::move(meta)};
}

template <typename Real>
LoadedDouble<Real> load_double(const fs::path& dir) {
  CheckpointMeta meta = read_checkpoint_meta(dir);
  auto model = load_into<DoubleAttentionModel<Real>>(dir, meta, ModelKind::kDouble);
  return {std::move(model), std::move(meta)};
}

std::string checkpoint_digest(const fs::path& dir) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorClass::kCheckpoint, "cannot initialize SHA-256");
  }
  for (const char* name : {"meta", "params"}) {
    const std::string bytes = read_file(dir / name);
    EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size());
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[md[i] >> 4];
    hex += kHex[md[i] & 0xF];
  }
  return hex;
}

template void save_checkpoint(const fs::path&, const TranslationModel<float>&, CheckpointMeta);
template void save_checkpoint(const fs::path&, const TranslationModel<double>&, CheckpointMeta);
template LoadedSingle<float> load_single(const fs::path&);
template LoadedSingle<double> load_single(const fs::path&);
template LoadedDouble<float> load_double(const fs::path&);
template LoadedDouble<double> load_double(const fs::path&);

}  // namespace draftnmt
