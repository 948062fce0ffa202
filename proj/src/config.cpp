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

#include "draftnmt/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>

#include "draftnmt/errors.hpp"
#include "draftnmt/init.hpp"

namespace draftnmt {

std::string_view to_string(Precision p) {
  return p == Precision::kFloat32 ? "float32" : "float64";
}

Precision precision_from_string(std::string_view s) {
  if (s == "float32") return Precision::kFloat32;
  if (s == "float64") return Precision::kFloat64;
  throw Error(ErrorClass::kConfig, "precision must be float32 or float64, got '" +
                                       std::string(s) + "'");
}

namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  throw Error(ErrorClass::kConfig, "key '" + std::string(key) + "': '" + std::string(value) +
                                       "' is not " + expected);
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view value) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    bad_value(key, value, "a non-negative integer");
  }
  return out;
}

double parse_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value, "a number");
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value, "true/false");
}

std::string format_double(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Field {
  std::string name;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field size_field(std::string name, T RunConfig::*member) {
  return {name,
          [name, member](RunConfig& c, std::string_view v) { c.*member = parse_int<T>(name, v); },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

Field double_field(std::string name, double RunConfig::*member) {
  return {name, [name, member](RunConfig& c, std::string_view v) {
            c.*member = parse_double(name, v);
          },
          [member](const RunConfig& c) { return format_double(c.*member); }};
}

Field bool_field(std::string name, bool RunConfig::*member) {
  return {name,
          [name, member](RunConfig& c, std::string_view v) { c.*member = parse_bool(name, v); },
          [member](const RunConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"task", [](RunConfig& c, std::string_view v) { c.task = task_from_string(v); },
       [](const RunConfig& c) { return std::string(to_string(c.task)); }},
      size_field("train_size", &RunConfig::train_size),
      size_field("dev_size", &RunConfig::dev_size),
      size_field("test_size", &RunConfig::test_size),
      size_field("min_length", &RunConfig::min_length),
      size_field("max_length", &RunConfig::max_length),
      size_field("vocab_size", &RunConfig::vocab_size),
      size_field("embed", &RunConfig::embed),
      size_field("hidden", &RunConfig::hidden),
      size_field("align", &RunConfig::align),
      size_field("readout", &RunConfig::readout),
      size_field("batch_size", &RunConfig::batch_size),
      double_field("learning_rate", &RunConfig::learning_rate),
      double_field("clip_norm", &RunConfig::clip_norm),
      size_field("steps", &RunConfig::steps),
      size_field("stage2_steps", &RunConfig::stage2_steps),
      size_field("validate_every", &RunConfig::validate_every),
      bool_field("keep_best", &RunConfig::keep_best),
      size_field("beam_width", &RunConfig::beam_width),
      bool_field("length_normalize", &RunConfig::length_normalize),
      size_field("seed", &RunConfig::seed),
      {"seeds",
       [](RunConfig& c, std::string_view v) {
         c.seeds.clear();
         while (!v.empty()) {
           const auto comma = v.find(',');
           const std::string_view item = trim(v.substr(0, comma));
           if (!item.empty()) c.seeds.push_back(parse_int<std::uint64_t>("seeds", item));
           v = comma == std::string_view::npos ? std::string_view{} : v.substr(comma + 1);
         }
       },
       [](const RunConfig& c) {
         std::string out;
         for (std::size_t i = 0; i < c.seeds.size(); ++i) {
           out += (i ? "," : "") + std::to_string(c.seeds[i]);
         }
         return out;
       }},
      bool_field("gold_draft", &RunConfig::gold_draft),
      {"precision", [](RunConfig& c, std::string_view v) { c.precision = precision_from_string(v); },
       [](const RunConfig& c) { return std::string(to_string(c.precision)); }},
      {"output_dir", [](RunConfig& c, std::string_view v) { c.output_dir = std::string(v); },
       [](const RunConfig& c) { return c.output_dir.string(); }},
  };
  return table;
}

const Field& field(std::string_view key) {
  for (const auto& f : fields()) {
    if (f.name == key) return f;
  }
  throw Error(ErrorClass::kConfig, "unknown config key '" + std::string(key) + "'");
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.name);
    return out;
  }();
  return names;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  field(key).set(*this, trim(value));
}

std::string RunConfig::get(std::string_view key) const { return field(key).get(*this); }

std::map<std::string, std::string> RunConfig::to_map() const {
  std::map<std::string, std::string> out;
  for (const auto& f : fields()) out[f.name] = f.get(*this);
  return out;
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorClass::kConfig, what);
  };
  require(embed > 0 && hidden > 0 && align > 0 && readout > 0, "all model widths must be positive");
  require(beam_width >= 1, "beam_width must be at least 1");
  require(batch_size >= 1, "batch_size must be at least 1");
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(clip_norm >= 0.0, "clip_norm must be non-negative");
  require(vocab_size > kFirstWordId, "vocab_size must exceed the 4 reserved ids");
  require(min_length >= 1 && min_length <= max_length, "need 1 <= min_length <= max_length");
  require(train_size >= 1 && dev_size >= 1 && test_size >= 1, "corpus sizes must be at least 1");
}

ModelDims RunConfig::model_dims(std::size_t source_vocab, std::size_t target_vocab) const {
  return ModelDims{source_vocab, target_vocab, embed, hidden, align, readout};
}

TrainConfig RunConfig::train_config(std::size_t stage) const {
  TrainConfig t;
  t.steps = stage == 2 && stage2_steps > 0 ? stage2_steps : steps;
  t.batch_size = batch_size;
  t.learning_rate = learning_rate;
  t.clip_norm = clip_norm;
  t.seed = derive_seed(seed, 10 + stage);
  t.validate_every = validate_every;
  t.keep_best = keep_best;
  return t;
}

GeneratorSpec RunConfig::generator_spec(std::uint64_t run_seed) const {
  GeneratorSpec g;
  g.task = task;
  g.min_length = min_length;
  g.max_length = max_length;
  g.vocab_size = vocab_size;
  g.seed = run_seed;
  return g;
}

std::vector<std::uint64_t> RunConfig::run_seeds() const {
  return seeds.empty() ? std::vector<std::uint64_t>{seed} : seeds;
}

void apply_config_text(RunConfig& config, std::string_view text, std::string_view origin) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorClass::kConfig, std::string(origin) + ":" + std::to_string(line_no) +
                                           ": expected key=value");
    }
    try {
      config.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(e.error_class(),
                  std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorClass::kIo, "cannot read config " + path.string());
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  RunConfig config;
  apply_config_text(config, text, path.string());
  return config;
}

std::string format_config(const RunConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += f.name + "=" + f.get(config) + "\n";
  return out;
}

}  // namespace draftnmt
