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

#include "draftnmt/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "draftnmt/checkpoint.hpp"
#include "draftnmt/corpus.hpp"
#include "draftnmt/errors.hpp"
#include "draftnmt/init.hpp"

namespace draftnmt {

namespace fs = std::filesystem;

namespace {

inline constexpr std::uint64_t kStage1InitStream = 1;
inline constexpr std::uint64_t kStage2InitStream = 2;

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorClass::kIo, "cannot write " + path.string());
  return out;
}

std::map<std::string, std::string> recorded_hyperparameters(const RunConfig& config,
                                                            const TrainingLog& log) {
  auto h = config.to_map();
  // Paths and seed lists describe the run, not the model.
  h.erase("output_dir");
  h.erase("seeds");
  h["best_step"] = log.best_step ? std::to_string(*log.best_step) : "";
  return h;
}

void log_config(std::ostream* log, const RunConfig& config, std::string_view stage) {
  if (!log) return;
  *log << "kind=config stage=" << stage;
  for (const auto& [k, v] : config.to_map()) *log << ' ' << k << '=' << v;
  *log << '\n';
}

std::vector<Example> validation_examples(const std::optional<fs::path>& dev,
                                         const std::vector<Example>& fallback,
                                         const Vocabulary& src, const Vocabulary& tgt,
                                         bool need_drafts) {
  if (!dev) return fallback;
  const ParallelCorpus corpus = read_corpus(*dev);
  if (need_drafts != corpus.has_drafts()) {
    throw Error(ErrorClass::kParse, dev->string() + (need_drafts ? " has no draft field"
                                                                 : " has an unexpected draft field"));
  }
  return to_examples(corpus, src, tgt);
}

template <typename Real>
TrainOutcome train_stage1(const RunConfig& config, const fs::path& corpus_path,
                          const fs::path& checkpoint, const std::optional<fs::path>& dev,
                          std::ostream* log) {
  const ParallelCorpus corpus = read_corpus(corpus_path);
  if (corpus.has_drafts()) {
    throw Error(ErrorClass::kParse, corpus_path.string() + ": stage 1 expects two-field records");
  }
  CheckpointMeta meta;
  meta.source_vocab = source_vocabulary(corpus);
  meta.target_vocab = target_vocabulary(corpus);
  const auto train_data = to_examples(corpus, meta.source_vocab, meta.target_vocab);
  const auto valid_data =
      validation_examples(dev, train_data, meta.source_vocab, meta.target_vocab, false);

  auto model = SingleAttentionModel<Real>::random(
      config.model_dims(meta.source_vocab.size(), meta.target_vocab.size()),
      derive_seed(config.seed, kStage1InitStream));
  log_config(log, config, "1");
  TrainOutcome outcome;
  outcome.log = train(model, std::span<const Example>(train_data), valid_data,
                      config.train_config(1), log);

  meta.seed = config.seed;
  meta.training_steps = outcome.log.steps.size();
  meta.hyperparameters = recorded_hyperparameters(config, outcome.log);
  save_checkpoint(checkpoint, model, std::move(meta));
  outcome.digest = checkpoint_digest(checkpoint);
  return outcome;
}

template <typename Real>
std::size_t make_drafts(const fs::path& stage1_checkpoint, const fs::path& corpus_path,
                        const fs::path& output, std::size_t beam_width, bool gold_draft,
                        const DecodeOptions& options) {
  const auto stage1 = load_single<Real>(stage1_checkpoint);
  ParallelCorpus corpus = read_corpus(corpus_path);
  check_vocabulary_coverage(corpus, stage1.meta.source_vocab, stage1.meta.target_vocab);
  for (auto& r : corpus.records) {
    if (gold_draft) {
      r.draft = r.target;
      continue;
    }
    const IdSeq source = stage1.meta.source_vocab.encode(r.source);
    const auto hyps = beam_search(stage1.model, ModelInput{source, {}}, beam_width, options);
    r.draft = stage1.meta.target_vocab.decode(hyps.front().tokens);
  }
  write_corpus(corpus, output);
  return corpus.size();
}

template <typename Real>
TrainOutcome train_stage2(const RunConfig& config, const fs::path& stage1_checkpoint,
                          const fs::path& triples, const fs::path& checkpoint,
                          const std::optional<fs::path>& dev, std::ostream* log) {
  const auto stage1 = load_single<Real>(stage1_checkpoint);
  const ParallelCorpus corpus = read_corpus(triples);
  if (!corpus.has_drafts()) {
    throw Error(ErrorClass::kParse, triples.string() + ": stage 2 expects three-field records");
  }
  check_vocabulary_coverage(corpus, stage1.meta.source_vocab, stage1.meta.target_vocab);
  const auto train_data = to_examples(corpus, stage1.meta.source_vocab, stage1.meta.target_vocab);
  const auto valid_data = validation_examples(dev, train_data, stage1.meta.source_vocab,
                                              stage1.meta.target_vocab, true);

  const ModelDims dims = config.model_dims(stage1.meta.dims.source_vocab,
                                           stage1.meta.dims.target_vocab);
  auto model = inherit(stage1.model, dims, derive_seed(config.seed, kStage2InitStream));
  log_config(log, config, "2");
  TrainOutcome outcome;
  outcome.log = train(model, std::span<const Example>(train_data), valid_data,
                      config.train_config(2), log);

  CheckpointMeta meta;
  meta.source_vocab = stage1.meta.source_vocab;
  meta.target_vocab = stage1.meta.target_vocab;
  meta.seed = config.seed;
  meta.training_steps = outcome.log.steps.size();
  meta.hyperparameters = recorded_hyperparameters(config, outcome.log);
  meta.provenance = checkpoint_digest(stage1_checkpoint);
  save_checkpoint(checkpoint, model, std::move(meta));
  outcome.digest = checkpoint_digest(checkpoint);
  return outcome;
}

template <typename Real>
TranslationOutput translate(std::span<const fs::path> checkpoints,
                            std::span<const TokenSeq> sources, std::size_t beam_width,
                            const DecodeOptions& options) {
  if (checkpoints.empty() || checkpoints.size() > 2) {
    throw Error(ErrorClass::kUsage, "translate takes one or two checkpoints");
  }
  const auto stage1 = load_single<Real>(checkpoints[0]);
  std::optional<LoadedDouble<Real>> stage2;
  if (checkpoints.size() == 2) {
    stage2 = load_double<Real>(checkpoints[1]);
    if (!(stage2->meta.source_vocab == stage1.meta.source_vocab) ||
        !(stage2->meta.target_vocab == stage1.meta.target_vocab)) {
      throw Error(ErrorClass::kVocabulary, checkpoints[0].string() + " and " +
                                               checkpoints[1].string() +
                                               " have different vocabularies");
    }
  }
  const Vocabulary& src_vocab = stage1.meta.source_vocab;
  const Vocabulary& tgt_vocab = stage1.meta.target_vocab;

  TranslationOutput out;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (sources[i].empty()) {
      throw Error(ErrorClass::kEmptyInput, "input line " + std::to_string(i + 1) + " is empty");
    }
    const IdSeq source = src_vocab.encode(sources[i]);
    const auto hyps = beam_search(stage1.model, ModelInput{source, {}}, beam_width, options);
    if (hyps.size() >= 2) out.prefix_overlap.push_back(prefix_overlap(std::span(hyps)));
    const IdSeq& draft = hyps.front().tokens;
    if (!stage2) {
      out.outputs.push_back(tgt_vocab.decode(draft));
      continue;
    }
    if (draft.empty()) ++out.empty_drafts;
    const auto refined = beam_search(stage2->model, ModelInput{source, draft}, beam_width, options);
    out.drafts.push_back(tgt_vocab.decode(draft));
    out.outputs.push_back(tgt_vocab.decode(refined.front().tokens));
  }
  return out;
}

std::string field_of(const std::string& line, std::size_t field, const fs::path& path,
                     std::size_t line_no) {
  if (field < 1) throw Error(ErrorClass::kUsage, "field numbers start at 1");
  std::size_t start = 0;
  for (std::size_t f = 1; f < field; ++f) {
    const auto tab = line.find('\t', start);
    if (tab == std::string::npos) {
      throw Error(ErrorClass::kParse, path.string() + " line " + std::to_string(line_no) +
                                          " has no field " + std::to_string(field));
    }
    start = tab + 1;
  }
  const auto end = line.find('\t', start);
  return line.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

std::vector<TokenSeq> read_field(const fs::path& path, std::size_t field) {
  std::vector<TokenSeq> out;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out.push_back(split_tokens(field_of(lines[i], field, path, i + 1)));
  }
  return out;
}

// Reruns `body` tagging any failure with the phase it happened in.
template <typename F>
auto in_phase(std::string_view phase, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.error_class(), "phase " + std::string(phase) + ": " + e.what());
  }
}

}  // namespace

TrainOutcome cmd_train_stage1(const RunConfig& config, const fs::path& corpus,
                              const fs::path& checkpoint, const std::optional<fs::path>& dev,
                              std::ostream* log) {
  config.validate();
  return config.precision == Precision::kFloat32
             ? train_stage1<float>(config, corpus, checkpoint, dev, log)
             : train_stage1<double>(config, corpus, checkpoint, dev, log);
}

std::size_t cmd_make_drafts(const fs::path& stage1_checkpoint, const fs::path& corpus,
                            const fs::path& output, std::size_t beam_width, bool gold_draft,
                            Precision precision, const DecodeOptions& options) {
  if (beam_width < 1) throw Error(ErrorClass::kConfig, "beam width must be at least 1");
  return precision == Precision::kFloat32
             ? make_drafts<float>(stage1_checkpoint, corpus, output, beam_width, gold_draft,
                                  options)
             : make_drafts<double>(stage1_checkpoint, corpus, output, beam_width, gold_draft,
                                   options);
}

TrainOutcome cmd_train_stage2(const RunConfig& config, const fs::path& stage1_checkpoint,
                              const fs::path& triples, const fs::path& checkpoint,
                              const std::optional<fs::path>& dev, std::ostream* log) {
  config.validate();
  return config.precision == Precision::kFloat32
             ? train_stage2<float>(config, stage1_checkpoint, triples, checkpoint, dev, log)
             : train_stage2<double>(config, stage1_checkpoint, triples, checkpoint, dev, log);
}

TranslationOutput translate_sources(std::span<const fs::path> checkpoints,
                                    std::span<const TokenSeq> sources, std::size_t beam_width,
                                    Precision precision, const DecodeOptions& options) {
  return precision == Precision::kFloat32
             ? translate<float>(checkpoints, sources, beam_width, options)
             : translate<double>(checkpoints, sources, beam_width, options);
}

TranslationOutput cmd_translate(std::span<const fs::path> checkpoints, const fs::path& input,
                                std::size_t beam_width, std::ostream& out, Precision precision,
                                const DecodeOptions& options) {
  const auto sources = read_field(input, 1);
  TranslationOutput result =
      translate_sources(checkpoints, sources, beam_width, precision, options);
  for (std::size_t i = 0; i < result.outputs.size(); ++i) {
    if (!result.drafts.empty()) out << join_tokens(result.drafts[i]) << '\t';
    out << join_tokens(result.outputs[i]) << '\n';
  }
  return result;
}

BleuReport cmd_evaluate(const fs::path& hypotheses, const fs::path& references,
                        std::size_t hypothesis_field, std::size_t reference_field) {
  const auto hyps = read_field(hypotheses, hypothesis_field);
  const auto refs = read_field(references, reference_field);
  if (hyps.size() != refs.size()) {
    throw Error(ErrorClass::kShape, hypotheses.string() + " has " + std::to_string(hyps.size()) +
                                        " lines, " + references.string() + " has " +
                                        std::to_string(refs.size()));
  }
  return bleu(hyps, refs);
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorClass::kEmptyInput, "median of nothing");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorClass::kIo, "cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::string PipelineReport::table() const {
  std::string out;
  char buf[256];
  auto row = [&](const char* label, auto value_of, double med, bool signed_value) {
    std::snprintf(buf, sizeof buf, "%-30s", label);
    out += buf;
    for (const auto& s : seeds) {
      std::snprintf(buf, sizeof buf, signed_value ? " %+10.2f" : " %10.2f", value_of(s));
      out += buf;
    }
    std::snprintf(buf, sizeof buf, signed_value ? " %+10.2f\n" : " %10.2f\n", med);
    out += buf;
  };

  std::snprintf(buf, sizeof buf, "task=%s beam=%zu (BLEU x 100)\n", task.c_str(), beam_width);
  out += buf;
  std::snprintf(buf, sizeof buf, "%-30s", "system");
  out += buf;
  for (const auto& s : seeds) {
    std::snprintf(buf, sizeof buf, " %10s", ("seed=" + std::to_string(s.seed)).c_str());
    out += buf;
  }
  out += "     median\n";
  row("stage-1 (single attention)", [](const auto& s) { return 100.0 * s.stage1_bleu; },
      100.0 * median_stage1_bleu, false);
  row("two-stage (double attention)", [](const auto& s) { return 100.0 * s.two_stage_bleu; },
      100.0 * median_two_stage_bleu, false);
  row("delta", [](const auto& s) { return 100.0 * s.delta(); }, 100.0 * median_delta, true);

  std::vector<double> overlaps;
  for (const auto& s : seeds) overlaps.push_back(s.prefix_overlap);
  out += "\nstage-1 beam diagnostics\n";
  std::snprintf(buf, sizeof buf, "%-30s", "prefix overlap (mean)");
  out += buf;
  for (const auto& s : seeds) {
    std::snprintf(buf, sizeof buf, " %10.4f", s.prefix_overlap);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, " %10.4f\n", seeds.empty() ? 0.0 : median(overlaps));
  out += buf;

  out += "\n";
  for (const auto& s : seeds) {
    std::snprintf(buf, sizeof buf,
                  "seed=%llu stage1_bleu=%.6f two_stage_bleu=%.6f delta=%+.6f "
                  "prefix_overlap=%.6f empty_drafts=%zu stage1_val_loss=%.6f "
                  "stage2_val_loss=%.6f\n",
                  static_cast<unsigned long long>(s.seed), s.stage1_bleu, s.two_stage_bleu,
                  s.delta(), s.prefix_overlap, s.empty_drafts, s.stage1_validation,
                  s.stage2_validation);
    out += buf;
  }
  std::snprintf(buf, sizeof buf,
                "median_stage1_bleu=%.6f median_two_stage_bleu=%.6f median_delta=%+.6f "
                "mean_prefix_overlap=%.6f\n",
                median_stage1_bleu, median_two_stage_bleu, median_delta, mean_prefix_overlap);
  out += buf;
  return out;
}

PipelineReport cmd_pipeline(const RunConfig& config, std::ostream* progress) {
  config.validate();
  PipelineReport report;
  report.task = std::string(to_string(config.task));
  report.beam_width = config.beam_width;
  DecodeOptions options;
  options.length_normalize = config.length_normalize;

  for (const std::uint64_t seed : config.run_seeds()) {
    RunConfig c = config;
    c.seed = seed;
    const fs::path dir = config.output_dir / ("seed-" + std::to_string(seed));
    fs::create_directories(dir);
    auto say = [&](std::string_view what) {
      if (progress) *progress << "seed=" << seed << " phase=" << what << '\n' << std::flush;
    };

    say("generate");
    in_phase("generate", [&] {
      const CorpusSplits splits =
          generate_splits(c.generator_spec(seed), c.train_size, c.dev_size, c.test_size);
      write_corpus(splits.train, dir / "train.tsv");
      write_corpus(splits.dev, dir / "dev.tsv");
      write_corpus(splits.test, dir / "test.tsv");
      return 0;
    });

    PipelineSeedResult result;
    result.seed = seed;

    say("train-stage1");
    const TrainOutcome s1 = in_phase("train-stage1", [&] {
      auto log = open_output(dir / "stage1.log");
      return cmd_train_stage1(c, dir / "train.tsv", dir / "stage1", dir / "dev.tsv", &log);
    });
    result.stage1_validation = s1.log.best_validation;

    say("make-drafts");
    in_phase("make-drafts", [&] {
      cmd_make_drafts(dir / "stage1", dir / "train.tsv", dir / "train.triples.tsv",
                      c.beam_width, c.gold_draft, c.precision, options);
      cmd_make_drafts(dir / "stage1", dir / "dev.tsv", dir / "dev.triples.tsv", c.beam_width,
                      c.gold_draft, c.precision, options);
      return 0;
    });

    say("train-stage2");
    const TrainOutcome s2 = in_phase("train-stage2", [&] {
      auto log = open_output(dir / "stage2.log");
      return cmd_train_stage2(c, dir / "stage1", dir / "train.triples.tsv", dir / "stage2",
                              dir / "dev.triples.tsv", &log);
    });
    result.stage2_validation = s2.log.best_validation;

    say("translate");
    const TranslationOutput tr = in_phase("translate", [&] {
      const fs::path checkpoints[] = {dir / "stage1", dir / "stage2"};
      auto out = open_output(dir / "test.out.tsv");
      return cmd_translate(checkpoints, dir / "test.tsv", c.beam_width, out, c.precision,
                           options);
    });
    result.empty_drafts = tr.empty_drafts;
    if (!tr.prefix_overlap.empty()) {
      result.prefix_overlap =
          std::accumulate(tr.prefix_overlap.begin(), tr.prefix_overlap.end(), 0.0) /
          static_cast<double>(tr.prefix_overlap.size());
    }

    say("evaluate");
    in_phase("evaluate", [&] {
      result.stage1_bleu = cmd_evaluate(dir / "test.out.tsv", dir / "test.tsv", 1, 2).score;
      result.two_stage_bleu = cmd_evaluate(dir / "test.out.tsv", dir / "test.tsv", 2, 2).score;
      return 0;
    });
    report.seeds.push_back(result);
  }

  std::vector<double> s1, s2, deltas, overlaps;
  for (const auto& r : report.seeds) {
    s1.push_back(r.stage1_bleu);
    s2.push_back(r.two_stage_bleu);
    deltas.push_back(r.delta());
    overlaps.push_back(r.prefix_overlap);
  }
  report.median_stage1_bleu = median(s1);
  report.median_two_stage_bleu = median(s2);
  report.median_delta = report.median_two_stage_bleu - report.median_stage1_bleu;
  report.mean_prefix_overlap =
      std::accumulate(overlaps.begin(), overlaps.end(), 0.0) / static_cast<double>(overlaps.size());

  auto out = open_output(config.output_dir / "report.txt");
  out << format_config(config) << '\n' << report.table();
  return report;
}

}  // namespace draftnmt
