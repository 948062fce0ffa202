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

// Command-line front end: generate, train-stage1, make-drafts, train-stage2,
// translate, evaluate and pipeline.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "draftnmt/config.hpp"
#include "draftnmt/corpus.hpp"
#include "draftnmt/errors.hpp"
#include "draftnmt/pipeline.hpp"

namespace fs = std::filesystem;
using namespace draftnmt;

namespace {

// --config plus one --<key> flag per config key; flags override the file.
struct ConfigFlags {
  std::string file;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("--config", file, "key=value config file");
    for (const auto& key : RunConfig::keys()) {
      app->add_option("--" + key, overrides[key], "override config key " + key);
    }
  }

  RunConfig resolve(CLI::App* app) const {
    RunConfig config = file.empty() ? RunConfig{} : load_config(file);
    for (const auto& key : RunConfig::keys()) {
      if (app->count("--" + key) > 0) config.set(key, overrides.at(key));
    }
    config.validate();
    return config;
  }
};

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

int fail(std::string_view error_class, const std::string& message) {
  std::cerr << "error: " << error_class << ": " << one_line(message) << std::endl;
  return 1;
}

DecodeOptions decode_options(const RunConfig& c) {
  DecodeOptions o;
  o.length_normalize = c.length_normalize;
  return o;
}

std::ofstream open_or_throw(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorClass::kIo, "cannot write " + path.string());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"draftnmt: draft-then-refine neural machine translation"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "write synthetic train/dev/test corpora");
  ConfigFlags gen_flags;
  gen_flags.attach(gen);
  std::string gen_out;
  gen->add_option("--output", gen_out, "directory for train.tsv, dev.tsv and test.tsv")
      ->required();

  auto* t1 = app.add_subcommand("train-stage1", "train the single-attention model");
  ConfigFlags t1_flags;
  t1_flags.attach(t1);
  std::string t1_corpus, t1_dev, t1_ckpt, t1_log;
  t1->add_option("--corpus", t1_corpus, "two-field training corpus")->required();
  t1->add_option("--dev", t1_dev, "two-field validation corpus");
  t1->add_option("--checkpoint", t1_ckpt, "output checkpoint directory")->required();
  t1->add_option("--log", t1_log, "training log file (default: stderr)");

  auto* md = app.add_subcommand("make-drafts", "decode a corpus into stage-2 triples");
  ConfigFlags md_flags;
  md_flags.attach(md);
  std::string md_ckpt, md_corpus, md_out;
  md->add_option("--checkpoint", md_ckpt, "stage-1 checkpoint")->required();
  md->add_option("--corpus", md_corpus, "corpus to decode")->required();
  md->add_option("--output", md_out, "three-field output corpus")->required();
  bool md_gold = false;
  md->add_flag("--gold-draft", md_gold, "use the reference as the draft");

  auto* t2 = app.add_subcommand("train-stage2", "train the double-attention model");
  ConfigFlags t2_flags;
  t2_flags.attach(t2);
  std::string t2_stage1, t2_corpus, t2_dev, t2_ckpt, t2_log;
  t2->add_option("--stage1", t2_stage1, "stage-1 checkpoint")->required();
  t2->add_option("--corpus", t2_corpus, "three-field training corpus")->required();
  t2->add_option("--dev", t2_dev, "three-field validation corpus");
  t2->add_option("--checkpoint", t2_ckpt, "output checkpoint directory")->required();
  t2->add_option("--log", t2_log, "training log file (default: stderr)");

  auto* tr = app.add_subcommand("translate", "translate the first field of each input line");
  ConfigFlags tr_flags;
  tr_flags.attach(tr);
  std::vector<std::string> tr_ckpts;
  std::string tr_input, tr_output;
  tr->add_option("--checkpoint", tr_ckpts, "stage-1 checkpoint, optionally followed by stage-2")
      ->required()
      ->expected(1, 2);
  tr->add_option("--input", tr_input, "input file")->required();
  tr->add_option("--output", tr_output, "output file (default: stdout)");

  auto* ev = app.add_subcommand("evaluate", "corpus BLEU of hypotheses against references");
  std::string ev_hyp, ev_ref;
  std::size_t ev_hyp_field = 1, ev_ref_field = 1;
  ev->add_option("--hyp", ev_hyp, "hypothesis file")->required();
  ev->add_option("--ref", ev_ref, "reference file")->required();
  ev->add_option("--hyp-field", ev_hyp_field, "1-based TAB field of the hypothesis file");
  ev->add_option("--ref-field", ev_ref_field, "1-based TAB field of the reference file");

  auto* pl = app.add_subcommand("pipeline", "run every phase and print the report");
  ConfigFlags pl_flags;
  pl_flags.attach(pl);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << to_string(ErrorClass::kUsage) << ": " << one_line(e.what())
              << std::endl;
    return 2;
  }

  try {
    if (gen->parsed()) {
      const RunConfig c = gen_flags.resolve(gen);
      const auto splits =
          generate_splits(c.generator_spec(c.seed), c.train_size, c.dev_size, c.test_size);
      fs::create_directories(gen_out);
      write_corpus(splits.train, fs::path(gen_out) / "train.tsv");
      write_corpus(splits.dev, fs::path(gen_out) / "dev.tsv");
      write_corpus(splits.test, fs::path(gen_out) / "test.tsv");
    } else if (t1->parsed()) {
      const RunConfig c = t1_flags.resolve(t1);
      std::optional<std::ofstream> log_file;
      if (!t1_log.empty()) log_file = open_or_throw(t1_log);
      std::ostream& log = log_file ? *log_file : std::cerr;
      const auto outcome =
          cmd_train_stage1(c, t1_corpus, t1_ckpt,
                           t1_dev.empty() ? std::nullopt : std::optional<fs::path>(t1_dev), &log);
      std::cout << "checkpoint=" << t1_ckpt << " digest=" << outcome.digest
                << " best_val_loss=" << outcome.log.best_validation << '\n';
    } else if (md->parsed()) {
      const RunConfig c = md_flags.resolve(md);
      const std::size_t n = cmd_make_drafts(md_ckpt, md_corpus, md_out, c.beam_width,
                                            md_gold || c.gold_draft, c.precision,
                                            decode_options(c));
      std::cout << "records=" << n << " output=" << md_out << '\n';
    } else if (t2->parsed()) {
      const RunConfig c = t2_flags.resolve(t2);
      std::optional<std::ofstream> log_file;
      if (!t2_log.empty()) log_file = open_or_throw(t2_log);
      std::ostream& log = log_file ? *log_file : std::cerr;
      const auto outcome =
          cmd_train_stage2(c, t2_stage1, t2_corpus, t2_ckpt,
                           t2_dev.empty() ? std::nullopt : std::optional<fs::path>(t2_dev), &log);
      std::cout << "checkpoint=" << t2_ckpt << " digest=" << outcome.digest
                << " best_val_loss=" << outcome.log.best_validation << '\n';
    } else if (tr->parsed()) {
      const RunConfig c = tr_flags.resolve(tr);
      const std::vector<fs::path> ckpts(tr_ckpts.begin(), tr_ckpts.end());
      std::optional<std::ofstream> out_file;
      if (!tr_output.empty()) out_file = open_or_throw(tr_output);
      const auto result = cmd_translate(ckpts, tr_input, c.beam_width,
                                        out_file ? *out_file : std::cout, c.precision,
                                        decode_options(c));
      if (result.empty_drafts > 0) {
        std::cerr << "warning: " << result.empty_drafts
                  << " empty drafts refined from a lone end-of-sequence token\n";
      }
    } else if (ev->parsed()) {
      std::cout << format_bleu_report(cmd_evaluate(ev_hyp, ev_ref, ev_hyp_field, ev_ref_field));
    } else if (pl->parsed()) {
      const RunConfig c = pl_flags.resolve(pl);
      const auto report = cmd_pipeline(c, &std::cerr);
      std::cout << report.table();
    }
  } catch (const Error& e) {
    return fail(to_string(e.error_class()), e.what());
  } catch (const std::exception& e) {
    return fail("internal_error", e.what());
  }
  return 0;
}
