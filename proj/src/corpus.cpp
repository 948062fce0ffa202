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

#include "draftnmt/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "draftnmt/init.hpp"

namespace draftnmt {

std::string_view to_string(Task task) {
  switch (task) {
    case Task::kCopy: return "copy";
    case Task::kReversal: return "reversal";
    case Task::kAgreement: return "agreement";
  }
  return "copy";
}

Task task_from_string(std::string_view s) {
  if (s == "copy") return Task::kCopy;
  if (s == "reversal") return Task::kReversal;
  if (s == "agreement") return Task::kAgreement;
  throw Error(ErrorClass::kConfig, "unknown task '" + std::string(s) + "'");
}

std::string synthetic_word(std::size_t id) { return "w" + std::to_string(id); }

std::pair<std::string, std::string> agreement_closers(std::size_t vocab_size) {
  return {synthetic_word(vocab_size - 2), synthetic_word(vocab_size - 1)};
}

namespace {

std::size_t word_id(const std::string& word) {
  if (word.size() < 2 || word[0] != 'w') {
    throw Error(ErrorClass::kParse, "'" + word + "' is not a generator word");
  }
  return std::stoul(word.substr(1));
}

}  // namespace

TokenSeq make_target(Task task, const TokenSeq& source, std::size_t vocab_size) {
  switch (task) {
    case Task::kCopy:
      return source;
    case Task::kReversal:
      return TokenSeq(source.rbegin(), source.rend());
    case Task::kAgreement: {
      std::size_t sum = 0;
      for (const auto& w : source) sum += word_id(w);
      TokenSeq target = source;
      const auto [even, odd] = agreement_closers(vocab_size);
      target.push_back(sum % 2 == 0 ? even : odd);
      return target;
    }
  }
  return source;
}

ParallelCorpus generate(const GeneratorSpec& spec) {
  if (spec.vocab_size <= kFirstWordId) {
    throw Error(ErrorClass::kConfig, "vocab_size must exceed the 4 reserved ids");
  }
  if (spec.task == Task::kAgreement && spec.vocab_size < kFirstWordId + 3) {
    throw Error(ErrorClass::kConfig, "agreement task needs vocab_size >= 7");
  }
  if (spec.count < 1) throw Error(ErrorClass::kConfig, "corpus count must be >= 1");
  if (spec.min_length < 1 || spec.min_length > spec.max_length) {
    throw Error(ErrorClass::kConfig, "invalid length range [" + std::to_string(spec.min_length) +
                                         ", " + std::to_string(spec.max_length) + "]");
  }
  // Agreement reserves the last two ids for its closing tokens.
  const std::size_t last_word =
      spec.task == Task::kAgreement ? spec.vocab_size - 3 : spec.vocab_size - 1;

  Rng rng(spec.seed);
  std::uniform_int_distribution<std::size_t> length(spec.min_length, spec.max_length);
  std::uniform_int_distribution<std::size_t> word(kFirstWordId, last_word);

  ParallelCorpus corpus;
  corpus.task = std::string(to_string(spec.task));
  corpus.seed = spec.seed;
  corpus.records.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    CorpusRecord r;
    const std::size_t len = length(rng);
    for (std::size_t k = 0; k < len; ++k) r.source.push_back(synthetic_word(word(rng)));
    r.target = make_target(spec.task, r.source, spec.vocab_size);
    corpus.records.push_back(std::move(r));
  }
  return corpus;
}

CorpusSplits generate_splits(GeneratorSpec spec, std::size_t train_size, std::size_t dev_size,
                             std::size_t test_size) {
  const std::uint64_t base = spec.seed;
  CorpusSplits s;
  spec.count = train_size;
  spec.seed = derive_seed(base, 101);
  s.train = generate(spec);
  spec.count = dev_size;
  spec.seed = derive_seed(base, 102);
  s.dev = generate(spec);
  spec.count = test_size;
  spec.seed = derive_seed(base, 103);
  s.test = generate(spec);
  return s;
}

TokenSeq split_tokens(std::string_view text) {
  TokenSeq out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ' && text[j] != '\r') ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join_tokens(const TokenSeq& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

CorpusRecord parse_corpus_line(std::string_view line, std::size_t line_number) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  const std::string where = "line " + std::to_string(line_number);
  if (fields.size() < 2 || fields.size() > 3) {
    throw Error(ErrorClass::kParse, where + ": expected 2 or 3 TAB-separated fields, found " +
                                        std::to_string(fields.size()));
  }
  CorpusRecord r;
  r.source = split_tokens(fields[0]);
  r.target = split_tokens(fields[1]);
  if (r.source.empty() || r.target.empty()) {
    throw Error(ErrorClass::kParse, where + ": empty source or target");
  }
  if (fields.size() == 3) r.draft = split_tokens(fields[2]);
  return r;
}

std::string format_corpus_line(const CorpusRecord& record) {
  std::string line = join_tokens(record.source) + '\t' + join_tokens(record.target);
  if (record.draft) line += '\t' + join_tokens(*record.draft);
  return line;
}

ParallelCorpus read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorClass::kIo, "cannot read corpus " + path.string());
  ParallelCorpus corpus;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    corpus.records.push_back(parse_corpus_line(line, n));
    if (corpus.records.back().draft.has_value() != corpus.records.front().draft.has_value()) {
      throw Error(ErrorClass::kParse, path.string() + " line " + std::to_string(n) +
                                          ": mixes two- and three-field records");
    }
  }
  if (corpus.records.empty()) throw Error(ErrorClass::kParse, path.string() + " has no records");
  return corpus;
}

void write_corpus(const ParallelCorpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorClass::kIo, "cannot write corpus " + path.string());
  for (const auto& r : corpus.records) out << format_corpus_line(r) << '\n';
  if (!out) throw Error(ErrorClass::kIo, "failed writing " + path.string());
}

namespace {

Vocabulary sorted_vocabulary(const std::set<std::string>& words) {
  const std::vector<std::string> ordered(words.begin(), words.end());
  return Vocabulary::from_words(ordered);
}

}  // namespace

Vocabulary source_vocabulary(const ParallelCorpus& corpus) {
  std::set<std::string> words;
  for (const auto& r : corpus.records) words.insert(r.source.begin(), r.source.end());
  return sorted_vocabulary(words);
}

Vocabulary target_vocabulary(const ParallelCorpus& corpus) {
  std::set<std::string> words;
  for (const auto& r : corpus.records) words.insert(r.target.begin(), r.target.end());
  return sorted_vocabulary(words);
}

std::vector<Example> to_examples(const ParallelCorpus& corpus, const Vocabulary& source_vocab,
                                 const Vocabulary& target_vocab) {
  std::vector<Example> out;
  out.reserve(corpus.size());
  for (const auto& r : corpus.records) {
    Example ex;
    ex.source = source_vocab.encode(r.source);
    ex.target = target_vocab.encode(r.target);
    if (r.draft) ex.draft = target_vocab.encode(*r.draft);
    out.push_back(std::move(ex));
  }
  return out;
}

void check_vocabulary_coverage(const ParallelCorpus& corpus, const Vocabulary& source_vocab,
                               const Vocabulary& target_vocab) {
  auto check = [](const TokenSeq& tokens, const Vocabulary& vocab, const char* side,
                  std::size_t line) {
    for (const auto& w : tokens) {
      if (!vocab.contains(w)) {
        throw Error(ErrorClass::kVocabulary, std::string(side) + " word '" + w + "' on record " +
                                                 std::to_string(line) +
                                                 " is not in the model vocabulary");
      }
    }
  };
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const auto& r = corpus.records[i];
    check(r.source, source_vocab, "source", i + 1);
    check(r.target, target_vocab, "target", i + 1);
    if (r.draft) check(*r.draft, target_vocab, "draft", i + 1);
  }
}

}  // namespace draftnmt
