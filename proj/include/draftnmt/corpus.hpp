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
#include <string>
#include <string_view>
#include <vector>

#include "draftnmt/models.hpp"
#include "draftnmt/vocabulary.hpp"

namespace draftnmt {

enum class Task { kCopy, kReversal, kAgreement };

std::string_view to_string(Task task);
Task task_from_string(std::string_view s);

struct CorpusRecord {
  TokenSeq source;
  TokenSeq target;
  std::optional<TokenSeq> draft;

  friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

struct ParallelCorpus {
  std::vector<CorpusRecord> records;
  std::string task;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return records.size(); }
  bool has_drafts() const noexcept { return !records.empty() && records.front().draft.has_value(); }
};

struct GeneratorSpec {
  Task task = Task::kCopy;
  std::size_t count = 1;
  std::size_t min_length = 3;
  std::size_t max_length = 8;
  // Total vocabulary size including the four reserved ids.
  std::size_t vocab_size = 50;
  std::uint64_t seed = 1;
};

/// Spelling of generator word `id` ("w<id>").
std::string synthetic_word(std::size_t id);

/// Closing tokens of the agreement task: the last two ids of the vocabulary,
/// selected by the parity (even, odd) of the sum of the source word ids.
std::pair<std::string, std::string> agreement_closers(std::size_t vocab_size);

/// Target side for a source under a task.
TokenSeq make_target(Task task, const TokenSeq& source, std::size_t vocab_size);

/// Deterministic in `spec`: equal seeds give identical corpora.
ParallelCorpus generate(const GeneratorSpec& spec);

struct CorpusSplits {
  ParallelCorpus train, dev, test;
};

/// Train/dev/test drawn from disjoint seed streams of one run seed.
CorpusSplits generate_splits(GeneratorSpec spec, std::size_t train_size, std::size_t dev_size,
                             std::size_t test_size);

/// TAB-separated: source, target and (stage-2 corpora) draft; tokens are
/// space-separated. The draft field may be empty.
ParallelCorpus read_corpus(const std::filesystem::path& path);
void write_corpus(const ParallelCorpus& corpus, const std::filesystem::path& path);
/// Parses one corpus line. Throws kParse on malformed input.
CorpusRecord parse_corpus_line(std::string_view line, std::size_t line_number = 0);
std::string format_corpus_line(const CorpusRecord& record);

TokenSeq split_tokens(std::string_view text);
std::string join_tokens(const TokenSeq& tokens);

/// Vocabularies built from the words of one side, in sorted order.
Vocabulary source_vocabulary(const ParallelCorpus& corpus);
Vocabulary target_vocabulary(const ParallelCorpus& corpus);

/// Id form; drafts use the target vocabulary.
std::vector<Example> to_examples(const ParallelCorpus& corpus, const Vocabulary& source_vocab,
                                 const Vocabulary& target_vocab);

/// Throws kVocabulary naming the first corpus word missing from a vocabulary.
void check_vocabulary_coverage(const ParallelCorpus& corpus, const Vocabulary& source_vocab,
                               const Vocabulary& target_vocab);

}  // namespace draftnmt
