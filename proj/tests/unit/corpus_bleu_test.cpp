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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "draftnmt/bleu.hpp"
#include "draftnmt/corpus.hpp"

namespace draftnmt {
namespace {

namespace fs = std::filesystem;

TokenSeq words(std::initializer_list<const char*> ws) { return TokenSeq(ws.begin(), ws.end()); }

TEST(Generator, TaskTargets) {
  const TokenSeq src = words({"w5", "w6", "w7"});
  EXPECT_EQ(make_target(Task::kCopy, src, 50), src);
  EXPECT_EQ(make_target(Task::kReversal, src, 50), words({"w7", "w6", "w5"}));
  // 5 + 6 + 7 = 18 is even: the first closer, w48.
  EXPECT_EQ(make_target(Task::kAgreement, src, 50), words({"w5", "w6", "w7", "w48"}));
  // Changing one token by an odd amount flips the parity and the closer.
  EXPECT_EQ(make_target(Task::kAgreement, words({"w5", "w6", "w8"}), 50).back(), "w49");
  // An even change keeps it.
  EXPECT_EQ(make_target(Task::kAgreement, words({"w5", "w6", "w9"}), 50).back(), "w48");
}

TEST(Generator, DeterministicAndInRange) {
  GeneratorSpec spec{Task::kAgreement, 200, 2, 6, 20, 42};
  const auto a = generate(spec);
  const auto b = generate(spec);
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(a.task, "agreement");
  EXPECT_EQ(a.seed, 42u);
  spec.seed = 43;
  EXPECT_NE(generate(spec).records, a.records);
  for (const auto& r : a.records) {
    ASSERT_GE(r.source.size(), 2u);
    ASSERT_LE(r.source.size(), 6u);
    EXPECT_EQ(r.target.size(), r.source.size() + 1);
    for (const auto& w : r.source) {
      const int id = std::stoi(w.substr(1));
      EXPECT_GE(id, 4);
      EXPECT_LE(id, 17) << "content words stay clear of the closing tokens";
    }
  }
}

TEST(Generator, BothClosersOccur) {
  const auto c = generate({Task::kAgreement, 100, 3, 8, 50, 1});
  std::size_t even = 0;
  for (const auto& r : c.records) even += r.target.back() == "w48";
  EXPECT_GT(even, 20u);
  EXPECT_LT(even, 80u);
}

TEST(Generator, InvalidSpecs) {
  EXPECT_THROW(generate({Task::kCopy, 1, 1, 3, 4, 1}), Error);    // vocab too small
  EXPECT_THROW(generate({Task::kCopy, 0, 1, 3, 10, 1}), Error);   // no records
  EXPECT_THROW(generate({Task::kCopy, 1, 4, 3, 10, 1}), Error);   // min > max
  EXPECT_THROW(generate({Task::kCopy, 1, 0, 3, 10, 1}), Error);   // empty sides
  EXPECT_THROW(generate({Task::kAgreement, 1, 1, 3, 6, 1}), Error);
  EXPECT_NO_THROW(generate({Task::kAgreement, 1, 1, 3, 7, 1}));
  EXPECT_THROW(task_from_string("sort"), Error);
}

TEST(Generator, SplitsUseDisjointStreams) {
  const auto s = generate_splits({Task::kCopy, 0, 3, 8, 50, 5}, 50, 20, 20);
  EXPECT_EQ(s.train.size(), 50u);
  EXPECT_EQ(s.dev.size(), 20u);
  EXPECT_NE(s.train.seed, s.dev.seed);
  EXPECT_NE(s.dev.seed, s.test.seed);
  EXPECT_NE(s.train.records[0], s.dev.records[0]);
}

TEST(CorpusFile, RoundTripAndDraftField) {
  const fs::path dir = fs::temp_directory_path() / "draftnmt_corpus_test";
  fs::create_directories(dir);
  ParallelCorpus c;
  c.records = {{words({"a", "b"}), words({"b", "a"}), TokenSeq{}},
               {words({"c"}), words({"c"}), words({"c", "c"})}};
  write_corpus(c, dir / "t.tsv");
  const auto back = read_corpus(dir / "t.tsv");
  EXPECT_EQ(back.records, c.records);
  EXPECT_TRUE(back.has_drafts());
  std::ifstream in(dir / "t.tsv");
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, "a b\tb a\t");
}

TEST(CorpusFile, ParseErrors) {
  EXPECT_THROW(parse_corpus_line("only one field"), Error);
  EXPECT_THROW(parse_corpus_line("a\tb\tc\td"), Error);
  EXPECT_THROW(parse_corpus_line("\tb"), Error);
  EXPECT_THROW(parse_corpus_line("a\t  "), Error);
  const auto r = parse_corpus_line("a  b\tc\r");
  EXPECT_EQ(r.source, words({"a", "b"}));
  EXPECT_EQ(r.target, words({"c"}));
  EXPECT_FALSE(r.draft.has_value());
  try {
    read_corpus("/nonexistent/corpus.tsv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.error_class(), ErrorClass::kIo);
  }
}

TEST(Vocabulary, ReservedIdsAndRoundTrip) {
  const Vocabulary v = Vocabulary::from_words(words({"x", "y", "z"}));
  EXPECT_EQ(v.size(), 7u);
  EXPECT_EQ(v.id("<pad>"), kPadId);
  EXPECT_EQ(v.id("</s>"), kEosId);
  EXPECT_EQ(v.id("x"), kFirstWordId);
  const TokenSeq sentence = words({"z", "x", "y"});
  EXPECT_EQ(v.decode(v.encode(sentence)), sentence);
  EXPECT_EQ(v.encode(words({"q"})), IdSeq{kUnkId});
  const IdSeq with_reserved{kBosId, 4, kPadId, kUnkId, kEosId};
  EXPECT_EQ(v.decode(with_reserved), words({"x", "<unk>"}));
  EXPECT_THROW(v.word(7), Error);
}

TEST(Vocabulary, CorpusVocabulariesAreSorted) {
  ParallelCorpus c;
  c.records = {{words({"b", "a"}), words({"c"}), std::nullopt}};
  EXPECT_EQ(source_vocabulary(c).words(), words({"a", "b"}));
  EXPECT_EQ(target_vocabulary(c).words(), words({"c"}));
  const auto ex = to_examples(c, source_vocabulary(c), target_vocabulary(c));
  EXPECT_EQ(ex[0].source, (IdSeq{5, 4}));
  Vocabulary small = Vocabulary::from_words(words({"a"}));
  try {
    check_vocabulary_coverage(c, small, target_vocabulary(c));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.error_class(), ErrorClass::kVocabulary);
  }
}

TEST(Bleu, IdenticalCorpusScoresOne) {
  const std::vector<TokenSeq> c = {words({"a", "b", "c", "d"}), words({"e", "f", "g", "h", "i"})};
  const auto r = bleu(c, c);
  EXPECT_DOUBLE_EQ(r.score, 1.0);
  EXPECT_DOUBLE_EQ(r.brevity_penalty, 1.0);
}

TEST(Bleu, EmptyHypothesesScoreZero) {
  const std::vector<TokenSeq> hyp = {{}, {}};
  const std::vector<TokenSeq> ref = {words({"a", "b"}), words({"c"})};
  EXPECT_EQ(bleu(hyp, ref).score, 0.0);
}

TEST(Bleu, ZeroFourGramPrecisionGivesZero) {
  const std::vector<TokenSeq> hyp = {words({"a", "b", "c", "d"})};
  const std::vector<TokenSeq> ref = {words({"a", "b", "c", "e"})};
  const auto r = bleu(hyp, ref);
  EXPECT_DOUBLE_EQ(r.precisions[0], 3.0 / 4.0);
  EXPECT_DOUBLE_EQ(r.precisions[1], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.precisions[2], 1.0 / 2.0);
  EXPECT_DOUBLE_EQ(r.precisions[3], 0.0);
  EXPECT_EQ(r.score, 0.0);
}

TEST(Bleu, HandCountedFiveTokenExample) {
  const std::vector<TokenSeq> hyp = {words({"a", "b", "c", "d", "e"})};
  const std::vector<TokenSeq> ref = {words({"a", "b", "c", "d", "f"})};
  const auto r = bleu(hyp, ref);
  // Matches 4/5, 3/4, 2/3, 1/2; equal lengths so no brevity penalty.
  EXPECT_EQ(r.matches, (std::vector<std::size_t>{4, 3, 2, 1}));
  EXPECT_EQ(r.totals, (std::vector<std::size_t>{5, 4, 3, 2}));
  EXPECT_DOUBLE_EQ(r.score, std::pow(0.8 * 0.75 * (2.0 / 3.0) * 0.5, 0.25));
}

TEST(Bleu, ClippingBrevityAndCase) {
  // "the the the" against "The cat": unigram matches clipped to 1 of 3.
  const std::vector<TokenSeq> hyp = {words({"the", "the", "the"})};
  const std::vector<TokenSeq> ref = {words({"The", "cat"})};
  const auto r = bleu(hyp, ref);
  EXPECT_EQ(r.matches[0], 1u);
  EXPECT_EQ(r.totals[0], 3u);
  // Short hypothesis: BP = exp(1 - 6/4).
  const std::vector<TokenSeq> h2 = {words({"a", "b", "c", "d"})};
  const std::vector<TokenSeq> r2 = {words({"a", "b", "c", "d", "e", "f"})};
  const auto short_r = bleu(h2, r2);
  EXPECT_DOUBLE_EQ(short_r.brevity_penalty, std::exp(1.0 - 6.0 / 4.0));
  EXPECT_DOUBLE_EQ(short_r.score, std::exp(1.0 - 6.0 / 4.0));
}

TEST(Bleu, CountsAggregateOverCorpus) {
  // Sentence 2 alone has no 4-grams; the corpus score still uses sentence 1's.
  const std::vector<TokenSeq> hyp = {words({"a", "b", "c", "d"}), words({"x", "y"})};
  const std::vector<TokenSeq> ref = {words({"a", "b", "c", "d"}), words({"x", "z"})};
  const auto r = bleu(hyp, ref);
  EXPECT_EQ(r.matches, (std::vector<std::size_t>{5, 3, 2, 1}));
  EXPECT_EQ(r.totals, (std::vector<std::size_t>{6, 4, 2, 1}));
  EXPECT_DOUBLE_EQ(r.score, std::pow((5.0 / 6.0) * 0.75 * 1.0 * 1.0, 0.25));
}

TEST(Bleu, PermutationInvariant) {
  std::mt19937_64 rng(1);
  const auto c = generate({Task::kReversal, 30, 2, 7, 12, 3});
  std::vector<TokenSeq> hyp, ref;
  for (const auto& r : c.records) {
    hyp.push_back(r.source);
    ref.push_back(r.target);
  }
  const double before = bleu(hyp, ref).score;
  std::vector<std::size_t> order(hyp.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<TokenSeq> h2, r2;
  for (auto i : order) {
    h2.push_back(hyp[i]);
    r2.push_back(ref[i]);
  }
  EXPECT_DOUBLE_EQ(bleu(h2, r2).score, before);
}

TEST(Bleu, CountMismatchRejected) {
  const std::vector<TokenSeq> one = {words({"a"})};
  const std::vector<TokenSeq> two = {words({"a"}), words({"b"})};
  EXPECT_THROW(bleu(one, two), Error);
}

}  // namespace
}  // namespace draftnmt
