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

#include <cmath>
#include <random>
#include <set>

#include "draftnmt/models.hpp"
#include "draftnmt/training.hpp"
#include "test_support.hpp"

namespace draftnmt {
namespace {

const ModelDims kTiny{11, 13, 4, 6, 5, 7};

TEST(Models, DimsValidation) {
  EXPECT_NO_THROW(kTiny.validate());
  ModelDims bad = kTiny;
  bad.hidden = 0;
  EXPECT_THROW(bad.validate(), Error);
  bad = kTiny;
  bad.target_vocab = 3;  // no room for reserved ids
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Models, ParameterNamesAreUniqueAndShapesPlausible) {
  const auto single = SingleAttentionModel<double>::random(kTiny, 1);
  const auto dbl = DoubleAttentionModel<double>::random(kTiny, 1);
  for (const auto& params : {single.parameters(), dbl.parameters()}) {
    std::set<std::string> names;
    for (const auto* p : params) {
      EXPECT_TRUE(names.insert(p->name).second) << p->name;
      EXPECT_GT(p->value.size(), 0u);
    }
  }
  EXPECT_EQ(single.decoder.context_width, 2 * kTiny.hidden);
  EXPECT_EQ(dbl.decoder.context_width, 4 * kTiny.hidden);
  EXPECT_EQ(single.context_width(), 12u);
  EXPECT_EQ(dbl.context_width(), 24u);
  EXPECT_EQ(dbl.draft_embedding.value.shape(), (Shape{13, 4}));
}

TEST(Models, SeedDeterminesInitialization) {
  const auto a = SingleAttentionModel<float>::random(kTiny, 9);
  const auto b = SingleAttentionModel<float>::random(kTiny, 9);
  const auto c = SingleAttentionModel<float>::random(kTiny, 10);
  const auto pa = a.parameters(), pb = b.parameters(), pc = c.parameters();
  bool any_diff = false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i]->value, pb[i]->value);
    any_diff |= !(pa[i]->value == pc[i]->value);
  }
  EXPECT_TRUE(any_diff);
}

TEST(Models, SingleForwardMatchesReference) {
  const auto m = SingleAttentionModel<double>::random(kTiny, 2);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const IdSeq src = testing::random_ids(rng, 1 + trial, kTiny.source_vocab);
    const IdSeq tgt = testing::random_ids(rng, trial, kTiny.target_vocab);
    Tape<double> tape;
    const auto fr = forward_single(tape, m, src, tgt);
    const auto ref = testing::reference_log_probs(m, src, tgt);
    ASSERT_EQ(fr.log_probs.size(), tgt.size() + 1);
    for (std::size_t t = 0; t < ref.size(); ++t) {
      const auto& got = tape.value(fr.log_probs[t]);
      for (std::size_t v = 0; v < ref[t].size(); ++v) EXPECT_NEAR(got[v], ref[t][v], 1e-12);
    }
    EXPECT_NEAR(tape.value(fr.nll).item(), testing::reference_nll(ref, tgt), 1e-11);
  }
}

TEST(Models, DoubleForwardMatchesReference) {
  const auto m = DoubleAttentionModel<double>::random(kTiny, 4);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const IdSeq src = testing::random_ids(rng, 1 + trial, kTiny.source_vocab);
    const IdSeq drf = testing::random_ids(rng, trial, kTiny.target_vocab);  // includes empty
    const IdSeq tgt = testing::random_ids(rng, 2, kTiny.target_vocab);
    Tape<double> tape;
    const auto fr = forward_double(tape, m, src, drf, tgt);
    const auto ref = testing::reference_log_probs(m, src, drf, tgt);
    EXPECT_NEAR(tape.value(fr.nll).item(), testing::reference_nll(ref, tgt), 1e-11);
    ASSERT_EQ(fr.energies[0].size(), 2u);
    EXPECT_EQ(tape.value(fr.energies[0][0]).size(), src.size() + 1);
    EXPECT_EQ(tape.value(fr.energies[0][1]).size(), drf.size() + 1);
  }
}

TEST(Models, FloatTracksDouble) {
  const auto md = SingleAttentionModel<double>::random(kTiny, 6);
  const auto mf = model_cast<float>(md);
  const IdSeq src{4, 5, 6}, tgt{7, 8};
  Tape<double> td;
  Tape<float> tf;
  EXPECT_NEAR(td.value(forward_single(td, md, src, tgt).nll).item(),
              tf.value(forward_single(tf, mf, src, tgt).nll).item(), 1e-4);
}

TEST(Models, UniformReadoutGivesLogVocabPerToken) {
  auto single = SingleAttentionModel<double>::random(kTiny, 7);
  auto dbl = DoubleAttentionModel<double>::random(kTiny, 7);
  for (auto* p : single.readout_parameters()) p->value.fill(0.0);
  for (auto* p : dbl.readout_parameters()) p->value.fill(0.0);
  const std::vector<Example> data = {{{4, 5}, {6}, {7, 8, 9}}, {{6}, {}, {10}}};
  const TrainingBatch batch = make_batch(data, true);
  for (const TranslationModel<double>* m :
       std::initializer_list<const TranslationModel<double>*>{&single, &dbl}) {
    Tape<double> tape;
    EXPECT_NEAR(tape.value(batch_loss(tape, *m, batch)).item(), std::log(13.0), 1e-12);
  }
}

TEST(Models, InputErrors) {
  const auto m = DoubleAttentionModel<double>::random(kTiny, 8);
  const IdSeq empty, ok{4}, too_big{11};
  Tape<double> tape;
  try {
    forward_double(tape, m, empty, ok, ok);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.error_class(), ErrorClass::kEmptyInput);
  }
  try {
    forward_double(tape, m, too_big, ok, ok);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.error_class(), ErrorClass::kRange);
  }
  const IdSeq bad_target{13};
  EXPECT_THROW(forward_double(tape, m, ok, ok, bad_target), Error);
  EXPECT_NO_THROW(forward_double(tape, m, ok, empty, ok));
}

TEST(Models, InheritCopiesAndFreezesEmbeddings) {
  const auto stage1 = SingleAttentionModel<float>::random(kTiny, 9);
  const auto stage2 = inherit(stage1, 10);
  EXPECT_EQ(stage2.source_embedding.value, stage1.source_embedding.value);
  EXPECT_EQ(stage2.draft_embedding.value, stage1.target_embedding.value);
  EXPECT_EQ(stage2.target_embedding.value, stage1.target_embedding.value);
  std::size_t frozen = 0;
  for (const auto* p : stage2.parameters()) frozen += p->frozen;
  EXPECT_EQ(frozen, 3u);
  EXPECT_TRUE(stage2.source_embedding.frozen && stage2.draft_embedding.frozen &&
              stage2.target_embedding.frozen);
}

TEST(Models, InheritRejectsIncompatibleDims) {
  const auto stage1 = SingleAttentionModel<float>::random(kTiny, 11);
  ModelDims d = kTiny;
  d.target_vocab = 14;
  try {
    inherit(stage1, d, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.error_class(), ErrorClass::kVocabulary);
  }
  d = kTiny;
  d.embed = 5;
  try {
    inherit(stage1, d, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.error_class(), ErrorClass::kShape);
  }
  d = kTiny;
  d.hidden = 9;  // other widths may differ
  EXPECT_NO_THROW(inherit(stage1, d, 1));
}

TEST(Models, ModelCastRoundTripKeepsFloatValues) {
  const auto mf = DoubleAttentionModel<float>::random(kTiny, 12);
  const auto back = model_cast<float>(model_cast<double>(mf));
  const auto a = mf.parameters(), b = back.parameters();
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i]->value, b[i]->value);
    EXPECT_EQ(a[i]->frozen, b[i]->frozen);
  }
}

TEST(Models, KindNames) {
  EXPECT_EQ(to_string(ModelKind::kSingle), "single_attention");
  EXPECT_EQ(model_kind_from_string("double_attention"), ModelKind::kDouble);
  EXPECT_THROW(model_kind_from_string("triple"), Error);
}

}  // namespace
}  // namespace draftnmt
