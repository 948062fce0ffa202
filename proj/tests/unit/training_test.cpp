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
#include <limits>
#include <sstream>

#include "draftnmt/training.hpp"
#include "test_support.hpp"

namespace draftnmt {
namespace {

using T = Tensor<double>;
const ModelDims kTiny{10, 10, 4, 6, 5, 7};

std::vector<Example> copy_data() {
  return {{{4, 5, 6}, {}, {4, 5, 6}}, {{7, 8}, {}, {7, 8}}, {{9}, {}, {9}},
          {{5, 4}, {}, {5, 4}},       {{6, 7, 8}, {}, {6, 7, 8}}};
}

TEST(Batch, PaddingAndMask) {
  const std::vector<Example> data = {{{4, 5, 6}, {7}, {4, 5}}, {{8}, {}, {9, 9, 9}}};
  const TrainingBatch b = make_batch(data, true);
  EXPECT_EQ(b.size(), 2u);
  EXPECT_EQ(b.source.cols, 3u);
  EXPECT_EQ(b.source.at(1, 1), kPadId);
  ASSERT_TRUE(b.draft.has_value());
  EXPECT_EQ(b.draft->unpadded_row(1), IdSeq{});
  EXPECT_EQ(b.target.cols, 4u);
  EXPECT_EQ(b.target.unpadded_row(0), (IdSeq{4, 5, kEosId}));
  EXPECT_EQ(b.real_tokens(0), 3u);
  EXPECT_EQ(b.real_tokens(1), 4u);
  EXPECT_EQ(b.mask[3], 0);
  EXPECT_NO_THROW(b.validate());
  TrainingBatch broken = b;
  broken.mask[3] = 1;
  EXPECT_THROW(broken.validate(), Error);
  EXPECT_THROW(make_batch(std::span<const Example>(), false), Error);
}

TEST(Batch, LossIsMeanPerTokenNll) {
  const auto m = SingleAttentionModel<double>::random(kTiny, 1);
  const auto data = copy_data();
  const TrainingBatch b = make_batch(data, false);
  Tape<double> tape;
  const double got = tape.value(batch_loss(tape, m, b)).item();
  double want = 0.0;
  for (const auto& ex : data) {
    const auto ref = testing::reference_log_probs(m, ex.source, ex.target);
    want += testing::reference_nll(ref, ex.target) / static_cast<double>(ex.target.size() + 1);
  }
  EXPECT_NEAR(got, want / static_cast<double>(data.size()), 1e-12);
}

TEST(Adam, FirstTwoStepsMatchHandComputation) {
  Parameter<double> p{"p", T::vector({1.0, -2.0}), false};
  Parameter<double>* params[] = {&p};
  AdamState st;
  st.learning_rate = 0.1;
  const T g1[] = {T::vector({0.5, -4.0})};
  ASSERT_TRUE(adam_step<double>(params, g1, st).applied);
  // Step 1: m̂ = g, v̂ = g², update = lr·g/(|g| + ε).
  EXPECT_NEAR(p.value[0], 1.0 - 0.1 * 0.5 / (0.5 + 1e-8), 1e-12);
  EXPECT_NEAR(p.value[1], -2.0 + 0.1 * 4.0 / (4.0 + 1e-8), 1e-12);
  const T g2[] = {T::vector({1.0, 0.0})};
  const double before = p.value[0];
  ASSERT_TRUE(adam_step<double>(params, g2, st).applied);
  const double m = 0.9 * (0.1 * 0.5) + 0.1 * 1.0;
  const double v = 0.999 * (0.001 * 0.25) + 0.001 * 1.0;
  const double mhat = m / (1 - 0.81), vhat = v / (1 - 0.999 * 0.999);
  EXPECT_NEAR(p.value[0], before - 0.1 * mhat / (std::sqrt(vhat) + 1e-8), 1e-12);
  EXPECT_EQ(st.step, 2u);
}

TEST(Adam, NonFiniteGradientSkipsWholeUpdate) {
  Parameter<double> a{"a", T::vector({1.0}), false};
  Parameter<double> b{"b", T::vector({2.0}), false};
  Parameter<double>* params[] = {&a, &b};
  AdamState st;
  const T grads[] = {T::vector({1.0}), T::vector({std::numeric_limits<double>::quiet_NaN()})};
  const AdamReport r = adam_step<double>(params, grads, st);
  EXPECT_FALSE(r.applied);
  EXPECT_FALSE(r.reason.empty());
  EXPECT_EQ(a.value[0], 1.0);
  EXPECT_EQ(b.value[0], 2.0);
  EXPECT_EQ(st.step, 0u);
}

TEST(Adam, FrozenParametersUntouched) {
  Parameter<double> a{"a", T::vector({1.0}), true};
  Parameter<double> b{"b", T::vector({2.0}), false};
  Parameter<double>* params[] = {&a, &b};
  AdamState st;
  const T grads[] = {T::vector({1.0}), T::vector({1.0})};
  adam_step<double>(params, grads, st);
  EXPECT_EQ(a.value[0], 1.0);
  EXPECT_NE(b.value[0], 2.0);
}

TEST(Train, LossDecreasesAndLogIsParseable) {
  auto m = SingleAttentionModel<float>::random(kTiny, 2);
  const auto data = copy_data();
  TrainConfig cfg;
  cfg.steps = 300;
  cfg.batch_size = 2;
  cfg.learning_rate = 0.01;
  std::ostringstream log;
  const TrainingLog result = train<float>(m, data, data, cfg, &log);
  ASSERT_EQ(result.steps.size(), 300u);
  // Validation at step 0, after every epoch of 3 steps, and at the end.
  EXPECT_EQ(result.validations.front().step, 0u);
  EXPECT_EQ(result.validations[1].step, 3u);
  EXPECT_EQ(result.validations.back().step, 300u);
  EXPECT_NEAR(result.validations.front().loss, std::log(10.0), 0.3);
  EXPECT_LT(result.best_validation, 0.5 * result.validations.front().loss);
  EXPECT_NE(log.str().find("kind=train step=1 loss="), std::string::npos);
  EXPECT_NE(log.str().find("kind=valid epoch=0 step=0 val_loss="), std::string::npos);
  // keep_best leaves the best-validation parameters in place.
  EXPECT_NEAR(mean_loss(m, std::span<const Example>(data)), result.best_validation, 1e-6);
}

TEST(Train, SameSeedSameParameters) {
  const auto data = copy_data();
  TrainConfig cfg;
  cfg.steps = 10;
  cfg.batch_size = 2;
  auto a = SingleAttentionModel<float>::random(kTiny, 3);
  auto b = SingleAttentionModel<float>::random(kTiny, 3);
  train<float>(a, data, data, cfg);
  train<float>(b, data, data, cfg);
  const auto pa = a.parameters(), pb = b.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->value, pb[i]->value);
}

TEST(Train, FrozenEmbeddingsStayByteIdentical) {
  const auto stage1 = SingleAttentionModel<float>::random(kTiny, 4);
  auto stage2 = inherit(stage1, 5);
  std::vector<Example> data = copy_data();
  for (auto& ex : data) ex.draft = ex.target;
  TrainConfig cfg;
  cfg.steps = 20;
  cfg.batch_size = 2;
  cfg.learning_rate = 0.05;
  train<float>(stage2, data, data, cfg);
  EXPECT_EQ(stage2.source_embedding.value, stage1.source_embedding.value);
  EXPECT_EQ(stage2.draft_embedding.value, stage1.target_embedding.value);
  EXPECT_EQ(stage2.target_embedding.value, stage1.target_embedding.value);
}

TEST(Train, ZeroStepsLeavesInitialization) {
  auto m = SingleAttentionModel<float>::random(kTiny, 6);
  const auto fresh = SingleAttentionModel<float>::random(kTiny, 6);
  TrainConfig cfg;
  cfg.steps = 0;
  const auto data = copy_data();
  const auto log = train<float>(m, data, data, cfg);
  EXPECT_TRUE(log.steps.empty());
  const auto pa = m.parameters();
  const auto pb = fresh.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->value, pb[i]->value);
}

TEST(Train, RejectsEmptyCorpus) {
  auto m = SingleAttentionModel<float>::random(kTiny, 7);
  EXPECT_THROW(train<float>(m, {}, {}, TrainConfig{}), Error);
}

}  // namespace
}  // namespace draftnmt
