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

#include "draftnmt/training.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>

#include "draftnmt/init.hpp"

namespace draftnmt {

IdSeq IdMatrix::unpadded_row(std::size_t r) const {
  IdSeq out;
  for (std::size_t c = 0; c < cols && at(r, c) != kPadId; ++c) out.push_back(at(r, c));
  return out;
}

std::size_t TrainingBatch::real_tokens(std::size_t row) const {
  std::size_t n = 0;
  for (std::size_t c = 0; c < target.cols; ++c) n += mask[row * target.cols + c];
  return n;
}

void TrainingBatch::validate() const {
  if (mask.size() != target.rows * target.cols) {
    throw Error(ErrorClass::kShape, "batch mask has " + std::to_string(mask.size()) +
                                        " entries for a " + std::to_string(target.rows) + "x" +
                                        std::to_string(target.cols) + " target");
  }
  if (source.rows != target.rows || (draft && draft->rows != target.rows)) {
    throw Error(ErrorClass::kShape, "batch sides have different row counts");
  }
  for (std::size_t i = 0; i < target.ids.size(); ++i) {
    if ((target.ids[i] == kPadId) != (mask[i] == 0)) {
      throw Error(ErrorClass::kShape, "batch mask disagrees with target padding at position " +
                                          std::to_string(i));
    }
  }
}

namespace {

IdMatrix pad_rows(const std::vector<IdSeq>& rows) {
  IdMatrix m;
  m.rows = rows.size();
  for (const auto& r : rows) m.cols = std::max(m.cols, r.size());
  m.ids.assign(m.rows * m.cols, kPadId);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(rows[i].begin(), rows[i].end(), m.ids.begin() + i * m.cols);
  }
  return m;
}

// Target ids for the loss: the sentence followed by the end token.
IdSeq with_end(const IdSeq& target) {
  IdSeq out = target;
  out.push_back(kEosId);
  return out;
}

template <typename Real>
Var sentence_loss(Tape<Real>& tape, const TranslationModel<Real>& model, const ModelInput& input,
                  std::span<const TokenId> target, Real weight) {
  const ForwardResult fr = forward(tape, model, input, target);
  const auto tokens = static_cast<Real>(target.size() + 1);
  return tape.scale(fr.nll, weight / tokens);
}

}  // namespace

TrainingBatch make_batch(std::span<const Example> examples, bool with_draft) {
  if (examples.empty()) throw Error(ErrorClass::kEmptyInput, "make_batch: no examples");
  std::vector<IdSeq> src, drf, tgt;
  for (const auto& ex : examples) {
    src.push_back(ex.source);
    if (with_draft) drf.push_back(ex.draft);
    tgt.push_back(with_end(ex.target));
  }
  TrainingBatch b;
  b.source = pad_rows(src);
  if (with_draft) b.draft = pad_rows(drf);
  b.target = pad_rows(tgt);
  b.mask.resize(b.target.ids.size());
  for (std::size_t i = 0; i < b.mask.size(); ++i) b.mask[i] = b.target.ids[i] != kPadId;
  return b;
}

template <typename Real>
Var batch_loss(Tape<Real>& tape, const TranslationModel<Real>& model, const TrainingBatch& batch) {
  batch.validate();
  if (model.kind() == ModelKind::kDouble && !batch.draft) {
    throw Error(ErrorClass::kShape, "double-attention batch without drafts");
  }
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < batch.size(); ++r) {
    if (batch.real_tokens(r) > 0) rows.push_back(r);
  }
  if (rows.empty()) throw Error(ErrorClass::kEmptyInput, "batch_loss: every position is masked");

  std::vector<Var> terms;
  const Real weight = Real(1) / static_cast<Real>(rows.size());
  for (std::size_t r : rows) {
    IdSeq target;
    for (std::size_t c = 0; c < batch.target.cols; ++c) {
      if (batch.mask[r * batch.target.cols + c]) target.push_back(batch.target.at(r, c));
    }
    // The last real position holds the end token, which forward() appends.
    if (target.back() != kEosId) {
      throw Error(ErrorClass::kShape, "batch target row " + std::to_string(r) +
                                          " does not end with the end-of-sequence id");
    }
    target.pop_back();
    const IdSeq source = batch.source.unpadded_row(r);
    const IdSeq draft = batch.draft ? batch.draft->unpadded_row(r) : IdSeq{};
    terms.push_back(sentence_loss(tape, model, ModelInput{source, draft}, target, weight));
  }
  return tape.add_n(terms);
}

template <typename Real>
AdamReport adam_step(std::span<Parameter<Real>* const> params,
                     std::span<const Tensor<Real>> grads, AdamState& state) {
  if (params.size() != grads.size()) {
    throw Error(ErrorClass::kShape, "adam_step: " + std::to_string(params.size()) +
                                        " parameters but " + std::to_string(grads.size()) +
                                        " gradients");
  }
  if (state.first_moment.empty()) {
    state.first_moment.resize(params.size());
    state.second_moment.resize(params.size());
    for (std::size_t k = 0; k < params.size(); ++k) {
      state.first_moment[k].assign(params[k]->value.size(), 0.0);
      state.second_moment[k].assign(params[k]->value.size(), 0.0);
    }
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k]->frozen) continue;
    if (grads[k].shape() != params[k]->value.shape() ||
        state.first_moment[k].size() != params[k]->value.size()) {
      throw Error(ErrorClass::kShape, "adam_step: gradient for " + params[k]->name + " has shape " +
                                          shape_to_string(grads[k].shape()));
    }
    if (!grads[k].all_finite()) {
      return AdamReport{false, "non-finite gradient in " + params[k]->name};
    }
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k]->frozen) continue;
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    auto values = params[k]->value.data();
    const auto g = grads[k].data();
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double gi = g[i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * gi;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * gi * gi;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      values[i] -= static_cast<Real>(state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon));
    }
  }
  return AdamReport{};
}

template <typename Real>
double mean_loss(const TranslationModel<Real>& model, std::span<const Example> data) {
  if (data.empty()) throw Error(ErrorClass::kEmptyInput, "mean_loss: empty data set");
  double total = 0.0;
  for (const auto& ex : data) {
    Tape<Real> tape(TapeMode::kInference);
    const ForwardResult fr = forward(tape, model, ex.input(), ex.target);
    total += static_cast<double>(tape.value(fr.nll).item()) /
             static_cast<double>(ex.target.size() + 1);
  }
  return total / static_cast<double>(data.size());
}

template <typename Real>
TrainingLog train(TranslationModel<Real>& model, std::span<const Example> train_data,
                  std::span<const Example> validation_data, const TrainConfig& config,
                  std::ostream* log) {
  if (train_data.empty()) throw Error(ErrorClass::kEmptyInput, "train: empty training corpus");
  if (config.batch_size == 0) throw Error(ErrorClass::kConfig, "train: batch_size must be >= 1");

  const auto params = model.parameters();
  AdamState adam;
  adam.learning_rate = config.learning_rate;
  std::vector<Tensor<Real>> grads;
  grads.reserve(params.size());
  for (const auto* p : params) grads.emplace_back(p->value.shape());

  TrainingLog result;
  std::vector<Tensor<Real>> best_values;
  const std::size_t batch_size = std::min(config.batch_size, train_data.size());
  const std::size_t steps_per_epoch = (train_data.size() + batch_size - 1) / batch_size;
  const std::size_t validate_every =
      config.validate_every == 0 ? steps_per_epoch : config.validate_every;

  auto validate = [&](std::size_t step) {
    if (validation_data.empty()) return;
    const double loss = mean_loss(model, validation_data);
    const std::size_t epoch = step / steps_per_epoch;
    result.validations.push_back({epoch, step, loss});
    if (log) {
      *log << "kind=valid epoch=" << epoch << " step=" << step << " val_loss=" << std::setprecision(8)
           << loss << '\n';
    }
    if (!result.best_step || loss < result.best_validation) {
      result.best_step = step;
      result.best_validation = loss;
      if (config.keep_best) {
        best_values.clear();
        for (const auto* p : params) best_values.push_back(p->value);
      }
    }
  };

  validate(0);

  std::vector<std::size_t> order(train_data.size());
  std::size_t cursor = order.size();
  std::uint64_t epoch = 0;
  for (std::size_t step = 1; step <= config.steps; ++step) {
    if (cursor >= order.size()) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      Rng rng(derive_seed(config.seed, epoch++));
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    const std::size_t count = std::min(batch_size, order.size() - cursor);
    for (auto& g : grads) g.fill(Real(0));

    double batch_loss_value = 0.0;
    const Real weight = Real(1) / static_cast<Real>(count);
    for (std::size_t b = 0; b < count; ++b) {
      const Example& ex = train_data[order[cursor + b]];
      Tape<Real> tape;
      const Var loss = sentence_loss(tape, model, ex.input(), ex.target, weight);
      batch_loss_value += static_cast<double>(tape.value(loss).item());
      tape.backward(loss);
      for (std::size_t k = 0; k < params.size(); ++k) {
        if (params[k]->frozen) continue;
        if (const auto* g = tape.parameter_gradient(*params[k])) {
          auto dst = grads[k].data();
          const auto src = g->data();
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
        }
      }
    }
    cursor += count;

    if (!std::isfinite(batch_loss_value)) {
      throw Error(ErrorClass::kDivergence,
                  "training loss became non-finite at step " + std::to_string(step));
    }
    result.steps.push_back({step, batch_loss_value});
    if (log) {
      *log << "kind=train step=" << step << " loss=" << std::setprecision(8) << batch_loss_value
           << '\n';
    }

    if (config.clip_norm > 0.0) {
      double norm2 = 0.0;
      for (std::size_t k = 0; k < params.size(); ++k) {
        if (params[k]->frozen) continue;
        for (Real g : grads[k].values()) norm2 += static_cast<double>(g) * g;
      }
      const double norm = std::sqrt(norm2);
      if (norm > config.clip_norm) {
        const auto factor = static_cast<Real>(config.clip_norm / norm);
        for (auto& g : grads) {
          for (auto& e : g.data()) e *= factor;
        }
      }
    }

    const AdamReport report = adam_step<Real>(params, grads, adam);
    if (!report.applied) {
      ++result.skipped_updates;
      if (log) *log << "kind=skip step=" << step << " reason=\"" << report.reason << "\"\n";
    }
    if (step % validate_every == 0 || step == config.steps) {
      if (result.validations.empty() || result.validations.back().step != step) validate(step);
    }
  }

  if (config.keep_best && !best_values.empty()) {
    for (std::size_t k = 0; k < params.size(); ++k) params[k]->value = best_values[k];
  }
  return result;
}

#define DRAFTNMT_INSTANTIATE(Real)                                                             \
  template Var batch_loss(Tape<Real>&, const TranslationModel<Real>&, const TrainingBatch&);   \
  template AdamReport adam_step(std::span<Parameter<Real>* const>, std::span<const Tensor<Real>>, \
                                AdamState&);                                                   \
  template double mean_loss(const TranslationModel<Real>&, std::span<const Example>);          \
  template TrainingLog train(TranslationModel<Real>&, std::span<const Example>,                \
                             std::span<const Example>, const TrainConfig&, std::ostream*);

DRAFTNMT_INSTANTIATE(float)
DRAFTNMT_INSTANTIATE(double)
#undef DRAFTNMT_INSTANTIATE

}  // namespace draftnmt
