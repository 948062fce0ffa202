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

// Loop-only reference computations used as oracles by the unit and acceptance
// tests. Nothing here touches the tape.

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <cstddef>
#include <span>
#include <vector>

#include "draftnmt/models.hpp"

namespace draftnmt::testing {

using Vec = std::vector<double>;

template <typename Real>
Vec as_vec(const Tensor<Real>& t) {
  return Vec(t.values().begin(), t.values().end());
}

/// x[k] · W[k×n] with W given row-major as a Parameter.
template <typename Real>
Vec vec_mat(const Vec& x, const Parameter<Real>& w) {
  const std::size_t k = w.value.rows(), n = w.value.cols();
  Vec out(n, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j] += x.at(i) * static_cast<double>(w.value.at(i, j));
  }
  return out;
}

inline Vec add(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b.at(i);
  return a;
}

template <typename Real>
Vec add_param(Vec a, const Parameter<Real>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += static_cast<double>(b.value[i]);
  return a;
}

inline Vec concat(Vec a, const Vec& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vec softmax(const Vec& v) {
  double m = v.at(0);
  for (double x : v) m = std::max(m, x);
  Vec out(v.size());
  double z = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) z += out[i] = std::exp(v[i] - m);
  for (double& x : out) x /= z;
  return out;
}

template <typename Real>
Vec row_of(const Parameter<Real>& table, std::size_t r) {
  Vec out(table.value.cols());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = static_cast<double>(table.value.at(r, j));
  return out;
}

template <typename Real>
Vec gru(const Vec& x, const Vec& h, const GruParams<Real>& p) {
  const std::size_t n = h.size();
  const Vec zin = add_param(add(vec_mat(x, p.update_input), vec_mat(h, p.update_state)), p.update_bias);
  const Vec rin = add_param(add(vec_mat(x, p.reset_input), vec_mat(h, p.reset_state)), p.reset_bias);
  Vec rh(n);
  for (std::size_t i = 0; i < n; ++i) rh[i] = sigmoid(rin[i]) * h[i];
  const Vec cin =
      add_param(add(vec_mat(x, p.candidate_input), vec_mat(rh, p.candidate_state)), p.candidate_bias);
  Vec out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = sigmoid(zin[i]);
    out[i] = (1.0 - z) * h[i] + z * std::tanh(cin[i]);
  }
  return out;
}

/// Bidirectional encoding of the embedded sequence; returns per position
/// [forward; backward] and, separately, the backward states.
struct RefAnnotations {
  std::vector<Vec> annotations;
  std::vector<Vec> backward;
};

template <typename Real>
RefAnnotations encode(const std::vector<Vec>& xs, const GruParams<Real>& fwd,
                      const GruParams<Real>& bwd) {
  const std::size_t T = xs.size(), n = fwd.state_width;
  std::vector<Vec> f(T), b(T);
  Vec h(n, 0.0);
  for (std::size_t i = 0; i < T; ++i) f[i] = h = gru(xs[i], h, fwd);
  h.assign(n, 0.0);
  for (std::size_t i = T; i-- > 0;) b[i] = h = gru(xs[i], h, bwd);
  RefAnnotations out;
  for (std::size_t i = 0; i < T; ++i) out.annotations.push_back(concat(f[i], b[i]));
  out.backward = b;
  return out;
}

/// Additive attention: returns (weights, context).
template <typename Real>
std::pair<Vec, Vec> attend(const Vec& s, const std::vector<Vec>& ann,
                           const AttentionParams<Real>& p) {
  const Vec q = vec_mat(s, p.state_proj);
  Vec e(ann.size());
  for (std::size_t i = 0; i < ann.size(); ++i) {
    const Vec k = vec_mat(ann[i], p.annotation_proj);
    double acc = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      acc += static_cast<double>(p.score.value[j]) * std::tanh(q[j] + k[j]);
    }
    e[i] = acc;
  }
  const Vec w = softmax(e);
  Vec c(ann[0].size(), 0.0);
  for (std::size_t i = 0; i < ann.size(); ++i) {
    for (std::size_t j = 0; j < c.size(); ++j) c[j] += w[i] * ann[i][j];
  }
  return {w, c};
}

template <typename Real>
Vec readout_log_probs(const Vec& y, const Vec& s, const Vec& c, const DecoderParams<Real>& p) {
  Vec t = add_param(
      add(add(vec_mat(s, p.readout_state), vec_mat(y, p.readout_embed)), vec_mat(c, p.readout_context)),
      p.readout_bias);
  for (double& v : t) v = std::tanh(v);
  const Vec logits = add_param(vec_mat(t, p.output_proj), p.output_bias);
  const Vec probs = softmax(logits);
  Vec out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = std::log(probs[i]);
  return out;
}

template <typename Real>
std::vector<Vec> embed_seq(const Parameter<Real>& table, std::span<const TokenId> ids) {
  std::vector<Vec> out;
  for (TokenId id : ids) out.push_back(row_of(table, id));
  out.push_back(row_of(table, kEosId));
  return out;
}

/// Per-step log-probability vectors of a teacher-forced pass (target.size()+1
/// steps, the last predicting end-of-sequence).
template <typename Real>
std::vector<Vec> reference_log_probs(const SingleAttentionModel<Real>& m,
                                     std::span<const TokenId> source,
                                     std::span<const TokenId> target) {
  const auto enc = encode(embed_seq(m.source_embedding, source), m.encoder_forward,
                          m.encoder_backward);
  Vec s = vec_mat(enc.backward.front(), m.init_proj);
  for (double& v : s) v = std::tanh(v);
  std::vector<Vec> out;
  TokenId prev = kBosId;
  for (std::size_t t = 0; t <= target.size(); ++t) {
    const Vec y = row_of(m.target_embedding, prev);
    const Vec c = attend(s, enc.annotations, m.attention).second;
    s = gru(concat(y, c), s, m.decoder.gru);
    out.push_back(readout_log_probs(y, s, c, m.decoder));
    if (t < target.size()) prev = target[t];
  }
  return out;
}

template <typename Real>
std::vector<Vec> reference_log_probs(const DoubleAttentionModel<Real>& m,
                                     std::span<const TokenId> source,
                                     std::span<const TokenId> draft,
                                     std::span<const TokenId> target) {
  const auto src = encode(embed_seq(m.source_embedding, source), m.source_forward,
                          m.source_backward);
  const auto drf = encode(embed_seq(m.draft_embedding, draft), m.draft_forward, m.draft_backward);
  Vec s(src.backward.front().size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = 0.5 * (src.backward.front()[i] + drf.backward.front()[i]);
  }
  std::vector<Vec> out;
  TokenId prev = kBosId;
  for (std::size_t t = 0; t <= target.size(); ++t) {
    const Vec y = row_of(m.target_embedding, prev);
    const Vec c = concat(attend(s, src.annotations, m.source_attention).second,
                         attend(s, drf.annotations, m.draft_attention).second);
    s = gru(concat(y, c), s, m.decoder.gru);
    out.push_back(readout_log_probs(y, s, c, m.decoder));
    if (t < target.size()) prev = target[t];
  }
  return out;
}

template <typename LogProbs>
double reference_nll(const LogProbs& steps, std::span<const TokenId> target) {
  double nll = 0.0;
  for (std::size_t t = 0; t < steps.size(); ++t) {
    nll -= steps[t].at(t < target.size() ? target[t] : kEosId);
  }
  return nll;
}

/// Random ids in [kFirstWordId, vocab).
IdSeq random_ids(std::mt19937_64& rng, std::size_t length, std::size_t vocab);

}  // namespace draftnmt::testing
