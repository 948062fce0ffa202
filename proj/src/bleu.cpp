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

#include "draftnmt/bleu.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>

#include "draftnmt/errors.hpp"

namespace draftnmt {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

TokenSeq lowercase(const TokenSeq& tokens) {
  TokenSeq out = tokens;
  for (auto& t : out) {
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  }
  return out;
}

NgramCounts count_ngrams(const TokenSeq& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace

BleuReport bleu(std::span<const TokenSeq> hypotheses, std::span<const TokenSeq> references,
                std::size_t max_order) {
  if (hypotheses.size() != references.size()) {
    throw Error(ErrorClass::kShape, "bleu: " + std::to_string(hypotheses.size()) +
                                        " hypotheses vs " + std::to_string(references.size()) +
                                        " references");
  }
  if (hypotheses.empty()) throw Error(ErrorClass::kEmptyInput, "bleu: empty corpus");
  if (max_order < 1) throw Error(ErrorClass::kConfig, "bleu: max_order must be >= 1");

  BleuReport r;
  r.matches.assign(max_order, 0);
  r.totals.assign(max_order, 0);
  r.precisions.assign(max_order, 0.0);
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const TokenSeq hyp = lowercase(hypotheses[s]);
    const TokenSeq ref = lowercase(references[s]);
    r.hypothesis_length += hyp.size();
    r.reference_length += ref.size();
    for (std::size_t n = 1; n <= max_order; ++n) {
      const NgramCounts h = count_ngrams(hyp, n);
      const NgramCounts g = count_ngrams(ref, n);
      for (const auto& [gram, count] : h) {
        const auto it = g.find(gram);
        if (it != g.end()) r.matches[n - 1] += std::min(count, it->second);
        r.totals[n - 1] += count;
      }
    }
  }

  if (r.hypothesis_length == 0) return r;
  r.brevity_penalty =
      std::exp(std::min(0.0, 1.0 - static_cast<double>(r.reference_length) /
                                       static_cast<double>(r.hypothesis_length)));
  double log_sum = 0.0;
  bool any_zero = false;
  for (std::size_t n = 0; n < max_order; ++n) {
    if (r.totals[n] > 0) {
      r.precisions[n] = static_cast<double>(r.matches[n]) / static_cast<double>(r.totals[n]);
    }
    if (r.matches[n] == 0) {
      any_zero = true;
    } else {
      log_sum += std::log(r.precisions[n]);
    }
  }
  r.score = any_zero ? 0.0 : r.brevity_penalty * std::exp(log_sum / static_cast<double>(max_order));
  return r;
}

std::string format_bleu_report(const BleuReport& report) {
  char buf[128];
  std::string out;
  std::snprintf(buf, sizeof buf, "bleu=%.6f\n", report.score);
  out += buf;
  for (std::size_t n = 0; n < report.precisions.size(); ++n) {
    std::snprintf(buf, sizeof buf, "p%zu=%.6f (%zu/%zu)\n", n + 1, report.precisions[n],
                  report.matches[n], report.totals[n]);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "brevity_penalty=%.6f\nhyp_len=%zu\nref_len=%zu\n",
                report.brevity_penalty, report.hypothesis_length, report.reference_length);
  out += buf;
  return out;
}

}  // namespace draftnmt
