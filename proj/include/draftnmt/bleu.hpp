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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "draftnmt/vocabulary.hpp"

namespace draftnmt {

struct BleuReport {
  double score = 0.0;
  std::vector<std::size_t> matches;  // clipped n-gram matches per order
  std::vector<std::size_t> totals;   // hypothesis n-grams per order
  std::vector<double> precisions;
  double brevity_penalty = 0.0;
  std::size_t hypothesis_length = 0;
  std::size_t reference_length = 0;
};

/// Unsmoothed corpus BLEU against a single reference per sentence. Counts are
/// aggregated over the corpus, tokens are compared lowercased and a zero
/// precision at any order makes the score 0.
BleuReport bleu(std::span<const TokenSeq> hypotheses, std::span<const TokenSeq> references,
                std::size_t max_order = 4);

/// Multi-line human-readable rendering of a report.
std::string format_bleu_report(const BleuReport& report);

}  // namespace draftnmt
