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

#include "draftnmt/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace draftnmt {

GradientCheckResult finite_difference_check(const std::function<double()>& loss,
                                            std::span<Parameter<double>* const> params,
                                            std::span<const Tensor<double>> analytic,
                                            const GradientCheckOptions& options) {
  if (params.size() != analytic.size()) {
    throw Error(ErrorClass::kShape, "finite_difference_check: " + std::to_string(params.size()) +
                                        " parameters but " + std::to_string(analytic.size()) +
                                        " gradients");
  }
  GradientCheckResult result;
  std::mt19937_64 rng(options.seed);
  const double h = options.step;

  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& value = params[k]->value;
    const auto& grad = analytic[k];
    if (grad.shape() != value.shape()) {
      throw Error(ErrorClass::kShape, "gradient for " + params[k]->name + " has shape " +
                                          shape_to_string(grad.shape()) + ", parameter has " +
                                          shape_to_string(value.shape()));
    }
    std::vector<std::size_t> coords(value.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (coords.size() > options.samples_per_block) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.samples_per_block);
    }
    for (std::size_t i : coords) {
      const double saved = value[i];
      value[i] = saved + h;
      const double plus = loss();
      value[i] = saved - h;
      const double minus = loss();
      value[i] = saved;
      if (!std::isfinite(plus) || !std::isfinite(minus)) {
        result.all_finite = false;
        continue;
      }
      const double numeric = (plus - minus) / (2.0 * h);
      const double a = grad[i];
      const double denom =
          std::max({std::abs(a), std::abs(numeric), options.relative_floor});
      const double rel = std::abs(a - numeric) / denom;
      if (rel > result.max_relative_error || result.worst_coordinate.empty()) {
        result.max_relative_error = rel;
        result.worst_coordinate = params[k]->name + "[" + std::to_string(i) + "]";
      }
      ++result.coordinates_checked;
    }
    ++result.blocks_checked;
  }
  return result;
}

}  // namespace draftnmt
