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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "draftnmt/autodiff.hpp"

namespace draftnmt {

struct GradientCheckOptions {
  double step = 1e-5;
  // Coordinates sampled per parameter block; blocks smaller than this are
  // checked exhaustively.
  std::size_t samples_per_block = 8;
  // Relative errors use max(|analytic|, |numeric|, floor) as denominator so
  // that coordinates with vanishing gradient do not divide by ~0.
  double relative_floor = 1e-6;
  std::uint64_t seed = 0;
};

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates_checked = 0;
  std::size_t blocks_checked = 0;
  std::string worst_coordinate;
  bool all_finite = true;
};

/// Compares analytic gradients against central differences
/// (f(θ+ε·e_i) − f(θ−ε·e_i)) / 2ε on sampled coordinates. `loss` must be a
/// deterministic function of the current parameter values; it is evaluated
/// with each sampled coordinate perturbed in place and then restored.
/// `analytic[k]` is the gradient of params[k].
GradientCheckResult finite_difference_check(const std::function<double()>& loss,
                                            std::span<Parameter<double>* const> params,
                                            std::span<const Tensor<double>> analytic,
                                            const GradientCheckOptions& options = {});

}  // namespace draftnmt
