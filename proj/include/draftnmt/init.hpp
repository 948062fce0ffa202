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
#include <random>
#include <string>

#include "draftnmt/autodiff.hpp"

namespace draftnmt {

using Rng = std::mt19937_64;

inline constexpr double kInitScale = 0.08;

/// Parameter with entries drawn uniformly from [-scale, scale].
template <typename Real>
Parameter<Real> uniform_parameter(std::string name, Shape shape, Rng& rng,
                                  double scale = kInitScale) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Tensor<Real> value(std::move(shape));
  for (auto& v : value.data()) v = static_cast<Real>(dist(rng));
  return Parameter<Real>{std::move(name), std::move(value), false};
}

template <typename Real>
Parameter<Real> zero_parameter(std::string name, Shape shape) {
  return Parameter<Real>{std::move(name), Tensor<Real>(std::move(shape)), false};
}

/// SplitMix64 finalizer; derives independent stream seeds from one run seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace draftnmt
