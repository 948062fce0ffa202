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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "draftnmt/errors.hpp"

namespace draftnmt {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

/// Dense row-major array. Rank 0 holds a single scalar, rank 1 is a vector,
/// rank 2 a matrix. The element type is float for training and decoding and
/// double for gradient verification.
template <typename Real>
class Tensor {
 public:
  using value_type = Real;

  Tensor() = default;

  explicit Tensor(Shape shape, Real fill = Real(0))
      : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

  Tensor(Shape shape, std::vector<Real> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_size(shape_)) {
      throw Error(ErrorClass::kShape, "tensor data has " + std::to_string(data_.size()) +
                                          " elements but shape " + shape_to_string(shape_) +
                                          " needs " + std::to_string(shape_size(shape_)));
    }
  }

  static Tensor scalar(Real v) { return Tensor(Shape{}, std::vector<Real>{v}); }

  static Tensor vector(std::initializer_list<Real> values) {
    return Tensor(Shape{values.size()}, std::vector<Real>(values));
  }

  static Tensor vector(std::vector<Real> values) {
    const std::size_t n = values.size();
    return Tensor(Shape{n}, std::move(values));
  }

  static Tensor matrix(std::initializer_list<std::initializer_list<Real>> rows) {
    const std::size_t m = rows.size();
    const std::size_t n = m == 0 ? 0 : rows.begin()->size();
    std::vector<Real> data;
    data.reserve(m * n);
    for (const auto& row : rows) {
      if (row.size() != n) throw Error(ErrorClass::kShape, "ragged matrix literal");
      data.insert(data.end(), row.begin(), row.end());
    }
    return Tensor(Shape{m, n}, std::move(data));
  }

  static Tensor identity(std::size_t n) {
    Tensor t(Shape{n, n});
    for (std::size_t i = 0; i < n; ++i) t.at(i, i) = Real(1);
    return t;
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t rows() const { return shape_.at(0); }
  std::size_t cols() const { return shape_.at(1); }

  Real& operator[](std::size_t i) { return data_[i]; }
  const Real& operator[](std::size_t i) const { return data_[i]; }

  Real& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  const Real& at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

  Real item() const {
    if (data_.size() != 1) {
      throw Error(ErrorClass::kShape, "item() on tensor of shape " + shape_to_string(shape_));
    }
    return data_[0];
  }

  std::span<Real> data() noexcept { return data_; }
  std::span<const Real> data() const noexcept { return data_; }
  const std::vector<Real>& values() const noexcept { return data_; }

  std::span<Real> row(std::size_t i) { return {data_.data() + i * shape_[1], shape_[1]}; }
  std::span<const Real> row(std::size_t i) const {
    return {data_.data() + i * shape_[1], shape_[1]};
  }

  void fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const {
    for (Real v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<Real> data_;
};

/// Converts between precisions, element by element.
template <typename To, typename From>
Tensor<To> tensor_cast(const Tensor<From>& t) {
  std::vector<To> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = static_cast<To>(t[i]);
  return Tensor<To>(t.shape(), std::move(out));
}

}  // namespace draftnmt
