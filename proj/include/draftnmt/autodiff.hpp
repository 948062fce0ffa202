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
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "draftnmt/tensor.hpp"

namespace draftnmt {

/// A named trainable block. Models own their parameters; tapes only read them.
template <typename Real>
struct Parameter {
  std::string name;
  Tensor<Real> value;
  bool frozen = false;
};

/// Handle to a node on a Tape. Only meaningful for the tape that created it.
struct Var {
  static constexpr std::size_t kInvalid = std::numeric_limits<std::size_t>::max();
  std::size_t index = kInvalid;

  bool valid() const noexcept { return index != kInvalid; }
  friend bool operator==(Var, Var) = default;
};

enum class Op : std::uint8_t {
  kConstant,
  kParameter,
  kMatmul,
  kAdd,
  kSub,
  kMul,
  kAddRowBroadcast,
  kSigmoid,
  kTanh,
  kConcat,
  kStackRows,
  kSlice,
  kGatherRow,
  kSoftmax,
  kLogSoftmax,
  kPick,
  kSum,
  kAddN,
  kScale,
};

template <typename Real>
struct TapeNode {
  Op op = Op::kConstant;
  std::vector<std::size_t> inputs;
  // Row for gather_row, offset for slice, element for pick.
  std::size_t aux = 0;
  Real factor = Real(0);
  // Empty for parameter leaves, whose value lives in the Parameter.
  Tensor<Real> value;
  // Allocated on first accumulation; empty means "no gradient reached here".
  Tensor<Real> grad;
  const Parameter<Real>* parameter = nullptr;
};

enum class TapeMode {
  kRecord,     // keeps what backward() needs
  kInference,  // forward values only; backward() is rejected
};

/// Dynamic reverse-mode tape. A fresh tape is built for every example; node
/// indices are a topological order, so backward is a single reverse sweep.
template <typename Real>
class Tape {
 public:
  explicit Tape(TapeMode mode = TapeMode::kRecord) : mode_(mode) { nodes_.reserve(256); }

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) noexcept = default;
  Tape& operator=(Tape&&) noexcept = default;

  TapeMode mode() const noexcept { return mode_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  Var constant(Tensor<Real> value);
  /// Leaf bound to a parameter. Repeated calls with the same parameter return
  /// the same node, so its gradient accumulates in one place.
  Var parameter(const Parameter<Real>& p);

  /// Supported ranks: [m×k]·[k×n] → [m×n], [k]·[k×n] → [n], [m×k]·[k] → [m].
  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  /// Adds vector v to every row of matrix m.
  Var add_row_broadcast(Var m, Var v);
  Var sigmoid(Var x);
  Var tanh(Var x);
  Var concat(Var a, Var b);
  Var stack_rows(std::span<const Var> rows);
  Var slice(Var v, std::size_t offset, std::size_t length);
  Var gather_row(Var table, std::size_t row);
  Var softmax(Var v);
  Var log_softmax(Var v);
  Var pick(Var v, std::size_t index);
  Var sum(Var v);
  Var add_n(std::span<const Var> terms);
  Var scale(Var v, Real factor);

  const Tensor<Real>& value(Var v) const;

  /// Reverse sweep from a scalar root. May be called once per tape.
  void backward(Var loss);

  /// Gradient reaching `v`, or nullptr if none did.
  const Tensor<Real>* gradient(Var v) const;
  /// Gradient of a parameter; nullptr when the parameter never reached the
  /// loss on this tape (its gradient is then exactly zero).
  const Tensor<Real>* parameter_gradient(const Parameter<Real>& p) const;

 private:
  Var push(TapeNode<Real> node);
  const TapeNode<Real>& node(Var v) const;
  Tensor<Real>& grad_of(std::size_t index);

  TapeMode mode_;
  bool backward_done_ = false;
  std::vector<TapeNode<Real>> nodes_;
  std::unordered_map<const Parameter<Real>*, std::size_t> parameter_nodes_;
};

extern template struct Parameter<float>;
extern template struct Parameter<double>;
extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace draftnmt
