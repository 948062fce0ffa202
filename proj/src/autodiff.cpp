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

#include "draftnmt/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace draftnmt {

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

namespace {

template <typename Real>
Real dot(const Real* a, const Real* b, std::size_t n) {
  Real s = Real(0);
#pragma omp simd reduction(+ : s)
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

// y += alpha * x
template <typename Real>
void axpy(Real alpha, const Real* x, Real* y, std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename Real>
void accumulate(Tensor<Real>& into, const Tensor<Real>& from) {
  Real* dst = into.data().data();
  const Real* src = from.data().data();
  const std::size_t n = from.size();
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) dst[i] += src[i];
}

template <typename Real>
Real stable_sigmoid(Real x) {
  if (x >= Real(0)) return Real(1) / (Real(1) + std::exp(-x));
  const Real e = std::exp(x);
  return e / (Real(1) + e);
}

[[noreturn]] void shape_mismatch(const char* op, const Shape& a, const Shape& b) {
  throw Error(ErrorClass::kShape, std::string(op) + ": incompatible shapes " +
                                      shape_to_string(a) + " and " + shape_to_string(b));
}

}  // namespace

template <typename Real>
Var Tape<Real>::push(TapeNode<Real> n) {
  if (mode_ == TapeMode::kInference) n.inputs.clear();
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

template <typename Real>
const TapeNode<Real>& Tape<Real>::node(Var v) const {
  if (v.index >= nodes_.size()) throw Error(ErrorClass::kRange, "variable is not on this tape");
  return nodes_[v.index];
}

template <typename Real>
const Tensor<Real>& Tape<Real>::value(Var v) const {
  const auto& n = node(v);
  return n.parameter ? n.parameter->value : n.value;
}

template <typename Real>
Tensor<Real>& Tape<Real>::grad_of(std::size_t index) {
  auto& n = nodes_[index];
  if (n.grad.empty()) {
    const auto& shape = n.parameter ? n.parameter->value.shape() : n.value.shape();
    n.grad = Tensor<Real>(shape);
  }
  return n.grad;
}

template <typename Real>
Var Tape<Real>::constant(Tensor<Real> value) {
  TapeNode<Real> n;
  n.op = Op::kConstant;
  n.value = std::move(value);
  return push(std::move(n));
}

template <typename Real>
Var Tape<Real>::parameter(const Parameter<Real>& p) {
  if (auto it = parameter_nodes_.find(&p); it != parameter_nodes_.end()) return Var{it->second};
  TapeNode<Real> n;
  n.op = Op::kParameter;
  n.parameter = &p;
  nodes_.push_back(std::move(n));
  parameter_nodes_.emplace(&p, nodes_.size() - 1);
  return Var{nodes_.size() - 1};
}

template <typename Real>
Var Tape<Real>::matmul(Var a, Var b) {
  const auto& x = value(a);
  const auto& y = value(b);
  TapeNode<Real> n;
  n.op = Op::kMatmul;
  n.inputs = {a.index, b.index};
  if (x.rank() == 2 && y.rank() == 2) {
    if (x.cols() != y.rows()) shape_mismatch("matmul", x.shape(), y.shape());
    const std::size_t m = x.rows(), k = x.cols(), c = y.cols();
    n.value = Tensor<Real>(Shape{m, c});
    for (std::size_t i = 0; i < m; ++i) {
      Real* out = n.value.data().data() + i * c;
      for (std::size_t p = 0; p < k; ++p) axpy(x.at(i, p), y.data().data() + p * c, out, c);
    }
  } else if (x.rank() == 1 && y.rank() == 2) {
    if (x.size() != y.rows()) shape_mismatch("matmul", x.shape(), y.shape());
    const std::size_t k = x.size(), c = y.cols();
    n.value = Tensor<Real>(Shape{c});
    Real* out = n.value.data().data();
    for (std::size_t p = 0; p < k; ++p) axpy(x[p], y.data().data() + p * c, out, c);
  } else if (x.rank() == 2 && y.rank() == 1) {
    if (x.cols() != y.size()) shape_mismatch("matmul", x.shape(), y.shape());
    const std::size_t m = x.rows(), k = x.cols();
    n.value = Tensor<Real>(Shape{m});
    for (std::size_t i = 0; i < m; ++i) {
      n.value[i] = dot(x.data().data() + i * k, y.data().data(), k);
    }
  } else {
    shape_mismatch("matmul", x.shape(), y.shape());
  }
  return push(std::move(n));
}

template <typename Real>
Var Tape<Real>::add(Var a, Var b) {
  const auto& x = value(a);
  const auto& y = value(b);
  if (x.shape() != y.shape()) shape_mismatch("add", x.shape(), y.shape());
  TapeNode<Real> n;
  n.op = Op::kAdd;
  n.inputs = {a.index, b.index};
  n.value = x;
  accumulate(n.value, y);
  return push(std::move(n));
}

template <typename Real>
Var Tape<Real>::sub(Var a, Var b) {
  const auto& x = value(a);
  const auto& y = value(b);
  if (x.shape() != y.shape()) shape_mismatch("sub", x.shape(), y.shape());
  TapeNode<Real> n;
  n.op = Op::kSub;
  n.inputs = {a.index, b.index};
  n.value = x;
  for (std::size_t i = 0; i < x.size(); ++i) n.value[i] -= y[i];
  return push(std::move(n));
}

template <typename Real>
Var Tape<Real>::mul(Var a, Var b) {
  const auto& x = value(a);
  const auto& y = value(b);
  if (x.shape() != y.shape()) shape_mismatch("mul", x.shape(), y.shape());
  TapeNode<Real> n;
  n.op = Op::kMul;
  n.inputs = {a.index, b.index};
  n.value = x;
  for (std::size_t i = 0; i < x.size(); ++i) n.value[i] *= y[i];
  return push(std::move(n));
}

template <typename Real>
Var Tape<Real>::add_row_broadcast(Var m, Var v) {
  const auto& x = value(m);
  const auto& y = value(v);
  if (x.rank() != 2 || y.rank() != 1 || x.cols() != y.size()) {
    shape_mismatch("add_row_broadcast", x.shape(), y.shape());
  }
  TapeNode<Real> n;
  n.op = Op::kAddRowBroadcast;
  n.inputs = {m.index, v.index};
  n.value = x;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    axpy(Real(1), y.data().data(), n.value.data().data() + i * x.cols(), x.cols());
  }
  return push(std::move(n));
}

template <typename Real>
Var Tape<Real>::sigmoid(Var a) {
  TapeNode<Real> n;
  n.op = Op::kSigmoid;
  n.inputs = {a.index};
  n.value = value(a);
  for (auto& e : n.value.data()) e = stable_sigmoid(e);
  return push(std::move(n));
}

template <typename Real>
Var Tape<Real>::tanh(Var a) {
  TapeNode<Real> n;
  n.op = Op::kTanh;
  n.inputs = {a.index};
  n.value = value(a);
  for (auto& e : n.value.data()) e = std::tanh(e);
  return push(std::move(n));
}

template <typename Real>
Var Tape<Real>::concat(Var a, Var b) {
  const auto& x = value(a);
  const auto& y = value(b);
  if (x.rank() != 1 || y.rank() != 1) shape_mismatch("concat", x.shape(), y.shape());
  std::vector<Real> out;
  out.reserve(x.size() + y.size());
  out.insert(out.end(), x.values().begin(), x.values().end());
  out.insert(out.end(), y.values().begin(), y.values().end());
  TapeNode<Real> n;
  n.op = Op::kConcat;
  n.inputs = {a.index, b.index};
  n.value = Tensor<Real>::vector(std::move(out));
  return push(std::move(n));
}

template <typename Real>
Var Tape<Real>::stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw Error(ErrorClass::kEmptyInput, "stack_rows: no rows");
  const std::size_t width = value(rows.front()).size();
  TapeNode<Real> n;
  n.op = Op::kStackRows;
  n.value = Tensor<Real>(Shape{rows.size(), width});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = value(rows[i]);
    if (r.rank() != 1 || r.size() != width) {
      shape_mismatch("stack_rows", value(rows.front()).shape(), r.shape());
    }
    std::copy(r.values().begin(), r.values().end(), n.value.row(i).begin());
    n.inputs.push_back(rows[i].index);
  }
  return push(std::move(n));
}

template <typename Real>
Var Tape<Real>::slice(Var v, std::size_t offset, std::size_t length) {
  const auto& x = value(v);
  if (x.rank() != 1 || offset + length > x.size()) {
    throw Error(ErrorClass::kRange, "slice [" + std::to_string(offset) + ", " +
                                        std::to_string(offset + length) + ") of " +
                                        shape_to_string(x.shape()));
  }
  TapeNode<Real> n;
  n.op = Op::kSlice;
  n.inputs = {v.index};
  n.aux = offset;
  n.value = Tensor<Real>::vector(
      std::vector<Real>(x.values().begin() + offset, x.values().begin() + offset + length));
  return push(std::move(n));
}

template <typename Real>
Var Tape<Real>::gather_row(Var table, std::size_t row) {
  const auto& t = value(table);
  if (t.rank() != 2) throw Error(ErrorClass::kShape, "gather_row on " + shape_to_string(t.shape()));
  if (row >= t.rows()) {
    throw Error(ErrorClass::kRange, "gather_row: id " + std::to_string(row) +
                                        " outside table of " + std::to_string(t.rows()) + " rows");
  }
  TapeNode<Real> n;
  n.op = Op::kGatherRow;
  n.inputs = {table.index};
  n.aux = row;
  auto r = t.row(row);
  n.value = Tensor<Real>::vector(std::vector<Real>(r.begin(), r.end()));
  return push(std::move(n));
}

template <typename Real>
Var Tape<Real>::softmax(Var v) {
  const auto& x = value(v);
  if (x.rank() != 1 || x.empty()) {
    throw Error(ErrorClass::kEmptyInput, "softmax needs a non-empty vector, got " +
                                             shape_to_string(x.shape()));
  }
  TapeNode<Real> n;
  n.op = Op::kSoftmax;
  n.inputs = {v.index};
  n.value = x;
  const Real mx = *std::max_element(x.values().begin(), x.values().end());
  Real total = Real(0);
  for (auto& e : n.value.data()) {
    e = std::exp(e - mx);
    total += e;
  }
  for (auto& e : n.value.data()) e /= total;
  return push(std::move(n));
}

template <typename Real>
Var Tape<Real>::log_softmax(Var v) {
  const auto& x = value(v);
  if (x.rank() != 1 || x.empty()) {
    throw Error(ErrorClass::kEmptyInput, "log_softmax needs a non-empty vector, got " +
                                             shape_to_string(x.shape()));
  }
  TapeNode<Real> n;
  n.op = Op::kLogSoftmax;
  n.inputs = {v.index};
  n.value = x;
  const Real mx = *std::max_element(x.values().begin(), x.values().end());
  Real total = Real(0);
  for (Real e : x.values()) total += std::exp(e - mx);
  const Real log_z = mx + std::log(total);
  for (auto& e : n.value.data()) e -= log_z;
  return push(std::move(n));
}

template <typename Real>
Var Tape<Real>::pick(Var v, std::size_t index) {
  const auto& x = value(v);
  if (index >= x.size()) {
    throw Error(ErrorClass::kRange, "pick: index " + std::to_string(index) + " outside " +
                                        shape_to_string(x.shape()));
  }
  TapeNode<Real> n;
  n.op = Op::kPick;
  n.inputs = {v.index};
  n.aux = index;
  n.value = Tensor<Real>::scalar(x[index]);
  return push(std::move(n));
}

template <typename Real>
Var Tape<Real>::sum(Var v) {
  const auto& x = value(v);
  Real s = Real(0);
  for (Real e : x.values()) s += e;
  TapeNode<Real> n;
  n.op = Op::kSum;
  n.inputs = {v.index};
  n.value = Tensor<Real>::scalar(s);
  return push(std::move(n));
}

template <typename Real>
Var Tape<Real>::add_n(std::span<const Var> terms) {
  if (terms.empty()) throw Error(ErrorClass::kEmptyInput, "add_n: no terms");
  TapeNode<Real> n;
  n.op = Op::kAddN;
  n.value = value(terms.front());
  n.inputs.push_back(terms.front().index);
  for (std::size_t i = 1; i < terms.size(); ++i) {
    const auto& t = value(terms[i]);
    if (t.shape() != n.value.shape()) shape_mismatch("add_n", n.value.shape(), t.shape());
    accumulate(n.value, t);
    n.inputs.push_back(terms[i].index);
  }
  return push(std::move(n));
}

template <typename Real>
Var Tape<Real>::scale(Var v, Real factor) {
  TapeNode<Real> n;
  n.op = Op::kScale;
  n.inputs = {v.index};
  n.factor = factor;
  n.value = value(v);
  for (auto& e : n.value.data()) e *= factor;
  return push(std::move(n));
}

template <typename Real>
void Tape<Real>::backward(Var loss) {
  if (mode_ == TapeMode::kInference) {
    throw Error(ErrorClass::kUsage, "backward on an inference-mode tape");
  }
  if (backward_done_) throw Error(ErrorClass::kUsage, "backward already ran on this tape");
  if (value(loss).size() != 1) {
    throw Error(ErrorClass::kShape,
                "backward needs a scalar root, got " + shape_to_string(value(loss).shape()));
  }
  backward_done_ = true;
  grad_of(loss.index).fill(Real(1));

  for (std::size_t idx = loss.index + 1; idx-- > 0;) {
    // Nodes the loss never reached keep an empty gradient and are skipped.
    if (nodes_[idx].grad.empty()) continue;
    const Op op = nodes_[idx].op;
    const auto& in = nodes_[idx].inputs;
    // grad_of() never resizes nodes_, so these stay valid through the case.
    const Tensor<Real>& g = nodes_[idx].grad;
    const Tensor<Real>& y = nodes_[idx].value;

    switch (op) {
      case Op::kConstant:
      case Op::kParameter:
        break;
      case Op::kMatmul: {
        const auto& a = value(Var{in[0]});
        const auto& b = value(Var{in[1]});
        auto& ga = grad_of(in[0]);
        auto& gb = grad_of(in[1]);
        if (a.rank() == 2 && b.rank() == 2) {
          const std::size_t m = a.rows(), k = a.cols(), c = b.cols();
          for (std::size_t i = 0; i < m; ++i) {
            const Real* gi = g.data().data() + i * c;
            for (std::size_t p = 0; p < k; ++p) {
              ga.at(i, p) += dot(gi, b.data().data() + p * c, c);
              axpy(a.at(i, p), gi, gb.data().data() + p * c, c);
            }
          }
        } else if (a.rank() == 1) {
          const std::size_t k = a.size(), c = b.cols();
          const Real* gi = g.data().data();
          for (std::size_t p = 0; p < k; ++p) {
            ga[p] += dot(gi, b.data().data() + p * c, c);
            axpy(a[p], gi, gb.data().data() + p * c, c);
          }
        } else {
          const std::size_t m = a.rows(), k = a.cols();
          for (std::size_t i = 0; i < m; ++i) {
            axpy(g[i], b.data().data(), ga.data().data() + i * k, k);
            axpy(g[i], a.data().data() + i * k, gb.data().data(), k);
          }
        }
        break;
      }
      case Op::kAdd:
        accumulate(grad_of(in[0]), g);
        accumulate(grad_of(in[1]), g);
        break;
      case Op::kSub: {
        accumulate(grad_of(in[0]), g);
        auto& gb = grad_of(in[1]);
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
        break;
      }
      case Op::kMul: {
        const auto& a = value(Var{in[0]});
        const auto& b = value(Var{in[1]});
        auto& ga = grad_of(in[0]);
        auto& gb = grad_of(in[1]);
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i] * b[i];
          gb[i] += g[i] * a[i];
        }
        break;
      }
      case Op::kAddRowBroadcast: {
        accumulate(grad_of(in[0]), g);
        auto& gv = grad_of(in[1]);
        for (std::size_t i = 0; i < g.rows(); ++i) {
          axpy(Real(1), g.data().data() + i * g.cols(), gv.data().data(), g.cols());
        }
        break;
      }
      case Op::kSigmoid: {
        auto& gx = grad_of(in[0]);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i] * (Real(1) - y[i]);
        break;
      }
      case Op::kTanh: {
        auto& gx = grad_of(in[0]);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (Real(1) - y[i] * y[i]);
        break;
      }
      case Op::kConcat: {
        auto& ga = grad_of(in[0]);
        auto& gb = grad_of(in[1]);
        const std::size_t m = ga.size();
        for (std::size_t i = 0; i < m; ++i) ga[i] += g[i];
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[m + i];
        break;
      }
      case Op::kStackRows: {
        for (std::size_t r = 0; r < in.size(); ++r) {
          auto& gr = grad_of(in[r]);
          axpy(Real(1), g.data().data() + r * g.cols(), gr.data().data(), g.cols());
        }
        break;
      }
      case Op::kSlice: {
        auto& gx = grad_of(in[0]);
        const std::size_t off = nodes_[idx].aux;
        for (std::size_t i = 0; i < g.size(); ++i) gx[off + i] += g[i];
        break;
      }
      case Op::kGatherRow: {
        auto& gt = grad_of(in[0]);
        axpy(Real(1), g.data().data(), gt.data().data() + nodes_[idx].aux * gt.cols(), g.size());
        break;
      }
      case Op::kSoftmax: {
        auto& gx = grad_of(in[0]);
        const Real gy = dot(g.data().data(), y.data().data(), g.size());
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += y[i] * (g[i] - gy);
        break;
      }
      case Op::kLogSoftmax: {
        auto& gx = grad_of(in[0]);
        Real total = Real(0);
        for (Real e : g.values()) total += e;
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] - std::exp(y[i]) * total;
        break;
      }
      case Op::kPick:
        grad_of(in[0])[nodes_[idx].aux] += g[0];
        break;
      case Op::kSum: {
        auto& gx = grad_of(in[0]);
        for (auto& e : gx.data()) e += g[0];
        break;
      }
      case Op::kAddN:
        for (std::size_t t : in) accumulate(grad_of(t), g);
        break;
      case Op::kScale: {
        auto& gx = grad_of(in[0]);
        axpy(nodes_[idx].factor, g.data().data(), gx.data().data(), g.size());
        break;
      }
    }
  }
}

template <typename Real>
const Tensor<Real>* Tape<Real>::gradient(Var v) const {
  const auto& n = node(v);
  return n.grad.empty() ? nullptr : &n.grad;
}

template <typename Real>
const Tensor<Real>* Tape<Real>::parameter_gradient(const Parameter<Real>& p) const {
  auto it = parameter_nodes_.find(&p);
  if (it == parameter_nodes_.end()) return nullptr;
  const auto& g = nodes_[it->second].grad;
  return g.empty() ? nullptr : &g;
}

template struct Parameter<float>;
template struct Parameter<double>;
template class Tape<float>;
template class Tape<double>;

}  // namespace draftnmt
