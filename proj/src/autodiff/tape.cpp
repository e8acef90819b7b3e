// Copyright 2026 The DRLM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "drlm/autodiff/tape.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

#include "drlm/errors.hpp"
#include "drlm/simd/kernels.hpp"

namespace drlm::autodiff {
namespace {

constexpr std::array<std::string_view, 18> kOpNames = {
    "leaf",    "matmul", "add",        "sub",  "mul",          "scale",
    "tanh",    "sigmoid", "concat",    "slice", "column",      "dropout",
    "softmax", "log-softmax", "pick",  "pick-log-prob", "logsumexp", "sum"};

std::atomic<int> g_corrupted{-1};

double backward_factor(Op op) {
  return g_corrupted.load(std::memory_order_relaxed) == static_cast<int>(op) ? 1.5 : 1.0;
}

[[noreturn]] void shape_fail(Op op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op_name(op)) + ": shape mismatch " + a.shape_string() + " vs " +
                   b.shape_string());
}

[[noreturn]] void shape_fail(Op op, const Tensor& a, const std::string& what) {
  throw ShapeError(std::string(op_name(op)) + ": " + what + " for operand " + a.shape_string());
}

double max_entry(const Tensor& x) { return *std::max_element(x.data(), x.data() + x.size()); }

// Returns logsumexp and fills `probs` with softmax(x).
double stable_softmax(const Tensor& x, Tensor& probs) {
  const double m = max_entry(x);
  probs = Tensor(x.rows(), x.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probs[i] = std::exp(x[i] - m);
    total += probs[i];
  }
  for (std::size_t i = 0; i < x.size(); ++i) probs[i] /= total;
  return m + std::log(total);
}

}  // namespace

std::string_view op_name(Op op) { return kOpNames[static_cast<std::size_t>(op)]; }

std::optional<Op> op_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kOpNames.size(); ++i) {
    if (kOpNames[i] == name) return static_cast<Op>(i);
  }
  return std::nullopt;
}

namespace testing {
void corrupt_backward(std::optional<Op> op) {
  g_corrupted.store(op ? static_cast<int>(*op) : -1, std::memory_order_relaxed);
}
}  // namespace testing

const Tape::Node& Tape::node(Var v, Op op) const {
  if (v.index >= nodes_.size()) {
    throw InvariantError(std::string(op_name(op)) + ": operand is not a node of this tape");
  }
  return nodes_[v.index];
}

Var Tape::push(Node n) {
  if (backward_done_) throw std::logic_error("tape already consumed by backward()");
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::constant_ref(const Tensor& value) {
  Node n;
  n.external = &value;
  return push(std::move(n));
}

Var Tape::parameter(Parameter& p) {
  Node n;
  n.external = &p.value;
  n.param = &p;
  n.requires_grad = true;
  return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
  const Node& na = node(a, Op::kMatMul);
  const Node& nb = node(b, Op::kMatMul);
  const Tensor& A = na.val();
  const Tensor& B = nb.val();
  if (A.cols() != B.rows()) shape_fail(Op::kMatMul, A, B);
  const auto& k = simd::kernels();
  Tensor out(A.rows(), B.cols());
  if (B.cols() == 1) {
    k.gemv(A.data(), A.rows(), A.cols(), B.data(), out.data());
  } else {
    for (std::size_t i = 0; i < A.rows(); ++i) {
      for (std::size_t j = 0; j < A.cols(); ++j) {
        k.axpy(A.at(i, j), B.data() + j * B.cols(), out.data() + i * out.cols(), B.cols());
      }
    }
  }
  Node n;
  n.op = Op::kMatMul;
  n.a = a.index;
  n.b = b.index;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  n.value = std::move(out);
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  const Node& na = node(a, Op::kAdd);
  const Node& nb = node(b, Op::kAdd);
  if (!na.val().same_shape(nb.val())) shape_fail(Op::kAdd, na.val(), nb.val());
  Node n;
  n.op = Op::kAdd;
  n.a = a.index;
  n.b = b.index;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  n.value = na.val();
  simd::kernels().axpy(1.0, nb.val().data(), n.value.data(), n.value.size());
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  const Node& na = node(a, Op::kSub);
  const Node& nb = node(b, Op::kSub);
  if (!na.val().same_shape(nb.val())) shape_fail(Op::kSub, na.val(), nb.val());
  Node n;
  n.op = Op::kSub;
  n.a = a.index;
  n.b = b.index;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  n.value = na.val();
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] -= nb.val()[i];
  return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
  const Node& na = node(a, Op::kMul);
  const Node& nb = node(b, Op::kMul);
  if (!na.val().same_shape(nb.val())) shape_fail(Op::kMul, na.val(), nb.val());
  Node n;
  n.op = Op::kMul;
  n.a = a.index;
  n.b = b.index;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  n.value = Tensor(na.val().rows(), na.val().cols());
  simd::kernels().mul_acc(na.val().data(), nb.val().data(), n.value.data(), n.value.size());
  return push(std::move(n));
}

Var Tape::scale(Var a, double factor) {
  const Node& na = node(a, Op::kScale);
  Node n;
  n.op = Op::kScale;
  n.a = a.index;
  n.factor = factor;
  n.requires_grad = na.requires_grad;
  n.value = na.val();
  for (double& v : n.value.values()) v *= factor;
  return push(std::move(n));
}

Var Tape::tanh(Var a) {
  const Node& na = node(a, Op::kTanh);
  Node n;
  n.op = Op::kTanh;
  n.a = a.index;
  n.requires_grad = na.requires_grad;
  n.value = na.val();
  for (double& v : n.value.values()) v = std::tanh(v);
  return push(std::move(n));
}

Var Tape::sigmoid(Var a) {
  const Node& na = node(a, Op::kSigmoid);
  Node n;
  n.op = Op::kSigmoid;
  n.a = a.index;
  n.requires_grad = na.requires_grad;
  n.value = na.val();
  for (double& v : n.value.values()) {
    v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  }
  return push(std::move(n));
}

Var Tape::concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat: no operands");
  const std::size_t cols = node(parts[0], Op::kConcat).val().cols();
  std::size_t rows = 0;
  bool req = false;
  for (Var p : parts) {
    const Tensor& t = node(p, Op::kConcat).val();
    if (t.cols() != cols) shape_fail(Op::kConcat, node(parts[0], Op::kConcat).val(), t);
    rows += t.rows();
    req = req || nodes_[p.index].requires_grad;
  }
  Tensor out(rows, cols);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Tensor& t = nodes_[p.index].val();
    std::copy(t.data(), t.data() + t.size(), out.data() + offset);
    offset += t.size();
  }
  Node n;
  n.op = Op::kConcat;
  n.requires_grad = req;
  n.aux = concat_parents_.size();
  n.aux2 = parts.size();
  for (Var p : parts) concat_parents_.push_back(p.index);
  n.value = std::move(out);
  return push(std::move(n));
}

Var Tape::slice(Var a, std::size_t offset, std::size_t length) {
  const Node& na = node(a, Op::kSlice);
  const Tensor& A = na.val();
  if (A.cols() != 1 || offset + length > A.rows() || length == 0) {
    shape_fail(Op::kSlice, A,
               "rows [" + std::to_string(offset) + ", " + std::to_string(offset + length) +
                   ") out of range");
  }
  Node n;
  n.op = Op::kSlice;
  n.a = a.index;
  n.aux = offset;
  n.requires_grad = na.requires_grad;
  n.value = Tensor(length, 1,
                   std::vector<double>(A.data() + offset, A.data() + offset + length));
  return push(std::move(n));
}

Var Tape::column(Var a, std::size_t j) {
  const Node& na = node(a, Op::kColumn);
  const Tensor& A = na.val();
  if (j >= A.cols()) {
    throw std::out_of_range("column: index " + std::to_string(j) + " out of range for operand " +
                            A.shape_string());
  }
  Node n;
  n.op = Op::kColumn;
  n.a = a.index;
  n.aux = j;
  n.requires_grad = na.requires_grad;
  n.value = Tensor(A.rows(), 1);
  for (std::size_t r = 0; r < A.rows(); ++r) n.value[r] = A.at(r, j);
  return push(std::move(n));
}

Var Tape::dropout(Var a, Tensor mask) {
  const Node& na = node(a, Op::kDropout);
  if (!na.val().same_shape(mask)) shape_fail(Op::kDropout, na.val(), mask);
  Node n;
  n.op = Op::kDropout;
  n.a = a.index;
  n.requires_grad = na.requires_grad;
  n.value = Tensor(mask.rows(), mask.cols());
  simd::kernels().mul_acc(na.val().data(), mask.data(), n.value.data(), n.value.size());
  n.cache = std::move(mask);
  return push(std::move(n));
}

Var Tape::softmax(Var a) {
  const Node& na = node(a, Op::kSoftmax);
  Node n;
  n.op = Op::kSoftmax;
  n.a = a.index;
  n.requires_grad = na.requires_grad;
  stable_softmax(na.val(), n.value);
  return push(std::move(n));
}

Var Tape::log_softmax(Var a) {
  const Node& na = node(a, Op::kLogSoftmax);
  Node n;
  n.op = Op::kLogSoftmax;
  n.a = a.index;
  n.requires_grad = na.requires_grad;
  const double lse = stable_softmax(na.val(), n.cache);
  n.value = na.val();
  for (double& v : n.value.values()) v -= lse;
  return push(std::move(n));
}

Var Tape::pick(Var a, std::size_t i) {
  const Node& na = node(a, Op::kPick);
  if (i >= na.val().size()) {
    throw std::out_of_range("pick: index " + std::to_string(i) + " out of range for operand " +
                            na.val().shape_string());
  }
  Node n;
  n.op = Op::kPick;
  n.a = a.index;
  n.aux = i;
  n.requires_grad = na.requires_grad;
  n.value = Tensor::scalar(na.val()[i]);
  return push(std::move(n));
}

Var Tape::pick_log_prob(Var logits, std::size_t i) {
  const Node& na = node(logits, Op::kPickLogProb);
  if (i >= na.val().size()) {
    throw std::out_of_range("pick-log-prob: index " + std::to_string(i) +
                            " out of range for operand " + na.val().shape_string());
  }
  Node n;
  n.op = Op::kPickLogProb;
  n.a = logits.index;
  n.aux = i;
  n.requires_grad = na.requires_grad;
  const double lse = stable_softmax(na.val(), n.cache);
  n.value = Tensor::scalar(na.val()[i] - lse);
  return push(std::move(n));
}

Var Tape::logsumexp(Var a) {
  const Node& na = node(a, Op::kLogSumExp);
  Node n;
  n.op = Op::kLogSumExp;
  n.a = a.index;
  n.requires_grad = na.requires_grad;
  n.value = Tensor::scalar(stable_softmax(na.val(), n.cache));
  return push(std::move(n));
}

Var Tape::sum(Var a) {
  const Node& na = node(a, Op::kSum);
  Node n;
  n.op = Op::kSum;
  n.a = a.index;
  n.requires_grad = na.requires_grad;
  double s = 0.0;
  for (double v : na.val().values()) s += v;
  n.value = Tensor::scalar(s);
  return push(std::move(n));
}

const Tensor& Tape::value(Var v) const { return nodes_.at(v.index).val(); }

double Tape::scalar(Var v) const {
  const Tensor& t = value(v);
  if (t.size() != 1) throw ShapeError("scalar: node holds " + t.shape_string());
  return t[0];
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.index);
  if (n.grad.empty()) return Tensor(n.val().rows(), n.val().cols());
  return n.grad;
}

Tensor& Tape::grad_slot(std::uint32_t index) {
  Node& n = nodes_[index];
  if (n.grad.empty()) n.grad = Tensor(n.val().rows(), n.val().cols());
  return n.grad;
}

void Tape::backward(Var loss) {
  if (backward_done_) throw std::logic_error("backward() already ran on this tape");
  const Tensor& lv = value(loss);
  if (lv.size() != 1) throw ShapeError("backward: loss must be scalar, got " + lv.shape_string());
  backward_done_ = true;
  if (!nodes_[loss.index].requires_grad) return;
  grad_slot(loss.index)[0] = 1.0;
  for (std::uint32_t i = loss.index + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    backprop(i);
  }
}

void Tape::backprop(std::uint32_t index) {
  const auto& k = simd::kernels();
  // grad_slot() only touches parent grads; nodes_ itself never reallocates here.
  Node& n = nodes_[index];
  const Tensor& g = n.grad;
  const double f = backward_factor(n.op);
  auto wants = [&](std::uint32_t p) { return p != Var::kInvalid && nodes_[p].requires_grad; };

  switch (n.op) {
    case Op::kLeaf:
      if (n.param != nullptr) {
        if (n.param->grad.empty() || !n.param->grad.same_shape(n.param->value)) {
          n.param->zero_grad();
        }
        k.axpy(1.0, g.data(), n.param->grad.data(), g.size());
      }
      break;
    case Op::kMatMul: {
      const Tensor& A = nodes_[n.a].val();
      const Tensor& B = nodes_[n.b].val();
      if (wants(n.a)) {
        Tensor& ga = grad_slot(n.a);
        if (B.cols() == 1) {
          Tensor scaled = g;
          if (f != 1.0) for (double& v : scaled.values()) v *= f;
          k.ger_acc(ga.data(), A.rows(), A.cols(), scaled.data(), B.data());
        } else {
          for (std::size_t i = 0; i < A.rows(); ++i) {
            for (std::size_t j = 0; j < A.cols(); ++j) {
              ga.at(i, j) += f * k.dot(g.data() + i * g.cols(), B.data() + j * B.cols(), B.cols());
            }
          }
        }
      }
      if (wants(n.b)) {
        Tensor& gb = grad_slot(n.b);
        if (B.cols() == 1) {
          Tensor scaled = g;
          if (f != 1.0) for (double& v : scaled.values()) v *= f;
          k.gemv_t_acc(A.data(), A.rows(), A.cols(), scaled.data(), gb.data());
        } else {
          for (std::size_t i = 0; i < A.rows(); ++i) {
            for (std::size_t j = 0; j < A.cols(); ++j) {
              k.axpy(f * A.at(i, j), g.data() + i * g.cols(), gb.data() + j * gb.cols(),
                     gb.cols());
            }
          }
        }
      }
      break;
    }
    case Op::kAdd:
      if (wants(n.a)) k.axpy(f, g.data(), grad_slot(n.a).data(), g.size());
      if (wants(n.b)) k.axpy(f, g.data(), grad_slot(n.b).data(), g.size());
      break;
    case Op::kSub:
      if (wants(n.a)) k.axpy(f, g.data(), grad_slot(n.a).data(), g.size());
      if (wants(n.b)) k.axpy(-f, g.data(), grad_slot(n.b).data(), g.size());
      break;
    case Op::kMul: {
      Tensor scaled = g;
      if (f != 1.0) for (double& v : scaled.values()) v *= f;
      if (wants(n.a)) {
        k.mul_acc(scaled.data(), nodes_[n.b].val().data(), grad_slot(n.a).data(), g.size());
      }
      if (wants(n.b)) {
        k.mul_acc(scaled.data(), nodes_[n.a].val().data(), grad_slot(n.b).data(), g.size());
      }
      break;
    }
    case Op::kScale:
      if (wants(n.a)) k.axpy(f * n.factor, g.data(), grad_slot(n.a).data(), g.size());
      break;
    case Op::kTanh:
      if (wants(n.a)) {
        Tensor& ga = grad_slot(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double y = n.value[i];
          ga[i] += f * g[i] * (1.0 - y * y);
        }
      }
      break;
    case Op::kSigmoid:
      if (wants(n.a)) {
        Tensor& ga = grad_slot(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double y = n.value[i];
          ga[i] += f * g[i] * y * (1.0 - y);
        }
      }
      break;
    case Op::kConcat: {
      std::size_t offset = 0;
      for (std::size_t p = 0; p < n.aux2; ++p) {
        const std::uint32_t parent = concat_parents_[n.aux + p];
        const std::size_t len = nodes_[parent].val().size();
        if (wants(parent)) k.axpy(f, g.data() + offset, grad_slot(parent).data(), len);
        offset += len;
      }
      break;
    }
    case Op::kSlice:
      if (wants(n.a)) k.axpy(f, g.data(), grad_slot(n.a).data() + n.aux, g.size());
      break;
    case Op::kColumn:
      if (wants(n.a)) {
        Tensor& ga = grad_slot(n.a);
        for (std::size_t r = 0; r < g.size(); ++r) ga.at(r, n.aux) += f * g[r];
      }
      break;
    case Op::kDropout:
      if (wants(n.a)) {
        Tensor scaled = g;
        if (f != 1.0) for (double& v : scaled.values()) v *= f;
        k.mul_acc(scaled.data(), n.cache.data(), grad_slot(n.a).data(), g.size());
      }
      break;
    case Op::kSoftmax:
      if (wants(n.a)) {
        Tensor& ga = grad_slot(n.a);
        const double inner = k.dot(g.data(), n.value.data(), g.size());
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += f * n.value[i] * (g[i] - inner);
      }
      break;
    case Op::kLogSoftmax:
      if (wants(n.a)) {
        Tensor& ga = grad_slot(n.a);
        double total = 0.0;
        for (double v : g.values()) total += v;
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += f * (g[i] - n.cache[i] * total);
      }
      break;
    case Op::kPick:
      if (wants(n.a)) grad_slot(n.a)[n.aux] += f * g[0];
      break;
    case Op::kPickLogProb:
      if (wants(n.a)) {
        Tensor& ga = grad_slot(n.a);
        k.axpy(-f * g[0], n.cache.data(), ga.data(), ga.size());
        ga[n.aux] += f * g[0];
      }
      break;
    case Op::kLogSumExp:
      if (wants(n.a)) k.axpy(f * g[0], n.cache.data(), grad_slot(n.a).data(), n.cache.size());
      break;
    case Op::kSum:
      if (wants(n.a)) {
        Tensor& ga = grad_slot(n.a);
        for (double& v : ga.values()) v += f * g[0];
      }
      break;
  }
  // Intermediate gradients are not needed after propagation.
  if (n.op != Op::kLeaf) n.grad = Tensor();
}

}  // namespace drlm::autodiff
