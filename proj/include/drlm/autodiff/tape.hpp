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

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "drlm/autodiff/tensor.hpp"

namespace drlm::autodiff {

enum class Op : std::uint8_t {
  kLeaf,
  kMatMul,
  kAdd,
  kSub,
  kMul,
  kScale,
  kTanh,
  kSigmoid,
  kConcat,
  kSlice,
  kColumn,
  kDropout,
  kSoftmax,
  kLogSoftmax,
  kPick,
  kPickLogProb,
  kLogSumExp,
  kSum,
};

std::string_view op_name(Op op);
std::optional<Op> op_from_name(std::string_view name);

// Handle to a node on a Tape. Only meaningful for the tape that created it.
struct Var {
  static constexpr std::uint32_t kInvalid = std::numeric_limits<std::uint32_t>::max();
  std::uint32_t index = kInvalid;
  bool valid() const { return index != kInvalid; }
};

// Define-by-run reverse-mode tape. Nodes are appended in evaluation order, so
// the node list is already topologically sorted. A tape is single-threaded and
// supports exactly one backward sweep.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  Var constant(Tensor value);
  // Borrows `value`; the caller keeps it alive for the tape's lifetime.
  Var constant_ref(const Tensor& value);
  // Borrows the parameter value; backward() adds into `p.grad`.
  Var parameter(Parameter& p);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double factor);
  Var tanh(Var a);
  Var sigmoid(Var a);
  // Stacks column vectors (or matrices with equal column counts) vertically.
  Var concat(std::span<const Var> parts);
  Var slice(Var a, std::size_t offset, std::size_t length);
  Var column(Var a, std::size_t j);
  // Multiplies by a fixed mask (inverted dropout: entries are 0 or 1/keep).
  Var dropout(Var a, Tensor mask);
  Var softmax(Var a);
  Var log_softmax(Var a);
  Var pick(Var a, std::size_t i);
  // log softmax(logits)[i], fused.
  Var pick_log_prob(Var logits, std::size_t i);
  Var logsumexp(Var a);
  Var sum(Var a);

  const Tensor& value(Var v) const;
  double scalar(Var v) const;
  // Gradient of the last backward() target w.r.t. `v`; zeros if none flowed.
  Tensor grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_.at(v.index).requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Throws std::logic_error when called a second time on the same tape.
  void backward(Var loss);

 private:
  struct Node {
    Op op = Op::kLeaf;
    bool requires_grad = false;
    std::uint32_t a = Var::kInvalid;
    std::uint32_t b = Var::kInvalid;
    std::size_t aux = 0;
    std::size_t aux2 = 0;
    double factor = 0.0;
    Tensor value;
    const Tensor* external = nullptr;
    Parameter* param = nullptr;
    Tensor cache;
    Tensor grad;

    const Tensor& val() const { return external != nullptr ? *external : value; }
  };

  const Node& node(Var v, Op op) const;
  Var push(Node n);
  Tensor& grad_slot(std::uint32_t index);
  void backprop(std::uint32_t index);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> concat_parents_;
  bool backward_done_ = false;
};

namespace testing {
// Scales the backward rule of `op` by 1.5 in every tape until reset with
// std::nullopt. Exists only so gradient-check harnesses can prove they fail.
void corrupt_backward(std::optional<Op> op);
}  // namespace testing

}  // namespace drlm::autodiff
