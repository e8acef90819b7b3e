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

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "drlm/autodiff/tape.hpp"

namespace drlm::autodiff {

struct ParameterCheck {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  std::vector<ParameterCheck> per_parameter;
};

// Builds a scalar loss on a fresh tape from the current parameter values.
using LossBuilder = std::function<Var(Tape&)>;

// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

// Central difference stencils: (f(x+h) - f(x-h)) / 2h, or the fourth-order
// (8(f(x+h) - f(x-h)) - (f(x+2h) - f(x-2h))) / 12h.
enum class Stencil { kThreePoint, kFivePoint };

// Compares reverse-mode gradients against central differences with the given
// step. The loss must be deterministic; two unequal evaluations at the same
// point raise std::invalid_argument. Parameter values are restored on return.
GradCheckReport finite_difference_check(const LossBuilder& build, std::span<Parameter* const> params,
                                        double step, Stencil stencil = Stencil::kThreePoint);

}  // namespace drlm::autodiff
