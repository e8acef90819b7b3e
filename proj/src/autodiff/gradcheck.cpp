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

#include "drlm/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace drlm::autodiff {
namespace {

double evaluate(const LossBuilder& build) {
  Tape tape;
  return tape.scalar(build(tape));
}

}  // namespace

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport finite_difference_check(const LossBuilder& build, std::span<Parameter* const> params,
                                        double step, Stencil stencil) {
  if (step <= 0.0) throw std::invalid_argument("finite-difference step must be positive");

  const double first = evaluate(build);
  const double second = evaluate(build);
  if (first != second) {
    throw std::invalid_argument("loss function is not deterministic (two evaluations differ: " +
                                std::to_string(first) + " vs " + std::to_string(second) + ")");
  }

  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    tape.backward(build(tape));
  }

  GradCheckReport report;
  for (Parameter* p : params) {
    ParameterCheck check;
    check.name = p->name;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      auto at = [&](double offset) {
        p->value[i] = saved + offset;
        const double v = evaluate(build);
        p->value[i] = saved;
        return v;
      };
      double numeric = 0.0;
      if (stencil == Stencil::kThreePoint) {
        numeric = (at(step) - at(-step)) / (2.0 * step);
      } else {
        numeric = (8.0 * (at(step) - at(-step)) - (at(2.0 * step) - at(-2.0 * step))) / (12.0 * step);
      }
      const double err = relative_error(p->grad[i], numeric);
      if (i == 0 || err > check.max_rel_error) {
        check.max_rel_error = err;
        check.worst_index = i;
        check.analytic = p->grad[i];
        check.numeric = numeric;
      }
    }
    if (report.worst_parameter.empty() || check.max_rel_error > report.max_rel_error) {
      report.max_rel_error = check.max_rel_error;
      report.worst_parameter = check.name;
    }
    report.per_parameter.push_back(std::move(check));
  }
  return report;
}

}  // namespace drlm::autodiff
