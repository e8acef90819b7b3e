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

#include <stdexcept>
#include <string>

namespace drlm {

// Internal invariant violation (a bug, not bad input). The CLI maps this to
// exit code 2; every other std::exception is treated as a user/config error.
class InvariantError : public std::logic_error {
 public:
  explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

// Operands of an autodiff primitive do not conform.
class ShapeError : public InvariantError {
 public:
  explicit ShapeError(const std::string& what) : InvariantError(what) {}
};

}  // namespace drlm
