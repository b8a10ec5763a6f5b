// Copyright 2026 The scaleshape Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace scaleshape {

/// Input outside the mathematical domain of an operation (negative Lambert W
/// argument, non-finite iterate, all-excluded log-sum-exp, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller broke an interface contract (mismatched lengths, reordered strip
/// bounds, problems that should share an operator but do not).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A problem instance or configuration failed validation. `field()` names the
/// offending member.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A computed certificate violated one of its own structural guarantees.
class InternalConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace scaleshape
