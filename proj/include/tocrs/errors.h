// Copyright 2026 The tocrs Authors
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

#ifndef TOCRS_ERRORS_H_
#define TOCRS_ERRORS_H_

#include <stdexcept>
#include <string>

namespace tocrs {

// Indices or shapes that do not agree with the instance dimensions.
class DimensionError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// A documented precondition of an operation does not hold (bad parameters,
// infeasible process, inadmissible instance).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The constraint variant has no registered linear description.
class UnsupportedConstraintError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A solved table violates one of its defining rows beyond tolerance.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& row, double residual)
      : std::runtime_error("validation failed on " + row +
                           " (residual " + std::to_string(residual) + ")"),
        row_(row),
        residual_(residual) {}

  const std::string& row() const { return row_; }
  double residual() const { return residual_; }

 private:
  std::string row_;
  double residual_;
};

// Exhaustive enumeration would exceed its configured cap.
class TooLargeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tocrs

#endif  // TOCRS_ERRORS_H_
