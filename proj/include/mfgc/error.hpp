// Copyright 2026 The mfgc Authors
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

#ifndef MFGC_ERROR_HPP_
#define MFGC_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace mfgc {

// Root of the library's exception hierarchy. Every error names the operation
// that raised it so CLI messages can point at the failing module.
class Error : public std::runtime_error {
 public:
  Error(std::string op, const std::string& what)
      : std::runtime_error(op + ": " + what), op_(std::move(op)) {}
  const std::string& op() const { return op_; }

 private:
  std::string op_;
};

// Invalid model data or parameters (e.g. smoothing too large for the gap).
class ModelError : public Error {
  using Error::Error;
};

// No feasible control exists for the pointwise subproblem.
class InfeasiblePoint : public Error {
  using Error::Error;
};

// Active-set cycling guard or Newton iteration budget exhausted.
class MaxIterations : public Error {
  using Error::Error;
};

// An iterative solver stopped above its tolerance. `residual` is the last
// value observed.
class NoConvergence : public Error {
 public:
  NoConvergence(std::string op, const std::string& what, double residual)
      : Error(std::move(op), what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class NonFinite : public Error {
  using Error::Error;
};

class WrongKind : public Error {
  using Error::Error;
};

class IncompatibleGrids : public Error {
  using Error::Error;
};

class SizeMismatch : public Error {
  using Error::Error;
};

}  // namespace mfgc

#endif  // MFGC_ERROR_HPP_
