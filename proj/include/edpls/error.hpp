//
// Copyright 2026 The edPLS Authors
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
//

#pragma once

#include <stdexcept>
#include <string>

namespace edpls {

// Error classes. Each maps onto a distinct process exit code in the CLI.
enum class ErrorKind {
  kArgument,
  kConfig,
  kIo,
  kShape,
  kDegenerate,
  kNumerical,
  kSingular,
  kState,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& message)
      : Error(ErrorKind::kArgument, message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error(ErrorKind::kConfig, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message)
      : Error(ErrorKind::kIo, message) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& message)
      : Error(ErrorKind::kShape, message) {}
};

class DegenerateInputError : public Error {
 public:
  explicit DegenerateInputError(const std::string& message)
      : Error(ErrorKind::kDegenerate, message) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& message)
      : Error(ErrorKind::kNumerical, message) {}
};

class StateError : public Error {
 public:
  explicit StateError(const std::string& message)
      : Error(ErrorKind::kState, message) {}
};

// A linear system that could not be solved reliably. Carries the estimated
// condition number and, when raised from model fitting, the number of
// components that had been extracted.
class SingularSystemError : public Error {
 public:
  SingularSystemError(const std::string& message, double condition_estimate,
                      int components = -1)
      : Error(ErrorKind::kSingular, message),
        condition_estimate_(condition_estimate),
        components_(components) {}

  double condition_estimate() const noexcept { return condition_estimate_; }
  int components() const noexcept { return components_; }

 private:
  double condition_estimate_;
  int components_;
};

// Process exit codes used by the command-line front end.
inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kArgument:
    case ErrorKind::kConfig:
      return 2;
    case ErrorKind::kIo:
      return 3;
    case ErrorKind::kShape:
      return 4;
    case ErrorKind::kNumerical:
    case ErrorKind::kSingular:
      return 5;
    case ErrorKind::kDegenerate:
      return 6;
    case ErrorKind::kState:
      return 7;
  }
  return 1;
}

}  // namespace edpls
