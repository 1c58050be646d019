// Copyright 2026 The infolab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef INFOLAB_ERROR_HPP
#define INFOLAB_ERROR_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace infolab {

/// Coarse classification of failures. The command-line runner maps these
/// onto process exit codes.
enum class ErrorKind : std::uint8_t {
  kDimensionMismatch,
  kInvalidArgument,
  kNumericalFailure,
  kDegenerateSpectrum,
  kUnsupported,
  kDivergence,
  kBoundInapplicable,
  kInfeasible,
  kConfig,
  kIo,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what)
      : Error(ErrorKind::kDimensionMismatch, what) {}
};

class InvalidArgumentError : public Error {
 public:
  explicit InvalidArgumentError(const std::string& what)
      : Error(ErrorKind::kInvalidArgument, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::kNumericalFailure, what) {}
};

class DegenerateSpectrumError : public Error {
 public:
  explicit DegenerateSpectrumError(const std::string& what)
      : Error(ErrorKind::kDegenerateSpectrum, what) {}
};

class UnsupportedError : public Error {
 public:
  explicit UnsupportedError(const std::string& what)
      : Error(ErrorKind::kUnsupported, what) {}
};

/// Raised when an iteration produces non-finite values; `step()` is the
/// index of the first offending step.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::int64_t step)
      : Error(ErrorKind::kDivergence, what), step_(step) {}
  std::int64_t step() const noexcept { return step_; }

 private:
  std::int64_t step_;
};

class BoundInapplicableError : public Error {
 public:
  explicit BoundInapplicableError(const std::string& what)
      : Error(ErrorKind::kBoundInapplicable, what) {}
};

class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what)
      : Error(ErrorKind::kInfeasible, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::kConfig, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

}  // namespace infolab

#endif  // INFOLAB_ERROR_HPP
