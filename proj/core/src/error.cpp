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

#include "infolab/error.hpp"

namespace infolab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimensionMismatch:
      return "dimension-mismatch";
    case ErrorKind::kInvalidArgument:
      return "invalid-argument";
    case ErrorKind::kNumericalFailure:
      return "numerical-failure";
    case ErrorKind::kDegenerateSpectrum:
      return "degenerate-spectrum";
    case ErrorKind::kUnsupported:
      return "unsupported";
    case ErrorKind::kDivergence:
      return "divergence";
    case ErrorKind::kBoundInapplicable:
      return "bound-inapplicable";
    case ErrorKind::kInfeasible:
      return "infeasible";
    case ErrorKind::kConfig:
      return "config";
    case ErrorKind::kIo:
      return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(what), kind_(kind) {}

}  // namespace infolab
