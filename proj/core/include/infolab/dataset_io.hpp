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

#ifndef INFOLAB_DATASET_IO_HPP
#define INFOLAB_DATASET_IO_HPP

#include <iosfwd>
#include <string>

#include "infolab/models.hpp"

namespace infolab {

/// Dataset CSV layout (see docs/formats.md):
///
///   header:  x_0,...,x_{d-1}[,targets]
///   targets: `y` (integer class label), `y_0,...,y_{p-1}` (regression
///            targets, p >= 1), or absent when no sample carries a target.
///   rows:    one sample per line, values printed with %.17g, '\n' endings,
///            no trailing delimiter and no quoting.
void write_dataset_csv(std::ostream& os, const Dataset& data);
Dataset read_dataset_csv(std::istream& is);

void save_dataset_csv(const std::string& path, const Dataset& data);
Dataset load_dataset_csv(const std::string& path);

/// %.17g rendering used by every CSV and TSV writer in the project.
std::string format_double(double v);

}  // namespace infolab

#endif  // INFOLAB_DATASET_IO_HPP
