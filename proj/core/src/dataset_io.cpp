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

#include "infolab/dataset_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "infolab/error.hpp"

namespace infolab {

namespace {

enum class TargetLayout { kNone, kScalar, kVector };

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw IoError("dataset csv: bad number '" + s + "' on line " + std::to_string(line));
  }
  return v;
}

bool is_integer(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  return true;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
  data.validate();
  const std::size_t d = data.input_dim();
  TargetLayout layout = TargetLayout::kNone;
  std::size_t p = 0;
  if (data.targets.front().is_class()) {
    layout = TargetLayout::kScalar;
  } else if (!data.targets.front().value.empty()) {
    p = data.targets.front().value.size();
    layout = TargetLayout::kVector;
  }

  for (std::size_t j = 0; j < d; ++j) os << (j ? "," : "") << "x_" << j;
  if (layout == TargetLayout::kScalar) os << ",y";
  if (layout == TargetLayout::kVector)
    for (std::size_t k = 0; k < p; ++k) os << ",y_" << k;
  os << '\n';

  for (std::size_t n = 0; n < data.size(); ++n) {
    for (std::size_t j = 0; j < d; ++j) os << (j ? "," : "") << format_double(data.inputs[n][j]);
    const Target& t = data.targets[n];
    if (layout == TargetLayout::kScalar) {
      if (!t.is_class()) throw IoError("dataset csv: mixed class and regression targets");
      os << ',' << t.label;
    } else {
      if (t.value.size() != p) throw IoError("dataset csv: inconsistent target dimensions");
      for (double v : t.value) os << ',' << format_double(v);
    }
    os << '\n';
  }
}

Dataset read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("dataset csv: missing header");
  const std::vector<std::string> header = split(line);
  std::size_t d = 0;
  while (d < header.size() && header[d] == "x_" + std::to_string(d)) ++d;
  if (d == 0) throw IoError("dataset csv: header must start with x_0");
  const std::size_t tail = header.size() - d;
  TargetLayout layout = TargetLayout::kNone;
  if (tail == 1 && header[d] == "y") {
    layout = TargetLayout::kScalar;
  } else if (tail > 0) {
    for (std::size_t k = 0; k < tail; ++k)
      if (header[d + k] != "y_" + std::to_string(k))
        throw IoError("dataset csv: unexpected header column '" + header[d + k] + "'");
    layout = TargetLayout::kVector;
  }

  Dataset data;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != header.size()) {
      throw IoError("dataset csv: line " + std::to_string(lineno) + " has " +
                    std::to_string(cells.size()) + " fields, expected " +
                    std::to_string(header.size()));
    }
    Vector x(d);
    for (std::size_t j = 0; j < d; ++j) x[j] = parse_double(cells[j], lineno);
    data.inputs.push_back(std::move(x));
    Target t;
    if (layout == TargetLayout::kScalar) {
      if (!is_integer(cells[d])) {
        throw IoError("dataset csv: class label '" + cells[d] + "' on line " +
                      std::to_string(lineno) + " is not an integer");
      }
      t = Target::cls(std::stoi(cells[d]));
    } else if (layout == TargetLayout::kVector) {
      for (std::size_t k = 0; k < tail; ++k) t.value.push_back(parse_double(cells[d + k], lineno));
    }
    data.targets.push_back(std::move(t));
  }
  data.validate();
  return data;
}

void save_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_dataset_csv(os, data);
}

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  return read_dataset_csv(is);
}

}  // namespace infolab
