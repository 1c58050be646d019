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

#include "infolab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace infolab {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) noexcept {
  return mix64(root ^ mix64(index + 0x9e3779b97f4a7c15ULL));
}

double standard_normal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

double uniform01(Rng& rng) {
  // 53 random bits -> [0, 1).
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Vector standard_normal_vector(Rng& rng, std::size_t n) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector z(n);
  for (double& v : z) v = dist(rng);
  return z;
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = Rng::max() - Rng::max() % bound;
  std::uint64_t r = rng();
  while (r >= limit) r = rng();
  return static_cast<std::size_t>(r % bound);
}

void shuffle_indices(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = uniform_index(rng, i);
    std::swap(v[i - 1], v[j]);
  }
}

GaussianSampler::GaussianSampler(const SymMatrix& cov) : factor_(cov.dim(), cov.dim()) {
  const EigenDecomp e = eigh(cov);
  zero_ = true;
  for (std::size_t k = 0; k < e.dim(); ++k) {
    const double s = std::sqrt(std::max(e.eigenvalues[k], 0.0));
    if (s > 0.0) zero_ = false;
    for (std::size_t i = 0; i < e.dim(); ++i) factor_(i, k) = e.eigenvectors(i, k) * s;
  }
}

Vector GaussianSampler::operator()(Rng& rng) const {
  const Vector z = standard_normal_vector(rng, dim());
  if (zero_) return Vector(dim(), 0.0);
  return matvec(factor_, z);
}

}  // namespace infolab
