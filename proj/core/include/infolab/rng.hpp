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

#ifndef INFOLAB_RNG_HPP
#define INFOLAB_RNG_HPP

#include <cstdint>
#include <random>

#include "infolab/matrix.hpp"

namespace infolab {

/// The engine behind every seeded stream in the library.
using Rng = std::mt19937_64;

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed of child stream `index` under `root`:
///   derive_seed(root, index) = mix64(root ^ mix64(index + 0x9e3779b97f4a7c15)).
/// Independent configurations and Monte Carlo paths each get their own child
/// stream, so results do not depend on evaluation order.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) noexcept;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

double standard_normal(Rng& rng);
double uniform01(Rng& rng);
Vector standard_normal_vector(Rng& rng, std::size_t n);
/// Uniform index in [0, n) by rejection sampling.
std::size_t uniform_index(Rng& rng, std::size_t n);
/// In-place Fisher-Yates shuffle driven by `uniform_index`.
void shuffle_indices(std::vector<std::size_t>& v, Rng& rng);

/// Draws from N(0, cov) as L z, where L = V diag(sqrt(max(lambda, 0))).
class GaussianSampler {
 public:
  explicit GaussianSampler(const SymMatrix& cov);
  Vector operator()(Rng& rng) const;
  std::size_t dim() const noexcept { return factor_.rows(); }

 private:
  Matrix factor_;
  bool zero_ = false;
};

}  // namespace infolab

#endif  // INFOLAB_RNG_HPP
