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

#ifndef INFOLAB_INFOMAT_HPP
#define INFOLAB_INFOMAT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "infolab/matrix.hpp"
#include "infolab/models.hpp"

namespace infolab {

// All four matrices are per-sample averages (1/N) over the dataset, never
// sums. C is the uncentered second moment of the per-sample gradients and S
// its centered counterpart; neither is a Fisher matrix.

enum class FisherMode {
  kAuto,        ///< exact enumeration for softmax models, closed form otherwise
  kExact,       ///< sum over every label, weighted by q_theta(y | x)
  kClosedForm,  ///< GaussianMean: I; OLS: I_p (x) E[x x^T]
  kMonteCarlo,  ///< `draws` labels per input sampled from q_theta(. | x)
};

const char* to_string(FisherMode mode);

struct FisherOptions {
  FisherMode mode = FisherMode::kAuto;
  std::size_t draws = 0;
  std::uint64_t seed = 0;
};

struct InfoMatrixSet {
  SymMatrix H;
  SymMatrix F;
  SymMatrix C;
  SymMatrix S;
  std::size_t N = 0;
  std::size_t fisher_mc_draws = 0;  // 0 = no sampling
  Vector mean_grad;

  std::size_t dim() const noexcept { return H.dim(); }
};

/// (1/N) sum_n Hessian of loss(x_n, y_n).
SymMatrix compute_H(const LossOracle& oracle, const Dataset& data);
/// (1/N) sum_n g_n g_n^T.
SymMatrix compute_C(const LossOracle& oracle, const Dataset& data);
/// C - gbar gbar^T.
SymMatrix compute_S(const LossOracle& oracle, const Dataset& data);
/// Expected gradient outer product under the model's label distribution.
SymMatrix compute_F(const LossOracle& oracle, const Dataset& data, const FisherOptions& options = {});

InfoMatrixSet compute_all(const LossOracle& oracle, const Dataset& data,
                          const FisherOptions& options = {});

struct OlsClosedForms {
  SymMatrix H;
  SymMatrix F;
  SymMatrix C;
};

/// Population matrices of the linear model y = W x + eps, eps ~ N(0, noise_cov),
/// at W = W*, over the empirical input distribution of `inputs`:
///   H = F = I_p (x) E[x x^T],  C = noise_cov (x) E[x x^T],
/// in the OLS parameter layout (row-major W, p x d).
OlsClosedForms ols_closed_forms(const std::vector<Vector>& inputs, const SymMatrix& noise_cov);

/// Scale similarity Tr(a) / Tr(b).
double similarity_r(const SymMatrix& a, const SymMatrix& b);
/// Angle similarity <a, b>_F / (||a||_F ||b||_F).
double similarity_s(const SymMatrix& a, const SymMatrix& b);

/// JSON document {"format", "dim", "N", "fisher_mc_draws", "H", "F", "C",
/// "S"}; each matrix is an array of rows.
std::string info_to_json(const InfoMatrixSet& info);
InfoMatrixSet info_from_json(const std::string& text);

}  // namespace infolab

#endif  // INFOLAB_INFOMAT_HPP
