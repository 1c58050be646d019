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

#include "infolab/infomat.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "infolab/error.hpp"
#include "infolab/rng.hpp"
#include "json.hpp"
#include "parallel.hpp"

namespace infolab {

namespace {

constexpr std::size_t kBlock = 32;

/// Sums `accumulate(n, acc)` over samples into a dim x dim matrix. Samples are
/// grouped into fixed blocks of kBlock, blocks may run concurrently, and the
/// block partials are combined by an index-ordered pairwise tree, so the
/// result does not depend on the number of threads.
SymMatrix reduce_samples(std::size_t count, std::size_t dim,
                         const std::function<void(std::size_t, SymMatrix&)>& accumulate) {
  const std::size_t blocks = (count + kBlock - 1) / kBlock;
  std::vector<SymMatrix> partial(blocks);
  detail::parallel_for(blocks, [&](std::size_t b) {
    SymMatrix acc(dim);
    const std::size_t end = std::min(count, (b + 1) * kBlock);
    for (std::size_t n = b * kBlock; n < end; ++n) accumulate(n, acc);
    partial[b] = std::move(acc);
  });

  for (std::size_t stride = 1; stride < blocks; stride *= 2)
    for (std::size_t b = 0; b + stride < blocks; b += 2 * stride) partial[b] += partial[b + stride];
  SymMatrix total = std::move(partial.front());
  total *= 1.0 / static_cast<double>(count);
  return total;
}

void check_data(const LossOracle& oracle, const Dataset& data) {
  data.validate(oracle.num_classes());
  if (data.input_dim() != static_cast<std::size_t>(oracle.input_dim())) {
    throw DimensionError("dataset input dimension does not match the model");
  }
}

SymMatrix input_second_moment(const std::vector<Vector>& inputs) {
  if (inputs.empty()) throw InvalidArgumentError("empty input set");
  SymMatrix m(inputs.front().size());
  for (const Vector& x : inputs) add_outer(m, x);
  m *= 1.0 / static_cast<double>(inputs.size());
  return m;
}

/// a (x) b for the row-major (k, i) parameter layout.
SymMatrix kron(const SymMatrix& a, const SymMatrix& b) {
  const std::size_t p = a.dim();
  const std::size_t d = b.dim();
  SymMatrix out(p * d);
  for (std::size_t k = 0; k < p; ++k)
    for (std::size_t l = k; l < p; ++l)
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          const std::size_t r = k * d + i;
          const std::size_t c = l * d + j;
          if (c < r) continue;
          out.set(r, c, a(k, l) * b(i, j));
        }
  return out;
}

SymMatrix closed_form_fisher(const LossOracle& oracle, const Dataset& data) {
  switch (oracle.family()) {
    case Family::kGaussianMean:
      return SymMatrix::identity(oracle.dim());
    case Family::kOls:
      return kron(SymMatrix::identity(static_cast<std::size_t>(oracle.shape().d_out)),
                  input_second_moment(data.inputs));
    default:
      throw UnsupportedError(std::string("compute_F: no closed form for family ") +
                             to_string(oracle.family()));
  }
}

SymMatrix exact_fisher(const LossOracle& oracle, const Dataset& data) {
  if (!oracle.is_classification()) {
    throw UnsupportedError(std::string("compute_F: exact enumeration needs a finite label set; ") +
                           to_string(oracle.family()) + " has continuous targets");
  }
  const int classes = oracle.num_classes();
  return reduce_samples(data.size(), oracle.dim(), [&](std::size_t n, SymMatrix& acc) {
    const Vector q = label_distribution(oracle, data.inputs[n]);
    for (int y = 0; y < classes; ++y) {
      if (q[y] == 0.0) continue;
      const auto e = eval(oracle, data.inputs[n], Target::cls(y), Derivatives::kFirstOrder);
      add_outer(acc, e.grad, q[y]);
    }
  });
}

SymMatrix monte_carlo_fisher(const LossOracle& oracle, const Dataset& data, std::size_t draws,
                             std::uint64_t seed) {
  if (draws == 0) throw InvalidArgumentError("compute_F: Monte Carlo mode needs draws >= 1");
  const double w = 1.0 / static_cast<double>(draws);
  return reduce_samples(data.size(), oracle.dim(), [&](std::size_t n, SymMatrix& acc) {
    Rng rng = make_rng(derive_seed(seed, n));
    const Vector& x = data.inputs[n];
    for (std::size_t r = 0; r < draws; ++r) {
      Vector g;
      if (oracle.family() == Family::kGaussianMean) {
        // The observation itself is the random quantity: x' ~ N(theta, I).
        g = standard_normal_vector(rng, oracle.dim());
        for (double& v : g) v = -v;
      } else {
        const Target y = sample_label(oracle, x, rng);
        g = eval(oracle, x, y, Derivatives::kFirstOrder).grad;
      }
      add_outer(acc, g, w);
    }
  });
}

nlohmann::json matrix_json(const SymMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.dim(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < m.dim(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

SymMatrix matrix_from_json(const nlohmann::json& rows, std::size_t dim, const char* name) {
  if (!rows.is_array() || rows.size() != dim) {
    throw IoError(std::string("infomat json: matrix ") + name + " must have " +
                  std::to_string(dim) + " rows");
  }
  Matrix m(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    if (!rows[i].is_array() || rows[i].size() != dim) {
      throw IoError(std::string("infomat json: row of ") + name + " has wrong length");
    }
    for (std::size_t j = 0; j < dim; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return SymMatrix::from_matrix(m, 0.0);
}

}  // namespace

const char* to_string(FisherMode mode) {
  switch (mode) {
    case FisherMode::kAuto:
      return "auto";
    case FisherMode::kExact:
      return "exact";
    case FisherMode::kClosedForm:
      return "closed-form";
    case FisherMode::kMonteCarlo:
      return "monte-carlo";
  }
  return "unknown";
}

SymMatrix compute_H(const LossOracle& oracle, const Dataset& data) {
  check_data(oracle, data);
  return reduce_samples(data.size(), oracle.dim(), [&](std::size_t n, SymMatrix& acc) {
    acc += eval(oracle, data.inputs[n], data.targets[n], Derivatives::kAll).hess;
  });
}

SymMatrix compute_C(const LossOracle& oracle, const Dataset& data) {
  check_data(oracle, data);
  return reduce_samples(data.size(), oracle.dim(), [&](std::size_t n, SymMatrix& acc) {
    add_outer(acc, eval(oracle, data.inputs[n], data.targets[n], Derivatives::kFirstOrder).grad);
  });
}

SymMatrix compute_S(const LossOracle& oracle, const Dataset& data) {
  SymMatrix s = compute_C(oracle, data);
  add_outer(s, mean_gradient(oracle, data), -1.0);
  return s;
}

SymMatrix compute_F(const LossOracle& oracle, const Dataset& data, const FisherOptions& options) {
  check_data(oracle, data);
  switch (options.mode) {
    case FisherMode::kAuto:
      return oracle.is_classification() ? exact_fisher(oracle, data)
                                        : closed_form_fisher(oracle, data);
    case FisherMode::kExact:
      return exact_fisher(oracle, data);
    case FisherMode::kClosedForm:
      return closed_form_fisher(oracle, data);
    case FisherMode::kMonteCarlo:
      return monte_carlo_fisher(oracle, data, options.draws, options.seed);
  }
  throw InvalidArgumentError("compute_F: unknown mode");
}

InfoMatrixSet compute_all(const LossOracle& oracle, const Dataset& data,
                          const FisherOptions& options) {
  InfoMatrixSet out;
  out.H = compute_H(oracle, data);
  out.F = compute_F(oracle, data, options);
  out.C = compute_C(oracle, data);
  out.mean_grad = mean_gradient(oracle, data);
  out.S = out.C;
  add_outer(out.S, out.mean_grad, -1.0);
  out.N = data.size();
  out.fisher_mc_draws = options.mode == FisherMode::kMonteCarlo ? options.draws : 0;
  return out;
}

OlsClosedForms ols_closed_forms(const std::vector<Vector>& inputs, const SymMatrix& noise_cov) {
  const SymMatrix xx = input_second_moment(inputs);
  for (const Vector& x : inputs)
    if (x.size() != xx.dim()) throw DimensionError("ols_closed_forms: ragged inputs");
  OlsClosedForms out;
  out.H = kron(SymMatrix::identity(noise_cov.dim()), xx);
  out.F = out.H;
  out.C = kron(noise_cov, xx);
  return out;
}

double similarity_r(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionError("similarity_r: dimension mismatch");
  const double tb = trace(b);
  if (tb == 0.0) throw InvalidArgumentError("similarity_r: Tr(b) is zero");
  return trace(a) / tb;
}

double similarity_s(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionError("similarity_s: dimension mismatch");
  const double na = frobenius_norm(a);
  const double nb = frobenius_norm(b);
  if (na == 0.0 || nb == 0.0) throw InvalidArgumentError("similarity_s: zero matrix");
  return frobenius_inner(a, b) / (na * nb);
}

std::string info_to_json(const InfoMatrixSet& info) {
  nlohmann::ordered_json j;
  j["format"] = "infolab.infomat/1";
  j["dim"] = info.dim();
  j["N"] = info.N;
  j["fisher_mc_draws"] = info.fisher_mc_draws;
  j["H"] = matrix_json(info.H);
  j["F"] = matrix_json(info.F);
  j["C"] = matrix_json(info.C);
  j["S"] = matrix_json(info.S);
  return j.dump(1) + "\n";
}

InfoMatrixSet info_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("infomat json: ") + e.what());
  }
  if (j.value("format", "") != "infolab.infomat/1") throw IoError("infomat json: unknown format");
  InfoMatrixSet info;
  const auto dim = j.at("dim").get<std::size_t>();
  info.N = j.at("N").get<std::size_t>();
  info.fisher_mc_draws = j.at("fisher_mc_draws").get<std::size_t>();
  info.H = matrix_from_json(j.at("H"), dim, "H");
  info.F = matrix_from_json(j.at("F"), dim, "F");
  info.C = matrix_from_json(j.at("C"), dim, "C");
  info.S = matrix_from_json(j.at("S"), dim, "S");
  return info;
}

}  // namespace infolab
