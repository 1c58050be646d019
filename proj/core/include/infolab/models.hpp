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

#ifndef INFOLAB_MODELS_HPP
#define INFOLAB_MODELS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "infolab/matrix.hpp"
#include "infolab/rng.hpp"

namespace infolab {

enum class Family { kGaussianMean, kOls, kSoftmaxLinear, kSoftmaxMlp1 };

const char* to_string(Family f);
Family family_from_string(const std::string& name);

/// A supervised target: a class index for the softmax families, a real
/// vector for OLS. GaussianMean ignores its target.
struct Target {
  int label = -1;
  Vector value;

  static Target none() { return {}; }
  static Target cls(int k) { return {k, {}}; }
  static Target regression(Vector v) { return {-1, std::move(v)}; }

  bool is_class() const noexcept { return label >= 0; }
};

struct Dataset {
  std::vector<Vector> inputs;
  std::vector<Target> targets;

  std::size_t size() const noexcept { return inputs.size(); }
  std::size_t input_dim() const { return inputs.empty() ? 0 : inputs.front().size(); }

  /// Throws InvalidArgumentError unless N >= 1, inputs share one dimension,
  /// and targets are consistent (all class labels in [0, num_classes) when
  /// num_classes > 0).
  void validate(int num_classes = 0) const;

  Dataset subset(std::span<const std::size_t> indices) const;
};

/// Shape metadata. `d_out` is the number of classes for the softmax
/// families and the regression output dimension for OLS.
struct ModelShape {
  Family family = Family::kSoftmaxLinear;
  int d_in = 0;
  int d_out = 0;
  int hidden = 0;
};

/// A model family together with its current parameter vector.
///
/// Parameter packing (flat, row-major):
///   GaussianMean   theta (d_in)
///   OLS            W (d_out x d_in)
///   SoftmaxLinear  W (K x d_in), then b (K)
///   SoftmaxMLP1    W1 (hidden x d_in), b1 (hidden), W2 (K x hidden), b2 (K);
///                  hidden == 0 degenerates to the SoftmaxLinear layout.
///
/// The loss is always the negative log-likelihood of the family's model
/// distribution, constants included.
class LossOracle {
 public:
  static LossOracle gaussian_mean(int dim);
  static LossOracle ols(int d_in, int d_out);
  static LossOracle softmax_linear(int d_in, int classes);
  static LossOracle softmax_mlp(int d_in, int hidden, int classes);
  static LossOracle from_shape(const ModelShape& shape);

  Family family() const noexcept { return shape_.family; }
  const ModelShape& shape() const noexcept { return shape_; }
  std::size_t dim() const noexcept { return params_.size(); }
  int input_dim() const noexcept { return shape_.d_in; }
  int num_classes() const noexcept;
  bool is_classification() const noexcept;

  const Vector& params() const noexcept { return params_; }
  void set_params(Vector params);
  LossOracle with_params(Vector params) const;

 private:
  explicit LossOracle(ModelShape shape);

  ModelShape shape_;
  Vector params_;
};

struct PerSampleDerivatives {
  double loss = 0.0;
  Vector grad;
  SymMatrix hess;  // empty unless requested
  Vector input_grad;
};

enum class Derivatives { kFirstOrder, kAll };

/// Loss, parameter gradient, input gradient and (for Derivatives::kAll) the
/// parameter Hessian of one sample. Hessians are analytic except for
/// SoftmaxMLP1, which uses central differences of the analytic gradient with
/// step 1e-4 * (1 + |theta_i|), symmetrized.
PerSampleDerivatives eval(const LossOracle& oracle, std::span<const double> x,
                          const Target& y, Derivatives which = Derivatives::kAll);

double loss(const LossOracle& oracle, std::span<const double> x, const Target& y);

/// q_theta(. | x) for the softmax families.
Vector label_distribution(const LossOracle& oracle, std::span<const double> x);

/// Draws y ~ q_theta(. | x): a class for softmax models, W x + N(0, I) for
/// OLS. GaussianMean has no conditional and is rejected.
Target sample_label(const LossOracle& oracle, std::span<const double> x, Rng& rng);

/// Random parameter initialization, N(0, scale^2) per coordinate.
LossOracle randomized(const LossOracle& oracle, double scale, Rng& rng);

struct TrainOptions {
  std::int64_t steps = 0;
  double stepsize = 0.1;
  std::size_t batch = 32;
  double momentum = 0.0;
};

/// Mini-batch SGD with heavy-ball momentum (v <- momentum v + g,
/// theta <- theta - stepsize v). Batches are drawn from a fresh permutation
/// every epoch; batch >= N means full-batch. Throws DivergenceError with the
/// step index if the batch loss becomes non-finite.
LossOracle train(const LossOracle& oracle, const Dataset& data, const TrainOptions& options,
                 Rng& rng);

/// Mean loss over a dataset.
double mean_loss(const LossOracle& oracle, const Dataset& data);

/// Mean parameter gradient over a dataset.
Vector mean_gradient(const LossOracle& oracle, const Dataset& data);

struct MixtureSpec {
  std::size_t n = 100;
  int d_in = 2;
  int classes = 2;
  double separation = 2.0;
  /// Fraction of samples whose label is replaced by a uniformly drawn class.
  double corruption = 0.0;
};

/// K-class Gaussian mixture: class means are `separation` times
/// unit-norm random directions (fixed by `means_seed`), inputs are
/// mean + N(0, I), labels uniform. Exactly round(corruption * n) samples,
/// chosen at random, get a uniformly redrawn label.
Dataset make_gaussian_mixture(const MixtureSpec& spec, std::uint64_t means_seed, Rng& rng);

}  // namespace infolab

#endif  // INFOLAB_MODELS_HPP
