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

#include "infolab/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "infolab/error.hpp"

namespace infolab {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2 pi)

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void check_input(const LossOracle& oracle, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(oracle.input_dim())) {
    throw DimensionError("input has dimension " + std::to_string(x.size()) + ", model expects " +
                         std::to_string(oracle.input_dim()));
  }
}

int check_label(const LossOracle& oracle, const Target& y) {
  if (y.label < 0 || y.label >= oracle.num_classes()) {
    throw InvalidArgumentError("label " + std::to_string(y.label) + " outside [0, " +
                               std::to_string(oracle.num_classes()) + ")");
  }
  return y.label;
}

/// Numerically stable softmax; returns log-sum-exp through `lse`.
Vector softmax(std::span<const double> logits, double* lse) {
  const double m = *std::max_element(logits.begin(), logits.end());
  Vector p(logits.size());
  double z = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(logits[k] - m);
    z += p[k];
  }
  for (double& v : p) v /= z;
  if (lse != nullptr) *lse = m + std::log(z);
  return p;
}

// Dense linear layer stored row-major at params[offset], rows x cols, followed
// by `rows` biases.
Vector affine(std::span<const double> params, std::size_t offset, int rows, int cols,
              std::span<const double> x) {
  Vector out(static_cast<std::size_t>(rows));
  const std::size_t bias = offset + static_cast<std::size_t>(rows) * cols;
  for (int r = 0; r < rows; ++r) {
    double acc = params[bias + r];
    const std::size_t row = offset + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) acc += params[row + c] * x[c];
    out[r] = acc;
  }
  return out;
}

struct SoftmaxForward {
  Vector hidden;  // tanh activations (empty for the linear readout)
  Vector probs;
  double lse = 0.0;
  Vector logits;
};

SoftmaxForward softmax_forward(const LossOracle& o, std::span<const double> x) {
  const ModelShape& s = o.shape();
  const auto& th = o.params();
  SoftmaxForward f;
  const int hidden = s.family == Family::kSoftmaxMlp1 ? s.hidden : 0;
  if (hidden == 0) {
    f.logits = affine(th, 0, s.d_out, s.d_in, x);
  } else {
    f.hidden = affine(th, 0, hidden, s.d_in, x);
    for (double& a : f.hidden) a = std::tanh(a);
    const std::size_t off = static_cast<std::size_t>(hidden) * (s.d_in + 1);
    f.logits = affine(th, off, s.d_out, hidden, f.hidden);
  }
  f.probs = softmax(f.logits, &f.lse);
  return f;
}

// Backpropagates dL/dlogits = p - e_y into parameter and input gradients.
void softmax_backward(const LossOracle& o, std::span<const double> x, const SoftmaxForward& f,
                      int y, Vector& grad, Vector& input_grad) {
  const ModelShape& s = o.shape();
  const auto& th = o.params();
  const int K = s.d_out;
  Vector dz = f.probs;
  dz[y] -= 1.0;
  grad.assign(o.dim(), 0.0);
  input_grad.assign(static_cast<std::size_t>(s.d_in), 0.0);
  const int hidden = s.family == Family::kSoftmaxMlp1 ? s.hidden : 0;
  if (hidden == 0) {
    const std::size_t bias = static_cast<std::size_t>(K) * s.d_in;
    for (int k = 0; k < K; ++k) {
      for (int j = 0; j < s.d_in; ++j) {
        grad[k * s.d_in + j] = dz[k] * x[j];
        input_grad[j] += th[k * s.d_in + j] * dz[k];
      }
      grad[bias + k] = dz[k];
    }
    return;
  }
  const std::size_t off2 = static_cast<std::size_t>(hidden) * (s.d_in + 1);
  const std::size_t bias2 = off2 + static_cast<std::size_t>(K) * hidden;
  Vector dh(static_cast<std::size_t>(hidden), 0.0);
  for (int k = 0; k < K; ++k) {
    for (int m = 0; m < hidden; ++m) {
      grad[off2 + k * hidden + m] = dz[k] * f.hidden[m];
      dh[m] += th[off2 + k * hidden + m] * dz[k];
    }
    grad[bias2 + k] = dz[k];
  }
  const std::size_t bias1 = static_cast<std::size_t>(hidden) * s.d_in;
  for (int m = 0; m < hidden; ++m) {
    const double da = dh[m] * (1.0 - f.hidden[m] * f.hidden[m]);
    for (int j = 0; j < s.d_in; ++j) {
      grad[m * s.d_in + j] = da * x[j];
      input_grad[j] += th[m * s.d_in + j] * da;
    }
    grad[bias1 + m] = da;
  }
}

// Hessian of the linear softmax readout: J^T (diag(p) - p p^T) J with
// features [x, 1]; independent of the label.
SymMatrix softmax_linear_hessian(const LossOracle& o, std::span<const double> x,
                                 std::span<const double> p) {
  const int K = o.shape().d_out;
  const int d = o.shape().d_in;
  const std::size_t bias = static_cast<std::size_t>(K) * d;
  auto index = [&](int k, int j) -> std::size_t {
    return j == d ? bias + k : static_cast<std::size_t>(k) * d + j;
  };
  auto feature = [&](int j) { return j == d ? 1.0 : x[j]; };
  SymMatrix h(o.dim());
  for (int k = 0; k < K; ++k) {
    for (int l = k; l < K; ++l) {
      const double a = (k == l ? p[k] : 0.0) - p[k] * p[l];
      for (int i = 0; i <= d; ++i) {
        for (int j = 0; j <= d; ++j) {
          const std::size_t r = index(k, i);
          const std::size_t c = index(l, j);
          if (k == l && c < r) continue;
          h.set(r, c, a * feature(i) * feature(j));
        }
      }
    }
  }
  return h;
}

Vector first_order_grad(const LossOracle& o, std::span<const double> x, const Target& y) {
  return eval(o, x, y, Derivatives::kFirstOrder).grad;
}

SymMatrix finite_difference_hessian(const LossOracle& o, std::span<const double> x,
                                    const Target& y) {
  const std::size_t n = o.dim();
  Matrix cols(n, n);
  LossOracle probe = o;
  Vector theta = o.params();
  for (std::size_t i = 0; i < n; ++i) {
    const double h = 1e-4 * (1.0 + std::abs(theta[i]));
    const double saved = theta[i];
    theta[i] = saved + h;
    probe.set_params(theta);
    const Vector gp = first_order_grad(probe, x, y);
    theta[i] = saved - h;
    probe.set_params(theta);
    const Vector gm = first_order_grad(probe, x, y);
    theta[i] = saved;
    for (std::size_t r = 0; r < n; ++r) cols(r, i) = (gp[r] - gm[r]) / (2.0 * h);
  }
  return SymMatrix::symmetrized(cols);
}

}  // namespace

const char* to_string(Family f) {
  switch (f) {
    case Family::kGaussianMean:
      return "gaussian-mean";
    case Family::kOls:
      return "ols";
    case Family::kSoftmaxLinear:
      return "softmax-linear";
    case Family::kSoftmaxMlp1:
      return "softmax-mlp";
  }
  return "unknown";
}

Family family_from_string(const std::string& name) {
  for (Family f : {Family::kGaussianMean, Family::kOls, Family::kSoftmaxLinear,
                   Family::kSoftmaxMlp1}) {
    if (name == to_string(f)) return f;
  }
  throw InvalidArgumentError("unknown model family '" + name + "'");
}

// ---------------------------------------------------------------------------
// Dataset

void Dataset::validate(int num_classes) const {
  if (inputs.empty()) throw InvalidArgumentError("dataset is empty");
  if (targets.size() != inputs.size()) {
    throw InvalidArgumentError("dataset has " + std::to_string(inputs.size()) + " inputs but " +
                               std::to_string(targets.size()) + " targets");
  }
  const std::size_t d = inputs.front().size();
  for (std::size_t n = 0; n < inputs.size(); ++n) {
    if (inputs[n].size() != d) {
      throw InvalidArgumentError("input " + std::to_string(n) + " has inconsistent dimension");
    }
    if (num_classes > 0 && (targets[n].label < 0 || targets[n].label >= num_classes)) {
      throw InvalidArgumentError("label of sample " + std::to_string(n) + " out of range");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.inputs.reserve(indices.size());
  out.targets.reserve(indices.size());
  for (std::size_t i : indices) {
    out.inputs.push_back(inputs.at(i));
    out.targets.push_back(targets.at(i));
  }
  return out;
}

// ---------------------------------------------------------------------------
// LossOracle

LossOracle::LossOracle(ModelShape shape) : shape_(shape) {
  if (shape.d_in < 1) throw InvalidArgumentError("model input dimension must be >= 1");
  std::size_t n = 0;
  switch (shape.family) {
    case Family::kGaussianMean:
      shape_.d_out = shape.d_in;
      shape_.hidden = 0;
      n = static_cast<std::size_t>(shape.d_in);
      break;
    case Family::kOls:
      if (shape.d_out < 1) throw InvalidArgumentError("OLS output dimension must be >= 1");
      shape_.hidden = 0;
      n = static_cast<std::size_t>(shape.d_out) * shape.d_in;
      break;
    case Family::kSoftmaxLinear:
      if (shape.d_out < 2) throw InvalidArgumentError("softmax needs >= 2 classes");
      shape_.hidden = 0;
      n = static_cast<std::size_t>(shape.d_out) * (shape.d_in + 1);
      break;
    case Family::kSoftmaxMlp1:
      if (shape.d_out < 2) throw InvalidArgumentError("softmax needs >= 2 classes");
      if (shape.hidden < 0) throw InvalidArgumentError("hidden width must be >= 0");
      n = shape.hidden == 0
              ? static_cast<std::size_t>(shape.d_out) * (shape.d_in + 1)
              : static_cast<std::size_t>(shape.hidden) * (shape.d_in + 1) +
                    static_cast<std::size_t>(shape.d_out) * (shape.hidden + 1);
      break;
  }
  params_.assign(n, 0.0);
}

LossOracle LossOracle::gaussian_mean(int dim) {
  return LossOracle({Family::kGaussianMean, dim, dim, 0});
}
LossOracle LossOracle::ols(int d_in, int d_out) { return LossOracle({Family::kOls, d_in, d_out, 0}); }
LossOracle LossOracle::softmax_linear(int d_in, int classes) {
  return LossOracle({Family::kSoftmaxLinear, d_in, classes, 0});
}
LossOracle LossOracle::softmax_mlp(int d_in, int hidden, int classes) {
  return LossOracle({Family::kSoftmaxMlp1, d_in, classes, hidden});
}
LossOracle LossOracle::from_shape(const ModelShape& shape) { return LossOracle(shape); }

int LossOracle::num_classes() const noexcept { return is_classification() ? shape_.d_out : 0; }

bool LossOracle::is_classification() const noexcept {
  return shape_.family == Family::kSoftmaxLinear || shape_.family == Family::kSoftmaxMlp1;
}

void LossOracle::set_params(Vector params) {
  if (params.size() != params_.size()) {
    throw DimensionError("parameter vector has size " + std::to_string(params.size()) +
                         ", model expects " + std::to_string(params_.size()));
  }
  params_ = std::move(params);
}

LossOracle LossOracle::with_params(Vector params) const {
  LossOracle copy = *this;
  copy.set_params(std::move(params));
  return copy;
}

// ---------------------------------------------------------------------------
// Per-sample derivatives

PerSampleDerivatives eval(const LossOracle& o, std::span<const double> x, const Target& y,
                          Derivatives which) {
  check_input(o, x);
  const ModelShape& s = o.shape();
  const auto& th = o.params();
  PerSampleDerivatives out;
  const bool want_hess = which == Derivatives::kAll;

  switch (s.family) {
    case Family::kGaussianMean: {
      out.grad.resize(o.dim());
      out.input_grad.resize(o.dim());
      double sq = 0.0;
      for (std::size_t i = 0; i < o.dim(); ++i) {
        const double r = x[i] - th[i];
        sq += r * r;
        out.grad[i] = -r;
        out.input_grad[i] = r;
      }
      out.loss = 0.5 * sq + 0.5 * s.d_in * kLog2Pi;
      if (want_hess) out.hess = SymMatrix::identity(o.dim());
      break;
    }
    case Family::kOls: {
      if (y.value.size() != static_cast<std::size_t>(s.d_out)) {
        throw InvalidArgumentError("OLS target must have dimension " + std::to_string(s.d_out));
      }
      out.grad.assign(o.dim(), 0.0);
      out.input_grad.assign(static_cast<std::size_t>(s.d_in), 0.0);
      double sq = 0.0;
      for (int k = 0; k < s.d_out; ++k) {
        double pred = 0.0;
        for (int j = 0; j < s.d_in; ++j) pred += th[k * s.d_in + j] * x[j];
        const double r = y.value[k] - pred;
        sq += r * r;
        for (int j = 0; j < s.d_in; ++j) {
          out.grad[k * s.d_in + j] = -r * x[j];
          out.input_grad[j] -= r * th[k * s.d_in + j];
        }
      }
      out.loss = 0.5 * sq + 0.5 * s.d_out * kLog2Pi;
      if (want_hess) {
        // I_{d_out} (x) x x^T
        out.hess = SymMatrix(o.dim());
        for (int k = 0; k < s.d_out; ++k)
          for (int i = 0; i < s.d_in; ++i)
            for (int j = i; j < s.d_in; ++j)
              out.hess.set(k * s.d_in + i, k * s.d_in + j, x[i] * x[j]);
      }
      break;
    }
    case Family::kSoftmaxLinear:
    case Family::kSoftmaxMlp1: {
      const int label = check_label(o, y);
      const SoftmaxForward f = softmax_forward(o, x);
      out.loss = f.lse - f.logits[label];
      softmax_backward(o, x, f, label, out.grad, out.input_grad);
      if (want_hess) {
        const bool linear = s.family == Family::kSoftmaxLinear || s.hidden == 0;
        out.hess = linear ? softmax_linear_hessian(o, x, f.probs) : finite_difference_hessian(o, x, y);
      }
      break;
    }
  }

  if (!std::isfinite(out.loss) || !all_finite(out.grad) || !all_finite(out.input_grad) ||
      (want_hess && !all_finite(out.hess.matrix().data()))) {
    throw NumericalError("eval: non-finite loss or derivative");
  }
  return out;
}

double loss(const LossOracle& o, std::span<const double> x, const Target& y) {
  return eval(o, x, y, Derivatives::kFirstOrder).loss;
}

Vector label_distribution(const LossOracle& o, std::span<const double> x) {
  if (!o.is_classification()) {
    throw UnsupportedError(std::string("label_distribution: family ") + to_string(o.family()) +
                           " has no finite label set");
  }
  check_input(o, x);
  return softmax_forward(o, x).probs;
}

Target sample_label(const LossOracle& o, std::span<const double> x, Rng& rng) {
  check_input(o, x);
  switch (o.family()) {
    case Family::kGaussianMean:
      throw UnsupportedError("sample_label: GaussianMean has no conditional label distribution");
    case Family::kOls: {
      const ModelShape& s = o.shape();
      Vector y(static_cast<std::size_t>(s.d_out));
      for (int k = 0; k < s.d_out; ++k) {
        double pred = 0.0;
        for (int j = 0; j < s.d_in; ++j) pred += o.params()[k * s.d_in + j] * x[j];
        y[k] = pred + standard_normal(rng);
      }
      return Target::regression(std::move(y));
    }
    case Family::kSoftmaxLinear:
    case Family::kSoftmaxMlp1: {
      const Vector p = softmax_forward(o, x).probs;
      const double u = uniform01(rng);
      double acc = 0.0;
      for (std::size_t k = 0; k < p.size(); ++k) {
        acc += p[k];
        if (u < acc) return Target::cls(static_cast<int>(k));
      }
      // u landed in the rounding gap above the cumulative sum.
      for (std::size_t k = p.size(); k > 0; --k)
        if (p[k - 1] > 0.0) return Target::cls(static_cast<int>(k - 1));
      return Target::cls(0);
    }
  }
  throw UnsupportedError("sample_label: unknown family");
}

LossOracle randomized(const LossOracle& o, double scale, Rng& rng) {
  Vector p = standard_normal_vector(rng, o.dim());
  for (double& v : p) v *= scale;
  return o.with_params(std::move(p));
}

// ---------------------------------------------------------------------------
// Training

double mean_loss(const LossOracle& o, const Dataset& data) {
  data.validate(o.num_classes());
  double acc = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) acc += loss(o, data.inputs[n], data.targets[n]);
  return acc / static_cast<double>(data.size());
}

Vector mean_gradient(const LossOracle& o, const Dataset& data) {
  data.validate(o.num_classes());
  Vector g(o.dim(), 0.0);
  for (std::size_t n = 0; n < data.size(); ++n) {
    const Vector gn = eval(o, data.inputs[n], data.targets[n], Derivatives::kFirstOrder).grad;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += gn[i];
  }
  for (double& v : g) v /= static_cast<double>(data.size());
  return g;
}

LossOracle train(const LossOracle& oracle, const Dataset& data, const TrainOptions& options,
                 Rng& rng) {
  if (options.steps < 0) throw InvalidArgumentError("train: steps must be >= 0");
  if (options.batch == 0) throw InvalidArgumentError("train: batch must be >= 1");
  data.validate(oracle.num_classes());
  LossOracle model = oracle;
  if (options.steps == 0) return model;

  const std::size_t n = data.size();
  const bool full = options.batch >= n;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::size_t cursor = n;

  Vector theta = model.params();
  Vector velocity(theta.size(), 0.0);
  Vector grad(theta.size());
  for (std::int64_t step = 0; step < options.steps; ++step) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double batch_loss = 0.0;
    const std::size_t count = full ? n : options.batch;
    for (std::size_t b = 0; b < count; ++b) {
      std::size_t idx = b;
      if (!full) {
        if (cursor == n) {
          shuffle_indices(perm, rng);
          cursor = 0;
        }
        idx = perm[cursor++];
      }
      PerSampleDerivatives e;
      try {
        e = eval(model, data.inputs[idx], data.targets[idx], Derivatives::kFirstOrder);
      } catch (const NumericalError&) {
        throw DivergenceError("train: non-finite loss at step " + std::to_string(step), step);
      }
      batch_loss += e.loss;
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += e.grad[i];
    }
    if (!std::isfinite(batch_loss)) {
      throw DivergenceError("train: non-finite loss at step " + std::to_string(step), step);
    }
    const double inv = 1.0 / static_cast<double>(count);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      velocity[i] = options.momentum * velocity[i] + grad[i] * inv;
      theta[i] -= options.stepsize * velocity[i];
    }
    if (!all_finite(theta)) {
      throw DivergenceError("train: non-finite parameters at step " + std::to_string(step), step);
    }
    model.set_params(theta);
  }
  return model;
}

// ---------------------------------------------------------------------------
// Synthetic data

Dataset make_gaussian_mixture(const MixtureSpec& spec, std::uint64_t means_seed, Rng& rng) {
  if (spec.n == 0 || spec.d_in < 1 || spec.classes < 2) {
    throw InvalidArgumentError("make_gaussian_mixture: need n >= 1, d_in >= 1, classes >= 2");
  }
  if (!(spec.corruption >= 0.0 && spec.corruption <= 1.0)) {
    throw InvalidArgumentError("make_gaussian_mixture: corruption must lie in [0, 1]");
  }
  Rng mean_rng = make_rng(means_seed);
  std::vector<Vector> means;
  for (int k = 0; k < spec.classes; ++k) {
    Vector m = standard_normal_vector(mean_rng, static_cast<std::size_t>(spec.d_in));
    const double norm = std::sqrt(norm_sq(m));
    for (double& v : m) v *= spec.separation / norm;
    means.push_back(std::move(m));
  }

  Dataset data;
  data.inputs.reserve(spec.n);
  data.targets.reserve(spec.n);
  const auto classes = static_cast<std::size_t>(spec.classes);
  for (std::size_t n = 0; n < spec.n; ++n) {
    const int y = static_cast<int>(uniform_index(rng, classes));
    Vector x = standard_normal_vector(rng, static_cast<std::size_t>(spec.d_in));
    for (int j = 0; j < spec.d_in; ++j) x[j] += means[y][j];
    data.inputs.push_back(std::move(x));
    data.targets.push_back(Target::cls(y));
  }

  const auto corrupt = static_cast<std::size_t>(std::llround(spec.corruption * spec.n));
  std::vector<std::size_t> order(spec.n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle_indices(order, rng);
  for (std::size_t i = 0; i < corrupt; ++i) {
    data.targets[order[i]].label = static_cast<int>(uniform_index(rng, classes));
  }
  return data;
}

}  // namespace infolab
