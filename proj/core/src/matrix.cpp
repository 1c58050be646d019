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

#include "infolab/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "infolab/error.hpp"

namespace infolab {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" +
                         std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

void require_nonempty(std::size_t dim, const char* what) {
  if (dim == 0) throw DimensionError(std::string(what) + ": empty matrix");
}

}  // namespace

// ---------------------------------------------------------------------------
// Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Matrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    require_same_dim(row.size(), c, "Matrix::from_rows");
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_dim(rows_, other.rows_, "Matrix::operator+=");
  require_same_dim(cols_, other.cols_, "Matrix::operator+=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_dim(rows_, other.rows_, "Matrix::operator-=");
  require_same_dim(cols_, other.cols_, "Matrix::operator-=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

// ---------------------------------------------------------------------------
// SymMatrix

SymMatrix::SymMatrix(std::size_t dim) : dim_(dim), m_(dim, dim) {
  require_nonempty(dim, "SymMatrix");
}

SymMatrix SymMatrix::identity(std::size_t dim) {
  SymMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m.m_(i, i) = 1.0;
  return m;
}

SymMatrix SymMatrix::diagonal(std::span<const double> diag) {
  SymMatrix m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m.m_(i, i) = diag[i];
  return m;
}

SymMatrix SymMatrix::diagonal(std::initializer_list<double> diag) {
  return diagonal(std::span<const double>(diag.begin(), diag.size()));
}

SymMatrix SymMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  return from_matrix(Matrix::from_rows(rows), 0.0);
}

SymMatrix SymMatrix::from_matrix(const Matrix& m, double tol) {
  require_same_dim(m.rows(), m.cols(), "SymMatrix::from_matrix");
  double scale = 0.0;
  for (double v : m.data()) scale = std::max(scale, std::abs(v));
  const double limit = tol * (1.0 + scale);
  SymMatrix out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = i; j < m.cols(); ++j) {
      if (std::abs(m(i, j) - m(j, i)) > limit) {
        throw InvalidArgumentError("SymMatrix::from_matrix: input is not symmetric at (" +
                                   std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      out.set(i, j, 0.5 * (m(i, j) + m(j, i)));
    }
  }
  return out;
}

SymMatrix SymMatrix::symmetrized(const Matrix& m) {
  require_same_dim(m.rows(), m.cols(), "SymMatrix::symmetrized");
  SymMatrix out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i; j < m.cols(); ++j) out.set(i, j, 0.5 * (m(i, j) + m(j, i)));
  return out;
}

void SymMatrix::set(std::size_t i, std::size_t j, double v) {
  m_(i, j) = v;
  m_(j, i) = v;
}

void SymMatrix::add(std::size_t i, std::size_t j, double v) {
  m_(i, j) += v;
  if (i != j) m_(j, i) += v;
}

Vector SymMatrix::diag() const {
  Vector d(dim_);
  for (std::size_t i = 0; i < dim_; ++i) d[i] = m_(i, i);
  return d;
}

bool SymMatrix::is_diagonal(double tol) const {
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = i + 1; j < dim_; ++j)
      if (std::abs(m_(i, j)) > tol) return false;
  return true;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& other) {
  require_same_dim(dim_, other.dim_, "SymMatrix::operator+=");
  m_ += other.m_;
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& other) {
  require_same_dim(dim_, other.dim_, "SymMatrix::operator-=");
  m_ -= other.m_;
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  m_ *= s;
  return *this;
}

bool operator==(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim_ != b.dim_) return false;
  return std::equal(a.m_.data().begin(), a.m_.data().end(), b.m_.data().begin());
}

SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
SymMatrix operator*(double s, SymMatrix a) { return a *= s; }

// ---------------------------------------------------------------------------
// Eigendecomposition

EigenDecomp eigh(const SymMatrix& m, JacobiOptions options) {
  const std::size_t n = m.dim();
  require_nonempty(n, "eigh");
  Matrix a = m.matrix();
  Matrix v = Matrix::identity(n);

  double total = 0.0;
  for (double x : a.data()) {
    if (!std::isfinite(x)) throw NumericalError("eigh: non-finite matrix entry");
    total += x * x;
  }

  bool converged = n == 1 || total == 0.0;
  for (int sweep = 0; sweep < options.max_sweeps && !converged; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    // Off-diagonal mass below machine resolution of the Frobenius norm.
    if (off <= 1e-32 * total) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off > 1e-32 * total) {
      throw NumericalError("eigh: Jacobi iteration did not converge in " +
                           std::to_string(options.max_sweeps) + " sweeps");
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigenDecomp out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.eigenvalues[k] = a(src, src);
    std::size_t pivot = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(v(i, src)) > std::abs(v(pivot, src))) pivot = i;
    const double sign = v(pivot, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = sign * v(i, src);
  }
  return out;
}

namespace {

SymMatrix weighted_projector_sum(const EigenDecomp& e, std::span<const double> weights) {
  const std::size_t n = e.dim();
  SymMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (weights[k] == 0.0) continue;
        acc += e.eigenvectors(i, k) * weights[k] * e.eigenvectors(j, k);
      }
      out.set(i, j, acc);
    }
  }
  return out;
}

}  // namespace

SymMatrix spectral_map(const EigenDecomp& e, const std::function<double(double)>& f) {
  Vector w(e.dim());
  for (std::size_t k = 0; k < e.dim(); ++k) w[k] = f(e.eigenvalues[k]);
  return weighted_projector_sum(e, w);
}

SymMatrix spectral_map(const SymMatrix& m, const std::function<double(double)>& f) {
  return spectral_map(eigh(m), f);
}

SymMatrix reconstruct(const EigenDecomp& e) {
  return spectral_map(e, [](double x) { return x; });
}

PseudoInverse truncated_pinv(const EigenDecomp& e, double rel_cutoff) {
  if (!(rel_cutoff > 0.0 && rel_cutoff < 1.0)) {
    throw InvalidArgumentError("truncated_pinv: rel_cutoff must lie in (0, 1)");
  }
  const double lambda_max = e.eigenvalues.front();
  if (!(lambda_max > 0.0)) {
    throw DegenerateSpectrumError("truncated_pinv: no positive eigenvalue");
  }
  const double threshold = rel_cutoff * lambda_max;
  Vector w(e.dim(), 0.0);
  std::size_t rank = 0;
  for (std::size_t k = 0; k < e.dim(); ++k) {
    if (e.eigenvalues[k] >= threshold) {
      w[k] = 1.0 / e.eigenvalues[k];
      ++rank;
    }
  }
  return {weighted_projector_sum(e, w), rank};
}

PseudoInverse truncated_pinv(const SymMatrix& m, double rel_cutoff) {
  return truncated_pinv(eigh(m), rel_cutoff);
}

SymMatrix inverse_spd(const SymMatrix& m) {
  const EigenDecomp e = eigh(m);
  if (!(e.eigenvalues.back() > 0.0)) {
    throw DegenerateSpectrumError("inverse_spd: matrix is not positive definite");
  }
  return spectral_map(e, [](double x) { return 1.0 / x; });
}

double min_eigenvalue(const SymMatrix& m) { return eigh(m).eigenvalues.back(); }
double max_eigenvalue(const SymMatrix& m) { return eigh(m).eigenvalues.front(); }

// ---------------------------------------------------------------------------
// Products and norms

double trace(const SymMatrix& m) { return trace(m.matrix()); }

double trace(const Matrix& m) {
  require_same_dim(m.rows(), m.cols(), "trace");
  double t = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) t += m(i, i);
  return t;
}

double trace_product(const SymMatrix& a, const SymMatrix& b) {
  return frobenius_inner(a, b);
}

double frobenius_inner(const SymMatrix& a, const SymMatrix& b) {
  require_same_dim(a.dim(), b.dim(), "frobenius_inner");
  const auto x = a.matrix().data();
  const auto y = b.matrix().data();
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) acc += x[k] * y[k];
  return acc;
}

double frobenius_norm(const SymMatrix& m) { return std::sqrt(frobenius_inner(m, m)); }

double frobenius_dist_sq(const Matrix& a, const Matrix& b) {
  require_same_dim(a.rows(), b.rows(), "frobenius_dist_sq");
  require_same_dim(a.cols(), b.cols(), "frobenius_dist_sq");
  const auto x = a.data();
  const auto y = b.data();
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    acc += d * d;
  }
  return acc;
}

double frobenius_dist_sq(const SymMatrix& a, const SymMatrix& b) {
  require_same_dim(a.dim(), b.dim(), "frobenius_dist_sq");
  return frobenius_dist_sq(a.matrix(), b.matrix());
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require_same_dim(a.cols(), b.rows(), "matmul");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Vector matvec(const Matrix& a, std::span<const double> v) {
  require_same_dim(a.cols(), v.size(), "matvec");
  Vector out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = dot(a.row(i), v);
  return out;
}

Vector matvec(const SymMatrix& a, std::span<const double> v) { return matvec(a.matrix(), v); }

double quadform(const SymMatrix& m, std::span<const double> v) {
  require_same_dim(m.dim(), v.size(), "quadform");
  return dot(v, matvec(m, v));
}

SymMatrix congruence(const Matrix& a, const SymMatrix& m) {
  require_same_dim(a.cols(), m.dim(), "congruence");
  return SymMatrix::symmetrized(matmul(matmul(a, m.matrix()), a.transpose()));
}

double commutator_norm(const SymMatrix& a, const SymMatrix& b) {
  require_same_dim(a.dim(), b.dim(), "commutator_norm");
  const Matrix ab = matmul(a.matrix(), b.matrix());
  return std::sqrt(frobenius_dist_sq(ab, ab.transpose()));
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a.size(), b.size(), "dot");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

double norm_sq(std::span<const double> v) { return dot(v, v); }

SymMatrix outer(std::span<const double> v) {
  SymMatrix m(v.size());
  add_outer(m, v, 1.0);
  return m;
}

void add_outer(SymMatrix& m, std::span<const double> v, double weight) {
  require_same_dim(m.dim(), v.size(), "add_outer");
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double wi = weight * v[i];
    for (std::size_t j = i; j < v.size(); ++j) m.add(i, j, wi * v[j]);
  }
}

}  // namespace infolab
