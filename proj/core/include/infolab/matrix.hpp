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

#ifndef INFOLAB_MATRIX_HPP
#define INFOLAB_MATRIX_HPP

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace infolab {

using Vector = std::vector<double>;

/// Eigenvalues strictly below this fraction of the largest eigenvalue are
/// discarded by `truncated_pinv`.
inline constexpr double kDefaultRelCutoff = 1e-3;

/// Dense row-major real matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * cols_, cols_);
  }

  Matrix transpose() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);

/// Dense real symmetric matrix. Every mutation writes both (i, j) and
/// (j, i), so `m(i, j) == m(j, i)` holds bit-for-bit.
///
/// A default-constructed SymMatrix is empty (dim 0) and only useful as a
/// placeholder; every factory requires dim >= 1.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim);

  static SymMatrix identity(std::size_t dim);
  static SymMatrix diagonal(std::span<const double> diag);
  static SymMatrix diagonal(std::initializer_list<double> diag);
  /// Rows must be exactly symmetric.
  static SymMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  /// Accepts `m` if |m_ij - m_ji| <= tol * (1 + max|m|) and stores the
  /// averaged value; throws otherwise.
  static SymMatrix from_matrix(const Matrix& m, double tol = 0.0);
  /// Returns (m + m^T) / 2 for any square `m`.
  static SymMatrix symmetrized(const Matrix& m);

  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return dim_ == 0; }

  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  void set(std::size_t i, std::size_t j, double v);
  void add(std::size_t i, std::size_t j, double v);

  const Matrix& matrix() const noexcept { return m_; }
  Vector diag() const;
  bool is_diagonal(double tol = 0.0) const;

  SymMatrix& operator+=(const SymMatrix& other);
  SymMatrix& operator-=(const SymMatrix& other);
  SymMatrix& operator*=(double s);

  friend bool operator==(const SymMatrix& a, const SymMatrix& b);

 private:
  std::size_t dim_ = 0;
  Matrix m_;
};

SymMatrix operator+(SymMatrix a, const SymMatrix& b);
SymMatrix operator-(SymMatrix a, const SymMatrix& b);
SymMatrix operator*(double s, SymMatrix a);

/// Spectral decomposition m = V diag(eigenvalues) V^T.
///
/// Eigenvalues are sorted in descending order; column k of `eigenvectors`
/// pairs with eigenvalue k. Each eigenvector is signed so that its
/// largest-magnitude component is positive.
struct EigenDecomp {
  Vector eigenvalues;
  Matrix eigenvectors;

  std::size_t dim() const noexcept { return eigenvalues.size(); }
};

struct JacobiOptions {
  int max_sweeps = 100;
};

/// Cyclic Jacobi eigensolver. Throws NumericalError on non-finite input or
/// if the off-diagonal mass has not vanished after `max_sweeps` sweeps.
EigenDecomp eigh(const SymMatrix& m, JacobiOptions options = {});

SymMatrix reconstruct(const EigenDecomp& e);

struct PseudoInverse {
  SymMatrix inverse;
  std::size_t rank = 0;
};

/// Pseudo-inverse over the eigenvalues lambda >= rel_cutoff * lambda_max;
/// anything strictly smaller (including every non-positive eigenvalue) is
/// dropped.
PseudoInverse truncated_pinv(const SymMatrix& m, double rel_cutoff = kDefaultRelCutoff);
PseudoInverse truncated_pinv(const EigenDecomp& e, double rel_cutoff = kDefaultRelCutoff);

/// Exact inverse of a symmetric positive definite matrix.
SymMatrix inverse_spd(const SymMatrix& m);

/// Applies `f` to the spectrum: V diag(f(lambda)) V^T.
SymMatrix spectral_map(const SymMatrix& m, const std::function<double(double)>& f);
SymMatrix spectral_map(const EigenDecomp& e, const std::function<double(double)>& f);

double min_eigenvalue(const SymMatrix& m);
double max_eigenvalue(const SymMatrix& m);

double trace(const SymMatrix& m);
double trace(const Matrix& m);
/// Tr(a b) without forming the product.
double trace_product(const SymMatrix& a, const SymMatrix& b);

double frobenius_inner(const SymMatrix& a, const SymMatrix& b);
double frobenius_norm(const SymMatrix& m);
double frobenius_dist_sq(const SymMatrix& a, const SymMatrix& b);
double frobenius_dist_sq(const Matrix& a, const Matrix& b);

Matrix matmul(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, std::span<const double> v);
Vector matvec(const SymMatrix& a, std::span<const double> v);
double quadform(const SymMatrix& m, std::span<const double> v);

/// a m a^T, symmetrized to absorb rounding.
SymMatrix congruence(const Matrix& a, const SymMatrix& m);

/// ||a b - b a||_F.
double commutator_norm(const SymMatrix& a, const SymMatrix& b);

double dot(std::span<const double> a, std::span<const double> b);
double norm_sq(std::span<const double> v);
SymMatrix outer(std::span<const double> v);
/// m += weight * v v^T.
void add_outer(SymMatrix& m, std::span<const double> v, double weight = 1.0);

}  // namespace infolab

#endif  // INFOLAB_MATRIX_HPP
