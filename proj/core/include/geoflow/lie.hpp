#pragma once

// Linear algebra on the rotation group SO(n) and its Lie algebra so(n).
//
// Matrices act on column vectors from the left (x -> Q x). Plain
// Eigen::MatrixXd plays the role of an arbitrary square matrix; the two
// wrappers below carry the group and algebra invariants.

#include <Eigen/Dense>

#include "geoflow/rng.hpp"

namespace geoflow {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct RotationTolerance {
  double ortho = 1e-9;  ///< bound on ||Q Q^t - I||_F
  double det = 1e-9;    ///< bound on |det Q - 1|
};

/// Frobenius norm of Q Q^t - I.
double ortho_drift(const Matrix& q);

/// Throws unless `a` is square with finite entries.
void require_square_finite(const Matrix& a, const char* what);

/// An element of SO(n). Construction always validates the invariants.
class RotationMatrix {
 public:
  static RotationMatrix identity(int dim);

  /// Validates `m` against `tol`; throws Error(invalid_argument) otherwise.
  static RotationMatrix from_matrix(Matrix m, RotationTolerance tol = {});

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const noexcept { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  RotationMatrix transpose() const;
  double drift() const { return ortho_drift(m_); }

  friend RotationMatrix operator*(const RotationMatrix& a,
                                  const RotationMatrix& b);

 private:
  explicit RotationMatrix(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

bool is_rotation(const Matrix& m, RotationTolerance tol = {});

/// An element of so(n). Only the antisymmetrizing constructors exist, so
/// A^t = -A holds bit-exactly for every instance.
class SkewMatrix {
 public:
  static SkewMatrix zero(int dim);

  /// Returns a - a^t. Entry (j,i) is stored as the negation of entry (i,j).
  static SkewMatrix antisymmetric_part_of(const Matrix& a);

  /// Frees the strict upper triangle of `upper`; the rest is ignored.
  static SkewMatrix from_upper(const Matrix& upper);

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const noexcept { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }
  double norm() const { return m_.norm(); }

  SkewMatrix scaled(double s) const;

 private:
  explicit SkewMatrix(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

/// Matrix exponential by scaling and squaring around a Padé(6,6) core.
Matrix mat_exp(const Matrix& a);

/// exp of a skew matrix, returned as a validated rotation.
RotationMatrix exp_skew(const SkewMatrix& a);

/// r = G Q^t - Q G^t, the gradient lifted to the Lie algebra.
SkewMatrix skew_lift(const Matrix& gradient, const RotationMatrix& q);

/// Nearest orthogonal matrix (polar factor). Throws
/// Error(corrupted_state) if that factor has determinant -1.
RotationMatrix project_to_rotation(const Matrix& a);

/// Haar-distributed rotation: QR of a Gaussian matrix with the sign
/// convention diag(R) > 0, then one row flipped if det = -1.
RotationMatrix random_rotation(int dim, Rng& rng);

/// Random skew matrix with unit Frobenius norm (zero matrix for dim 1).
SkewMatrix random_skew(int dim, Rng& rng);

}  // namespace geoflow
