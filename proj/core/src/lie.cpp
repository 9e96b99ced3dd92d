#include "geoflow/lie.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "geoflow/error.hpp"

namespace geoflow {

namespace {

// Padé(6,6) numerator coefficients; the denominator alternates signs.
constexpr std::array<double, 7> kPade6 = {
    1.0,       1.0 / 2.0,      5.0 / 44.0,       1.0 / 66.0,
    1.0 / 792, 1.0 / 15840.0,  1.0 / 665280.0};

// Scale the argument until ||A||_1 <= this before applying the Padé core.
// The truncation error of Padé(6,6) is then below 1e-16.
constexpr double kPadeRadius = 0.5;

}  // namespace

double ortho_drift(const Matrix& q) {
  return (q * q.transpose() - Matrix::Identity(q.rows(), q.cols())).norm();
}

void require_square_finite(const Matrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << a.rows()
       << "x" << a.cols();
    throw Error(ErrorKind::invalid_argument, os.str());
  }
  if (!a.allFinite()) {
    throw Error(ErrorKind::invalid_argument,
                std::string(what) + ": matrix has non-finite entries");
  }
}

bool is_rotation(const Matrix& m, RotationTolerance tol) {
  if (m.rows() != m.cols() || m.rows() == 0 || !m.allFinite()) return false;
  return ortho_drift(m) <= tol.ortho && std::abs(m.determinant() - 1.0) <= tol.det;
}

RotationMatrix RotationMatrix::identity(int dim) {
  if (dim < 1) throw Error(ErrorKind::invalid_argument, "rotation dimension must be >= 1");
  return RotationMatrix(Matrix::Identity(dim, dim));
}

RotationMatrix RotationMatrix::from_matrix(Matrix m, RotationTolerance tol) {
  require_square_finite(m, "RotationMatrix");
  const double drift = ortho_drift(m);
  const double det = m.determinant();
  if (drift > tol.ortho || std::abs(det - 1.0) > tol.det) {
    std::ostringstream os;
    os.precision(3);
    os << "not a rotation: ||QQ^t - I||_F = " << drift << ", det = " << det;
    throw Error(ErrorKind::invalid_argument, os.str());
  }
  return RotationMatrix(std::move(m));
}

RotationMatrix RotationMatrix::transpose() const {
  return RotationMatrix(m_.transpose());
}

RotationMatrix operator*(const RotationMatrix& a, const RotationMatrix& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::dimension_mismatch, "rotation product: dimensions differ");
  }
  return RotationMatrix(a.m_ * b.m_);
}

SkewMatrix SkewMatrix::zero(int dim) {
  if (dim < 1) throw Error(ErrorKind::invalid_argument, "skew dimension must be >= 1");
  return SkewMatrix(Matrix::Zero(dim, dim));
}

SkewMatrix SkewMatrix::antisymmetric_part_of(const Matrix& a) {
  require_square_finite(a, "SkewMatrix");
  const Eigen::Index n = a.rows();
  Matrix s = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = a(i, j) - a(j, i);
      s(i, j) = v;
      s(j, i) = -v;
    }
  }
  return SkewMatrix(std::move(s));
}

SkewMatrix SkewMatrix::from_upper(const Matrix& upper) {
  require_square_finite(upper, "SkewMatrix");
  const Eigen::Index n = upper.rows();
  Matrix s = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      s(i, j) = upper(i, j);
      s(j, i) = -upper(i, j);
    }
  }
  return SkewMatrix(std::move(s));
}

SkewMatrix SkewMatrix::scaled(double s) const {
  // Scaling by s on both triangles keeps the exact negation.
  return SkewMatrix(m_ * s);
}

Matrix mat_exp(const Matrix& a) {
  require_square_finite(a, "mat_exp");
  const Eigen::Index n = a.rows();

  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > kPadeRadius) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / kPadeRadius)));
  }
  const Matrix x = a / std::ldexp(1.0, squarings);

  const Matrix id = Matrix::Identity(n, n);
  Matrix power = id;
  Matrix even = kPade6[0] * id;
  Matrix odd = Matrix::Zero(n, n);
  for (std::size_t k = 1; k < kPade6.size(); ++k) {
    power = power * x;
    if (k % 2 == 0) {
      even += kPade6[k] * power;
    } else {
      odd += kPade6[k] * power;
    }
  }
  const Matrix numer = even + odd;
  const Matrix denom = even - odd;
  Matrix result = denom.partialPivLu().solve(numer);
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

RotationMatrix exp_skew(const SkewMatrix& a) {
  return RotationMatrix::from_matrix(mat_exp(a.matrix()));
}

SkewMatrix skew_lift(const Matrix& gradient, const RotationMatrix& q) {
  if (gradient.rows() != q.dim() || gradient.cols() != q.dim()) {
    throw Error(ErrorKind::invalid_argument, "skew_lift: gradient and rotation dimensions differ");
  }
  // G Q^t - Q G^t = A - A^t with A = G Q^t.
  return SkewMatrix::antisymmetric_part_of(gradient * q.matrix().transpose());
}

RotationMatrix project_to_rotation(const Matrix& a) {
  require_square_finite(a, "project_to_rotation");
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix polar = svd.matrixU() * svd.matrixV().transpose();
  const double det = polar.determinant();
  if (det < 0.0) {
    throw Error(ErrorKind::corrupted_state,
                "project_to_rotation: nearest orthogonal matrix has determinant -1");
  }
  return RotationMatrix::from_matrix(std::move(polar));
}

RotationMatrix random_rotation(int dim, Rng& rng) {
  if (dim < 1) throw Error(ErrorKind::invalid_argument, "random_rotation: dim must be >= 1");
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = standard_normal(rng);

  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  if (q.determinant() < 0.0) q.row(0) = -q.row(0);
  return RotationMatrix::from_matrix(std::move(q));
}

SkewMatrix random_skew(int dim, Rng& rng) {
  if (dim < 1) throw Error(ErrorKind::invalid_argument, "random_skew: dim must be >= 1");
  Matrix upper = Matrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) upper(i, j) = standard_normal(rng);
  SkewMatrix s = SkewMatrix::from_upper(upper);
  const double norm = s.norm();
  return norm > 0.0 ? s.scaled(1.0 / norm) : s;
}

}  // namespace geoflow
