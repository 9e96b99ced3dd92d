#include "geoflow/objective.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "geoflow/error.hpp"
#include "parallel.hpp"

namespace geoflow {

NoiseLevel NoiseLevel::from_n0(double n0) {
  if (!(n0 > 0.0) || !std::isfinite(n0)) {
    throw Error(ErrorKind::invalid_argument, "noise level N0 must be finite and > 0");
  }
  return NoiseLevel(n0);
}

NoiseLevel NoiseLevel::from_snr_db(double snr_db) {
  if (!std::isfinite(snr_db)) throw Error(ErrorKind::invalid_argument, "SNR must be finite");
  return from_n0(std::pow(10.0, -snr_db / 10.0));
}

double NoiseLevel::snr_db() const { return 10.0 * std::log10(1.0 / n0_); }

PairDiffCache::PairDiffCache(const Constellation& c) {
  const long k = c.size();
  diffs_.resize(k * (k - 1) / 2, c.dim());
  const Matrix& p = c.points();
  long row = 0;
  for (long a = 0; a < k; ++a)
    for (long b = a + 1; b < k; ++b) diffs_.row(row++) = p.row(a) - p.row(b);
}

PepObjective::PepObjective(const Constellation& c, NoiseLevel noise, EvalOptions options)
    : cache_(c), noise_(noise), options_(options) {
  if (options_.partitions < 1) {
    throw Error(ErrorKind::invalid_argument, "objective partition count must be >= 1");
  }
  if (options_.threads < 1) options_.threads = 1;
}

void PepObjective::check_dim(const Matrix& q) const {
  if (q.rows() != dim() || q.cols() != dim()) {
    throw Error(ErrorKind::dimension_mismatch,
                "objective: matrix is " + std::to_string(q.rows()) + "x" +
                    std::to_string(q.cols()) + ", constellation dimension is " +
                    std::to_string(dim()));
  }
}

double PepObjective::value(const Matrix& q) const {
  check_dim(q);
  const double s = 1.0 / (8.0 * noise_.n0());
  const int parts = options_.partitions;
  std::vector<double> partial(parts, 0.0);
  detail::for_each_partition(parts, options_.threads, [&](int p) {
    const auto [begin, end] = detail::partition_bounds(pair_count(), parts, p);
    if (end <= begin) return;
    const Matrix qd = cache_.diffs().middleRows(begin, end - begin) * q.transpose();
    const Eigen::ArrayXXd g = (1.0 + s * qd.array().square()).inverse();
    partial[p] = g.rowwise().prod().sum();
  });
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

ValueAndGradient PepObjective::value_and_gradient(const Matrix& q) const {
  check_dim(q);
  const double s = 1.0 / (8.0 * noise_.n0());
  const int parts = options_.partitions;
  const int n = dim();
  std::vector<double> partial(parts, 0.0);
  std::vector<Matrix> partial_grad(parts, Matrix::Zero(n, n));
  detail::for_each_partition(parts, options_.threads, [&](int p) {
    const auto [begin, end] = detail::partition_bounds(pair_count(), parts, p);
    if (end <= begin) return;
    const auto block = cache_.diffs().middleRows(begin, end - begin);
    const Matrix qd = block * q.transpose();
    const Eigen::ArrayXXd g = (1.0 + s * qd.array().square()).inverse();
    const Eigen::ArrayXd t = g.rowwise().prod();
    partial[p] = t.sum();
    // d/dQ_ij of prod_l g_l(Qd) = T * g_i * (-2 s (Qd)_i) * d_j
    Eigen::ArrayXXd w = (-2.0 * s) * qd.array() * g;
    w.colwise() *= t;
    partial_grad[p].noalias() = w.matrix().transpose() * block;
  });
  ValueAndGradient out{0.0, Matrix::Zero(n, n)};
  for (int p = 0; p < parts; ++p) {
    out.value += partial[p];
    out.gradient += partial_grad[p];
  }
  return out;
}

Matrix PepObjective::gradient(const Matrix& q) const { return value_and_gradient(q).gradient; }

Matrix PepObjective::gradient_fd(const Matrix& q, double delta) const {
  check_dim(q);
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorKind::invalid_argument, "finite-difference delta must be > 0");
  }
  const int n = dim();
  Matrix grad(n, n);
  Matrix probe = q;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      probe(i, j) = q(i, j) + delta;
      const double up = value(probe);
      probe(i, j) = q(i, j) - delta;
      const double down = value(probe);
      probe(i, j) = q(i, j);
      grad(i, j) = (up - down) / (2.0 * delta);
    }
  }
  return grad;
}

double pep_bound(const Constellation& c, const RotationMatrix& q, NoiseLevel noise) {
  return PepObjective(c, noise).value(q.matrix());
}

double pep_bound_sum(const Constellation& c, const Matrix& q, NoiseLevel noise, PairSum sum) {
  if (q.rows() != c.dim() || q.cols() != c.dim()) {
    throw Error(ErrorKind::dimension_mismatch, "pep_bound_sum: dimension mismatch");
  }
  const Matrix pts = c.points() * q.transpose();
  const double denom = 8.0 * noise.n0();
  double total = 0.0;
  for (int a = 0; a < c.size(); ++a) {
    const int b0 = sum == PairSum::unordered ? a + 1 : 0;
    for (int b = b0; b < c.size(); ++b) {
      if (a == b && sum != PairSum::literal) continue;
      double term = 1.0;
      for (int i = 0; i < c.dim(); ++i) {
        const double d = pts(a, i) - pts(b, i);
        term /= 1.0 + d * d / denom;
      }
      total += term;
    }
  }
  return total;
}

Matrix pep_gradient_analytic(const Constellation& c, const RotationMatrix& q, NoiseLevel noise) {
  if (c.dim() != q.dim()) throw Error(ErrorKind::dimension_mismatch, "pep_gradient_analytic: dimension mismatch");
  return PepObjective(c, noise).gradient(q.matrix());
}

Matrix pep_gradient_fd(const Constellation& c, const RotationMatrix& q, NoiseLevel noise,
                       double delta) {
  if (c.dim() != q.dim()) throw Error(ErrorKind::dimension_mismatch, "pep_gradient_fd: dimension mismatch");
  return PepObjective(c, noise).gradient_fd(q.matrix(), delta);
}

}  // namespace geoflow
