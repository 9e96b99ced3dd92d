#include "geoflow/cyclotomic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <vector>

#include "geoflow/error.hpp"

namespace geoflow {

namespace {

constexpr double kOrthoTol = 1e-9;
constexpr int kMaxDiversityDegree = 10;

bool is_prime(int m) {
  if (m < 2) return false;
  for (int d = 2; d * d <= m; ++d)
    if (m % d == 0) return false;
  return true;
}

Matrix canonicalize(Matrix m) {
  const Eigen::Index n = m.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(m(i, j)) > 1e-12) {
        if (m(i, j) < 0.0) m.row(i) = -m.row(i);
        break;
      }
    }
  }
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&m](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(a, j) != m(b, j)) return m(a, j) < m(b, j);
    }
    return false;
  });
  Matrix sorted(n, n);
  for (Eigen::Index i = 0; i < n; ++i) sorted.row(i) = m.row(order[i]);
  if (sorted.determinant() < 0.0) sorted.row(n - 1) = -sorted.row(n - 1);
  return sorted;
}

// Minimum over nonzero d in {-1,0,1}^n (up to sign) of prod |(M d)_i|,
// i.e. the product distance of the rotated hypercube up to the factor 2^n.
double diversity_of(const Matrix& m) {
  const int n = static_cast<int>(m.rows());
  int total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  double best = std::numeric_limits<double>::infinity();
  Vector d(n);
  // codes c and total-1-c are negations of each other; (total-1)/2 is zero
  for (int code = 0; code < (total - 1) / 2; ++code) {
    int rem = code;
    for (int i = 0; i < n; ++i) {
      d(i) = static_cast<double>(rem % 3) - 1.0;
      rem /= 3;
    }
    const Vector md = m * d;
    best = std::min(best, md.cwiseAbs().prod() * std::pow(2.0, n));
  }
  return best;
}

// Golden data exactly as printed (4 decimals).
constexpr std::array<std::string_view, 5> kM11 = {
    "-0.1698 -0.3260 -0.4557 -0.5485 -0.5968",
    "-0.4557 -0.5968 -0.3260 0.1698 0.5485",
    "-0.5968 -0.1698 0.5485 0.3260 -0.4557",
    "-0.5485 0.4557 0.1698 -0.5968 0.3260",
    "-0.3260 0.5485 -0.5968 0.4557 -0.1698",
};

constexpr std::array<std::string_view, 5> kQ30dB5D = {
    "0.5842 -0.1856 0.3296 0.5550 0.4556",
    "-0.4556 0.5842 -0.1856 0.3296 0.5550",
    "-0.5550 -0.4556 0.5842 -0.1856 0.3296",
    "-0.3296 -0.5550 -0.4556 0.5842 -0.1856",
    "0.1856 -0.3296 -0.5550 -0.4556 0.5842",
};

constexpr std::array<std::string_view, 4> kQ24dB4D = {
    "0.6253 0.1854 0.3542 0.6702",
    "-0.6702 0.6253 0.1854 0.3542",
    "-0.3542 -0.6702 0.6253 0.1854",
    "-0.1854 -0.3542 -0.6702 0.6253",
};

template <std::size_t N>
Matrix parse_rows(const std::array<std::string_view, N>& rows) {
  Matrix m(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  for (std::size_t i = 0; i < N; ++i) {
    std::istringstream is{std::string(rows[i])};
    for (std::size_t j = 0; j < N; ++j) is >> m(i, j);
  }
  return m;
}

template <std::size_t N>
std::string rows_text(const std::array<std::string_view, N>& rows) {
  std::string out = std::to_string(N) + "\n";
  for (auto r : rows) {
    out += r;
    out += '\n';
  }
  return out;
}

}  // namespace

CyclotomicSpec::CyclotomicSpec(int m) : m_(m) {
  if (m < 5 || m > 64 || !is_prime(m)) {
    throw Error(ErrorKind::invalid_argument,
                "cyclotomic conductor m must be a prime in [5, 64], got " + std::to_string(m));
  }
}

std::string_view to_string(IntegralBasis basis) {
  switch (basis) {
    case IntegralBasis::symmetric_powers: return "symmetric_powers";
    case IntegralBasis::power_basis: return "power_basis";
    case IntegralBasis::suffix_sums: return "suffix_sums";
  }
  return "unknown";
}

Matrix twisted_embedding(const CyclotomicSpec& spec, IntegralBasis basis) {
  const int m = spec.conductor();
  const int n = spec.degree();
  const double w = 2.0 * std::numbers::pi / m;

  // embed(j, k) = sigma_k(e_j) for the symmetric basis, j, k = 1..n.
  Matrix embed(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) embed(j, k) = 2.0 * std::cos(w * (j + 1) * (k + 1));

  Matrix e(n, n);
  switch (basis) {
    case IntegralBasis::symmetric_powers:
      e = embed;
      break;
    case IntegralBasis::power_basis:
      for (int k = 0; k < n; ++k) {
        const double theta = 2.0 * std::cos(w * (k + 1));
        double p = 1.0;
        for (int j = 0; j < n; ++j, p *= theta) e(j, k) = p;
      }
      break;
    case IntegralBasis::suffix_sums:
      for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int j = n - 1; j >= 0; --j) {
          acc += embed(j, k);
          e(j, k) = acc;
        }
      }
      break;
  }

  Matrix out(n, n);
  for (int k = 0; k < n; ++k) {
    const double twist = 2.0 - 2.0 * std::cos(w * (k + 1));
    out.col(k) = std::sqrt(twist / m) * e.col(k);
  }
  return out;
}

GeneratorMatrix build_generator(const CyclotomicSpec& spec) {
  std::ostringstream failures;
  failures.precision(3);
  for (IntegralBasis basis : {IntegralBasis::symmetric_powers, IntegralBasis::power_basis,
                              IntegralBasis::suffix_sums}) {
    const Matrix raw = twisted_embedding(spec, basis);
    const double residual = ortho_drift(raw);
    if (residual > kOrthoTol) {
      failures << ' ' << to_string(basis) << "=" << residual;
      continue;
    }
    RotationMatrix rot = RotationMatrix::from_matrix(canonicalize(raw));
    std::optional<double> diversity;
    if (spec.degree() <= kMaxDiversityDegree) {
      diversity = diversity_of(rot.matrix());
      if (!(*diversity > 0.0)) {
        throw Error(ErrorKind::construction_failed,
                    "cyclotomic generator for m=" + std::to_string(spec.conductor()) +
                        " is not fully diverse");
      }
    }
    return GeneratorMatrix{spec, std::move(rot), basis, residual, diversity};
  }
  throw Error(ErrorKind::construction_failed,
              "cyclotomic generator for m=" + std::to_string(spec.conductor()) +
                  " failed orthonormality; residuals ||MM^t - I||_F:" + failures.str());
}

Matrix golden_matrix(GoldenMatrix which) {
  switch (which) {
    case GoldenMatrix::M11: return parse_rows(kM11);
    case GoldenMatrix::Q30dB_5D: return parse_rows(kQ30dB5D);
    case GoldenMatrix::Q24dB_4D: return parse_rows(kQ24dB4D);
  }
  throw Error(ErrorKind::invalid_argument, "unknown golden matrix");
}

RotationMatrix golden_rotation(GoldenMatrix which) {
  Matrix m = golden_matrix(which);
  if (m.determinant() < 0.0) m.row(m.rows() - 1) = -m.row(m.rows() - 1);
  return project_to_rotation(m);
}

std::string golden_text(GoldenMatrix which) {
  switch (which) {
    case GoldenMatrix::M11: return rows_text(kM11);
    case GoldenMatrix::Q30dB_5D: return rows_text(kQ30dB5D);
    case GoldenMatrix::Q24dB_4D: return rows_text(kQ24dB4D);
  }
  throw Error(ErrorKind::invalid_argument, "unknown golden matrix");
}

std::string_view golden_name(GoldenMatrix which) {
  switch (which) {
    case GoldenMatrix::M11: return "M11";
    case GoldenMatrix::Q30dB_5D: return "Q30dB_5D";
    case GoldenMatrix::Q24dB_4D: return "Q24dB_4D";
  }
  return "unknown";
}

std::optional<GoldenMatrix> parse_golden_name(std::string_view name) {
  for (GoldenMatrix g : {GoldenMatrix::M11, GoldenMatrix::Q30dB_5D, GoldenMatrix::Q24dB_4D}) {
    if (golden_name(g) == name) return g;
  }
  return std::nullopt;
}

}  // namespace geoflow
