#include "geoflow/constellation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "geoflow/error.hpp"
#include "geoflow/matrix_io.hpp"

namespace geoflow {

namespace {

bool row_less(const Matrix& p, int a, int b) {
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    if (p(a, j) < p(b, j)) return true;
    if (p(a, j) > p(b, j)) return false;
  }
  return false;
}

Matrix cartesian_power(const std::vector<double>& levels, int dim) {
  const int base = static_cast<int>(levels.size());
  int count = 1;
  for (int i = 0; i < dim; ++i) count *= base;
  Matrix pts(count, dim);
  for (int k = 0; k < count; ++k) {
    int rem = k;
    // Last coordinate varies fastest: lexicographic order.
    for (int j = dim - 1; j >= 0; --j) {
      pts(k, j) = levels[rem % base];
      rem /= base;
    }
  }
  return pts;
}

Constellation finish(Matrix pts, Normalization norm) {
  Constellation c(std::move(pts));
  return norm == Normalization::unit_energy ? c.normalized() : c;
}

double sign_of(double v) { return v < 0.0 ? -1.0 : 1.0; }

struct Candidate {
  double score;
  int from;
  int to;
};

// Greedy one-to-one assignment on a score matrix (higher is better).
// Returns match[to] = from. Ties are broken by (to, from) order.
std::vector<int> greedy_assign(const Matrix& score) {
  const int n = static_cast<int>(score.rows());
  std::vector<Candidate> cands;
  cands.reserve(static_cast<std::size_t>(n) * n);
  for (int f = 0; f < n; ++f)
    for (int t = 0; t < n; ++t) cands.push_back({score(f, t), f, t});
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& x, const Candidate& y) { return x.score > y.score; });
  std::vector<int> match(n, -1);
  std::vector<bool> used(n, false);
  for (const auto& c : cands) {
    if (match[c.to] != -1 || used[c.from]) continue;
    match[c.to] = c.from;
    used[c.from] = true;
  }
  return match;
}

// Rows of `a` reordered and signed to best correlate with rows of `b`.
Matrix match_rows(const Matrix& a, const Matrix& b) {
  const Matrix corr = a * b.transpose();
  const std::vector<int> match = greedy_assign(corr.cwiseAbs());
  Matrix out(a.rows(), a.cols());
  for (int l = 0; l < static_cast<int>(match.size()); ++l) {
    out.row(l) = sign_of(corr(match[l], l)) * a.row(match[l]);
  }
  return out;
}

Matrix match_cols(const Matrix& a, const Matrix& b) {
  return match_rows(a.transpose(), b.transpose()).transpose();
}

SignedPermutationMatch make_match(Matrix aligned, const Matrix& b) {
  const Matrix diff = aligned - b;
  return {std::move(aligned), diff.norm(), diff.cwiseAbs().maxCoeff()};
}

SignedPermutationMatch align_greedy(const Matrix& a, const Matrix& b) {
  const int n = static_cast<int>(a.rows());
  std::optional<SignedPermutationMatch> best;
  auto consider = [&](Matrix m) {
    auto cand = make_match(std::move(m), b);
    if (!best || cand.frobenius < best->frobenius) best = std::move(cand);
  };

  for (int ra = 0; ra < n; ++ra) {
    for (int rb = 0; rb < n; ++rb) {
      // Column signed permutation read off the anchor rows' magnitudes.
      Matrix score(n, n);
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
          score(k, j) = -std::abs(std::abs(a(ra, k)) - std::abs(b(rb, j)));
      const std::vector<int> col = greedy_assign(score);
      Matrix as(n, n);
      for (int j = 0; j < n; ++j) {
        as.col(j) = sign_of(a(ra, col[j]) * b(rb, j)) * a.col(col[j]);
      }
      Matrix aligned = match_rows(as, b);
      consider(aligned);
      // One refinement sweep: re-match columns given the row matching.
      Matrix refined = match_rows(match_cols(aligned, b), b);
      consider(std::move(refined));
    }
  }
  return std::move(*best);
}

SignedPermutationMatch align_exhaustive(const Matrix& a, const Matrix& b) {
  const int n = static_cast<int>(a.rows());
  std::vector<int> col(n);
  std::iota(col.begin(), col.end(), 0);
  double best_score = -std::numeric_limits<double>::infinity();
  Matrix best_aligned;

  // ||P a S - b||^2 = ||a||^2 + ||b||^2 - 2 <P a S, b>, so maximize the
  // correlation over all row permutations with optimal row signs.
  do {
    for (int signs = 0; signs < (1 << n); ++signs) {
      Matrix as(n, n);
      for (int j = 0; j < n; ++j) {
        as.col(j) = ((signs >> j) & 1 ? -1.0 : 1.0) * a.col(col[j]);
      }
      const Matrix corr = as * b.transpose();
      std::vector<int> row(n);
      std::iota(row.begin(), row.end(), 0);
      do {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += std::abs(corr(row[l], l));
        if (s > best_score) {
          best_score = s;
          best_aligned.resize(n, n);
          for (int l = 0; l < n; ++l) {
            best_aligned.row(l) = sign_of(corr(row[l], l)) * as.row(row[l]);
          }
        }
      } while (std::next_permutation(row.begin(), row.end()));
    }
  } while (std::next_permutation(col.begin(), col.end()));
  return make_match(std::move(best_aligned), b);
}

}  // namespace

Constellation::Constellation(Matrix points) : points_(std::move(points)) {
  if (points_.rows() == 0 || points_.cols() == 0) {
    throw Error(ErrorKind::invalid_argument, "constellation must have at least one point of dimension >= 1");
  }
  if (!points_.allFinite()) {
    throw Error(ErrorKind::invalid_argument, "constellation has non-finite coordinates");
  }
  std::vector<int> order(points_.rows());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [this](int a, int b) { return row_less(points_, a, b); });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (!row_less(points_, order[i - 1], order[i])) {
      throw Error(ErrorKind::duplicate_point,
                  "constellation points " + std::to_string(std::min(order[i - 1], order[i])) +
                      " and " + std::to_string(std::max(order[i - 1], order[i])) +
                      " coincide");
    }
  }
}

double Constellation::energy() const {
  return points_.rowwise().squaredNorm().mean();
}

Constellation Constellation::normalized() const {
  const double es = energy();
  if (!(es > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "cannot normalize a zero-energy constellation");
  }
  return Constellation(points_ / std::sqrt(es));
}

double Constellation::min_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < size(); ++a)
    for (int b = a + 1; b < size(); ++b)
      best = std::min(best, (points_.row(a) - points_.row(b)).norm());
  return best;
}

NuqamParams::NuqamParams(double gamma) : gamma_(gamma) {
  if (!(gamma > 1.0) || !std::isfinite(gamma)) {
    throw Error(ErrorKind::invalid_argument, "NUQAM gamma must be a finite value > 1");
  }
}

DvbRotationParam::DvbRotationParam(double r) : r_(r) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw Error(ErrorKind::invalid_argument, "DVB rotation parameter r must lie in [0, 1]");
  }
}

Constellation make_hypercube(int dim, Normalization norm) {
  if (dim < 1) throw Error(ErrorKind::invalid_argument, "hypercube dimension must be >= 1");
  if (dim > kMaxHypercubeDim) {
    throw Error(ErrorKind::size_limit, "hypercube dimension " + std::to_string(dim) +
                                           " exceeds the limit of " +
                                           std::to_string(kMaxHypercubeDim));
  }
  return finish(cartesian_power({-1.0, 1.0}, dim), norm);
}

Constellation make_nuqam16(const NuqamParams& params, Normalization norm) {
  const double g = params.gamma();
  return finish(cartesian_power({-g, -1.0, 1.0, g}, 2), norm);
}

Constellation make_qam(int order, Normalization norm) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
  if (order < 4 || side * side != order || side > 256) {
    throw Error(ErrorKind::invalid_argument,
                "QAM order must be a perfect square between 4 and 65536");
  }
  std::vector<double> levels(side);
  for (int i = 0; i < side; ++i) levels[i] = 2.0 * i - (side - 1);
  return finish(cartesian_power(levels, 2), norm);
}

Constellation rotate(const Constellation& c, const RotationMatrix& q) {
  if (c.dim() != q.dim()) {
    throw Error(ErrorKind::invalid_argument, "rotate: constellation dimension " +
                                                 std::to_string(c.dim()) +
                                                 " differs from rotation dimension " +
                                                 std::to_string(q.dim()));
  }
  return Constellation(c.points() * q.matrix().transpose());
}

Constellation transform(const Constellation& c, const Matrix& m) {
  if (m.rows() != c.dim() || m.cols() != c.dim()) {
    throw Error(ErrorKind::invalid_argument, "transform: dimension mismatch");
  }
  return Constellation(c.points() * m.transpose());
}

RotationMatrix make_rotation_2d(double theta) {
  Matrix m(2, 2);
  m << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return RotationMatrix::from_matrix(std::move(m));
}

double degrees_to_radians(double deg) { return deg * std::numbers::pi / 180.0; }

RotationMatrix make_dvb_rotation_4d(const DvbRotationParam& param) {
  const double r = param.r();
  const double a = std::sqrt(1.0 / (1.0 + r));
  const double b = std::sqrt(r / (3.0 * (1.0 + r)));
  Matrix m(4, 4);
  m << a, -b, -b, -b,
       b,  a, -b,  b,
       b,  b,  a, -b,
       b, -b,  b,  a;
  return RotationMatrix::from_matrix(std::move(m));
}

Matrix make_signed_circulant_4d(double a, double b, double c, double d) {
  Matrix m(4, 4);
  m <<  a,  b,  c, d,
       -d,  a,  b, c,
       -c, -d,  a, b,
       -b, -c, -d, a;
  return m;
}

ProductDistance min_product_distance(const Constellation& c, double coord_tol) {
  if (c.size() < 2) {
    throw Error(ErrorKind::invalid_argument, "min_product_distance needs at least two points");
  }
  const Matrix& p = c.points();
  ProductDistance best{std::numeric_limits<double>::infinity(), 0, 1};
  for (int a = 0; a < c.size(); ++a) {
    for (int b = a + 1; b < c.size(); ++b) {
      double prod = 1.0;
      for (int i = 0; i < c.dim(); ++i) {
        const double d = std::abs(p(a, i) - p(b, i));
        if (d > coord_tol) prod *= d;
      }
      if (prod < best.value) best = {prod, a, b};
    }
  }
  return best;
}

SignedPermutationMatch align_signed_permutation(const Matrix& a, const Matrix& b,
                                                MatchSearch search) {
  require_square_finite(a, "signed_permutation_distance");
  require_square_finite(b, "signed_permutation_distance");
  if (a.rows() != b.rows()) {
    throw Error(ErrorKind::dimension_mismatch, "signed_permutation_distance: dimensions differ");
  }
  if (a.rows() > 8) {
    throw Error(ErrorKind::size_limit, "signed_permutation_distance supports n <= 8");
  }
  if (search == MatchSearch::exhaustive) {
    if (a.rows() > 5) {
      throw Error(ErrorKind::size_limit, "exhaustive signed permutation search supports n <= 5");
    }
    return align_exhaustive(a, b);
  }
  return align_greedy(a, b);
}

double signed_permutation_distance(const Matrix& a, const Matrix& b, MatchSearch search) {
  return align_signed_permutation(a, b, search).frobenius;
}

void write_constellation(std::ostream& os, const Constellation& c) {
  os << "# dim=" << c.dim() << " points=" << c.size() << '\n';
  for (int k = 0; k < c.size(); ++k) {
    for (int j = 0; j < c.dim(); ++j) {
      if (j > 0) os << ' ';
      os << format_double(c.points()(k, j));
    }
    os << '\n';
  }
}

Constellation read_constellation(std::istream& is) {
  std::string line;
  int lineno = 0;
  int dim = -1;
  int count = -1;
  std::vector<std::vector<double>> rows;

  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      if (dim < 0) {
        int d = 0, k = 0;
        char tail = 0;
        if (std::sscanf(line.c_str() + first, "# dim=%d points=%d %c", &d, &k, &tail) != 2 ||
            d < 1 || k < 1) {
          throw ParseError("expected header '# dim=<n> points=<K>'", lineno, static_cast<int>(first) + 1);
        }
        dim = d;
        count = k;
      }
      continue;
    }
    if (dim < 0) throw ParseError("missing '# dim=<n> points=<K>' header", lineno, 1);

    std::vector<double> row;
    std::size_t i = first;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      if (i >= line.size()) break;
      const std::size_t start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
      const char* b = line.data() + start;
      const char* e = line.data() + i;
      if (*b == '+') ++b;
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(b, e, v);
      if (ec != std::errc() || ptr != e) {
        throw ParseError("expected a decimal number, got '" + line.substr(start, i - start) + "'",
                         lineno, static_cast<int>(start) + 1);
      }
      row.push_back(v);
    }
    if (static_cast<int>(row.size()) != dim) {
      throw Error(ErrorKind::dimension_mismatch,
                  "line " + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                      " coordinates, got " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (dim < 0) throw ParseError("empty constellation file", lineno + 1, 1);
  if (static_cast<int>(rows.size()) != count) {
    throw ParseError("header declares " + std::to_string(count) + " points, file has " +
                         std::to_string(rows.size()),
                     lineno, 1);
  }
  Matrix pts(count, dim);
  for (int k = 0; k < count; ++k)
    for (int j = 0; j < dim; ++j) pts(k, j) = rows[k][j];
  return Constellation(std::move(pts));
}

void save_constellation(const Constellation& c, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::invalid_argument, "cannot write " + path.string());
  write_constellation(os, c);
}

Constellation load_constellation(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::invalid_argument, "cannot read " + path.string());
  return read_constellation(is);
}

}  // namespace geoflow
