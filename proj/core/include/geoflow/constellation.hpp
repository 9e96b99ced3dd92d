#pragma once

// Finite constellations in R^n: builders, normalization, rotation, and the
// product-distance diagnostics used to compare rotations.

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "geoflow/lie.hpp"

namespace geoflow {

/// K distinct points of R^n, stored one point per row of a K x n matrix.
class Constellation {
 public:
  /// Throws on an empty set, non-finite coordinates, or repeated points.
  explicit Constellation(Matrix points);

  int dim() const noexcept { return static_cast<int>(points_.cols()); }
  int size() const noexcept { return static_cast<int>(points_.rows()); }
  const Matrix& points() const noexcept { return points_; }
  Vector point(int k) const { return points_.row(k).transpose(); }

  /// Mean squared norm E_s over the points.
  double energy() const;

  /// Scaled copy with unit average energy.
  Constellation normalized() const;

  /// Smallest pairwise Euclidean distance (infinity for one point).
  double min_distance() const;

 private:
  Matrix points_;
};

enum class Normalization { unit_energy, raw };

class NuqamParams {
 public:
  explicit NuqamParams(double gamma);
  double gamma() const noexcept { return gamma_; }

 private:
  double gamma_;
};

class DvbRotationParam {
 public:
  explicit DvbRotationParam(double r);
  double r() const noexcept { return r_; }

 private:
  double r_;
};

inline constexpr int kMaxHypercubeDim = 16;

/// {+-1}^dim in lexicographic order with -1 before +1.
Constellation make_hypercube(int dim, Normalization norm = Normalization::unit_energy);

/// 16 points {+-1, +-gamma}^2, lexicographic over (-gamma, -1, 1, gamma).
Constellation make_nuqam16(const NuqamParams& params,
                           Normalization norm = Normalization::unit_energy);

/// Square uniform QAM with `order` = L^2 points on the odd-integer grid.
Constellation make_qam(int order, Normalization norm = Normalization::unit_energy);

/// Every point x replaced by Q x; order preserved.
Constellation rotate(const Constellation& c, const RotationMatrix& q);

/// Applies an arbitrary square matrix; the result must still have distinct points.
Constellation transform(const Constellation& c, const Matrix& m);

/// [[cos t, -sin t], [sin t, cos t]].
RotationMatrix make_rotation_2d(double theta);

double degrees_to_radians(double deg);

/// One-parameter family with a^2 + 3 b^2 = 1 and r = 3 b^2 / a^2:
///
///   a -b -b -b
///   b  a -b  b
///   b  b  a -b
///   b -b  b  a
RotationMatrix make_dvb_rotation_4d(const DvbRotationParam& param);

/// The signed circulant pattern
///
///    a  b  c  d
///   -d  a  b  c
///   -c -d  a  b
///   -b -c -d  a
///
/// It is a rotation iff a^2+b^2+c^2+d^2 = 1 and ab - ad + cd + bc = 0;
/// that is not checked here.
Matrix make_signed_circulant_4d(double a, double b, double c, double d);

struct ProductDistance {
  double value;
  int first;
  int second;
};

inline constexpr double kCoordTol = 1e-9;

/// min over unordered pairs of prod |x_i - y_i| over the coordinates where
/// |x_i - y_i| > coord_tol.
ProductDistance min_product_distance(const Constellation& c, double coord_tol = kCoordTol);

enum class MatchSearch { greedy, exhaustive };

struct SignedPermutationMatch {
  Matrix aligned;     ///< P a S
  double frobenius;   ///< ||P a S - b||_F
  double max_entry;   ///< max |P a S - b|
};

/// Aligns `a` to `b` over signed permutations P (rows) and S (columns).
///
/// The greedy search anchors each row of `a` on each row of `b`, reads the
/// column signed permutation off the entry magnitudes, then matches the
/// remaining rows by largest absolute correlation. It returns an upper
/// bound on the true minimum. The exhaustive search enumerates every
/// column signed permutation together with every row permutation and is
/// only allowed for n <= 5.
SignedPermutationMatch align_signed_permutation(const Matrix& a, const Matrix& b,
                                                MatchSearch search = MatchSearch::greedy);

double signed_permutation_distance(const Matrix& a, const Matrix& b,
                                   MatchSearch search = MatchSearch::greedy);

// Constellation file format:
//   # dim=<n> points=<K>
//   x11 x12 ... x1n
//   ...
// Further lines starting with '#' are comments.
void write_constellation(std::ostream& os, const Constellation& c);
Constellation read_constellation(std::istream& is);
void save_constellation(const Constellation& c, const std::filesystem::path& path);
Constellation load_constellation(const std::filesystem::path& path);

}  // namespace geoflow
