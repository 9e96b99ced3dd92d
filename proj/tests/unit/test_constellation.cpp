#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <algorithm>
#include <random>
#include <sstream>

#include "geoflow/constellation.hpp"
#include "geoflow/cyclotomic.hpp"
#include "geoflow/error.hpp"
#include "support/oracles.hpp"

using namespace geoflow;

namespace {

Constellation signed_permuted(const Constellation& c, const std::vector<int>& perm,
                              const std::vector<double>& signs) {
  Matrix p(c.size(), c.dim());
  for (int k = 0; k < c.size(); ++k)
    for (int i = 0; i < c.dim(); ++i) p(k, i) = signs[i] * c.points()(k, perm[i]);
  return Constellation(p);
}

}  // namespace

TEST(Hypercube, OneDimensional) {
  const Constellation c = make_hypercube(1);
  ASSERT_EQ(c.size(), 2);
  EXPECT_EQ(c.points()(0, 0), -1.0);
  EXPECT_EQ(c.points()(1, 0), 1.0);
}

TEST(Hypercube, TwoDimensionalIsNormalizedAndLexicographic) {
  const Constellation c = make_hypercube(2);
  const double s = 1.0 / std::sqrt(2.0);
  Matrix expected(4, 2);
  expected << -s, -s, -s, s, s, -s, s, s;
  EXPECT_LE((c.points() - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(c.energy(), 1.0, 1e-12);
}

TEST(Hypercube, FourDimensionalPointsHaveUnitNorm) {
  const Constellation c = make_hypercube(4);
  ASSERT_EQ(c.size(), 16);
  for (int k = 0; k < 16; ++k) EXPECT_NEAR(c.point(k).squaredNorm(), 1.0, 1e-15);
}

TEST(Hypercube, SizeLimit) {
  try {
    make_hypercube(17);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::size_limit);
  }
}

TEST(Nuqam16, GammaThreeIsClassical16Qam) {
  const Constellation c = make_nuqam16(NuqamParams(3.0));
  const Constellation qam = make_qam(16);
  EXPECT_LE((c.points() - qam.points()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(c.points().cwiseAbs().maxCoeff(), 3.0 / std::sqrt(10.0), 1e-15);
}

TEST(Nuqam16, Gamma315) {
  const Constellation c = make_nuqam16(NuqamParams(3.15));
  EXPECT_EQ(c.size(), 16);
  EXPECT_NEAR(c.energy(), 1.0, 1e-12);
  EXPECT_NEAR(c.points().cwiseAbs().maxCoeff(), 3.15 / std::sqrt(1 + 3.15 * 3.15), 1e-15);
  EXPECT_NEAR(c.points().cwiseAbs().maxCoeff(), 0.95312426714454268, 1e-12);
}

TEST(Nuqam16, AnyGammaGivesSixteenDistinctUnitEnergyPoints) {
  for (double g : {1.01, 1.5, 2.0, 3.15, 7.0, 100.0}) {
    const Constellation c = make_nuqam16(NuqamParams(g));
    EXPECT_EQ(c.size(), 16);
    EXPECT_GT(c.min_distance(), 0.0);
    EXPECT_NEAR(c.energy(), 1.0, 1e-12);
  }
}

TEST(Nuqam16, RejectsGammaAtMostOne) {
  EXPECT_THROW(NuqamParams(1.0), Error);
  EXPECT_THROW(NuqamParams(0.5), Error);
}

TEST(Rotate, IdentityAndQuarterTurn) {
  const Constellation c = make_hypercube(3);
  EXPECT_EQ(rotate(c, RotationMatrix::identity(3)).points(), c.points());

  Matrix p(2, 2);
  p << 1, 0, 0, 1;
  const Constellation r = rotate(Constellation(p), make_rotation_2d(std::numbers::pi / 2));
  Matrix expected(2, 2);
  expected << 0, 1, -1, 0;
  EXPECT_LE((r.points() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Rotate, PreservesEnergyAndDistances) {
  std::mt19937_64 gen(21);
  for (int n : {2, 3, 4, 5}) {
    const Constellation c = make_hypercube(n);
    const auto q = RotationMatrix::from_matrix(oracle::gram_schmidt_rotation(n, gen));
    const Constellation r = rotate(c, q);
    EXPECT_NEAR(r.energy(), c.energy(), 1e-12);
    for (int a = 0; a < c.size(); ++a)
      for (int b = a + 1; b < c.size(); ++b)
        EXPECT_NEAR((r.point(a) - r.point(b)).norm(), (c.point(a) - c.point(b)).norm(), 1e-12);
  }
}

TEST(Rotate, DimensionMismatch) {
  EXPECT_THROW(rotate(make_hypercube(3), RotationMatrix::identity(2)), Error);
}

TEST(Rotation2d, SpecialAngles) {
  EXPECT_LE((make_rotation_2d(0).matrix() - Matrix::Identity(2, 2)).norm(), 0.0);
  EXPECT_LE((make_rotation_2d(std::numbers::pi).matrix() + Matrix::Identity(2, 2)).norm(), 1e-15);
  const RotationMatrix dvb = make_rotation_2d(degrees_to_radians(16.8));
  EXPECT_NEAR(dvb(0, 0), std::cos(16.8 * std::numbers::pi / 180), 1e-16);
  EXPECT_NEAR(dvb(1, 0), std::sin(16.8 * std::numbers::pi / 180), 1e-16);
}

TEST(DvbRotation, ZeroIsIdentity) {
  EXPECT_LE((make_dvb_rotation_4d(DvbRotationParam(0.0)).matrix() - Matrix::Identity(4, 4)).norm(), 0.0);
}

TEST(DvbRotation, StandardParameter) {
  const RotationMatrix q = make_dvb_rotation_4d(DvbRotationParam(0.4));
  // Closed form of 3b^2/a^2 = 0.4 with a^2 + 3b^2 = 1.
  EXPECT_NEAR(q(0, 0), std::sqrt(5.0 / 7.0), 1e-15);
  EXPECT_NEAR(q(1, 0), std::sqrt(2.0 / 21.0), 1e-15);
  EXPECT_NEAR(q(0, 0), 0.8451543, 1e-7);
  EXPECT_NEAR(q(1, 0), 0.3086067, 1e-7);
}

TEST(DvbRotation, GridIsOnSO4) {
  for (int i = 0; i <= 10; ++i) {
    const Matrix q = make_dvb_rotation_4d(DvbRotationParam(i / 10.0)).matrix();
    EXPECT_LE(ortho_drift(q), 1e-12);
    EXPECT_NEAR(q.determinant(), 1.0, 1e-12);
  }
  EXPECT_THROW(DvbRotationParam(1.5), Error);
  EXPECT_THROW(DvbRotationParam(-0.1), Error);
}

TEST(SignedCirculant, ReferenceMatrixSatisfiesConstraints) {
  const Matrix g = golden_matrix(GoldenMatrix::Q24dB_4D);
  const double a = g(0, 0), b = g(0, 1), c = g(0, 2), d = g(0, 3);
  EXPECT_LE((make_signed_circulant_4d(a, b, c, d) - g).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_NEAR(a * a + b * b + c * c + d * d, 1.0, 5e-4);
  EXPECT_NEAR(a * b - a * d + c * d + b * c, 0.0, 5e-4);
}

TEST(SignedCirculant, ExactSolutionsAreRotations) {
  // Pick (a, b, c) on a grid, solve the cross constraint (linear in d),
  // then rescale onto the unit sphere.
  int checked = 0;
  for (double t = 0.1; t < 1.5; t += 0.2) {
    for (double u = -0.4; u <= 0.4; u += 0.2) {
      const double a = 0.6 * std::cos(t);
      const double c = 0.6 * std::sin(t);
      const double b = u;
      // ab - ad + cd + bc = 0  =>  d (c - a) = -(ab + bc)
      if (std::abs(c - a) < 1e-3) continue;
      const double d0 = -(a * b + b * c) / (c - a);
      const double norm = std::sqrt(a * a + b * b + c * c + d0 * d0);
      // The cross constraint is homogeneous, so scaling keeps it.
      const Matrix q = make_signed_circulant_4d(a / norm, b / norm, c / norm, d0 / norm);
      EXPECT_LE(ortho_drift(q), 1e-10);
      EXPECT_NEAR(q.determinant(), 1.0, 1e-10);
      ++checked;
    }
  }
  EXPECT_GT(checked, 20);
}

TEST(MinProductDistance, SinglePair) {
  Matrix p(2, 2);
  p << 1, 1, -1, -1;
  const ProductDistance d = min_product_distance(Constellation(p));
  EXPECT_EQ(d.value, 4.0);
  EXPECT_EQ(d.first, 0);
  EXPECT_EQ(d.second, 1);
}

TEST(MinProductDistance, RawFourQam) {
  const Constellation c = make_hypercube(2, Normalization::raw);
  EXPECT_EQ(oracle::min_product_distance(c.points()), 2.0);
  EXPECT_EQ(min_product_distance(c).value, 2.0);
}

TEST(MinProductDistance, InvariantUnderSignedCoordinatePermutations) {
  std::mt19937_64 gen(22);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 4;
    const auto q = RotationMatrix::from_matrix(oracle::gram_schmidt_rotation(n, gen));
    const Constellation c = rotate(make_hypercube(n), q);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<double> signs(n);
    for (auto& s : signs) s = (gen() & 1) ? 1.0 : -1.0;
    const double base = min_product_distance(c).value;
    EXPECT_NEAR(min_product_distance(signed_permuted(c, perm, signs)).value, base, 1e-12);
    EXPECT_NEAR(oracle::min_product_distance(c.points()), base, 1e-12);
  }
}

TEST(MinProductDistance, NeedsTwoPoints) {
  Matrix p(1, 2);
  p << 1, 2;
  EXPECT_THROW(min_product_distance(Constellation(p)), Error);
}

TEST(SignedPermutation, IdenticalMatrices) {
  std::mt19937_64 gen(23);
  const Matrix a = oracle::gram_schmidt_rotation(6, gen);
  EXPECT_NEAR(signed_permutation_distance(a, a), 0.0, 1e-15);
}

TEST(SignedPermutation, RowSwapAndNegation) {
  std::mt19937_64 gen(24);
  const Matrix a = oracle::gram_schmidt_rotation(5, gen);
  Matrix b = a;
  b.row(0).swap(b.row(1));
  b.row(2) = -b.row(2);
  EXPECT_NEAR(signed_permutation_distance(a, b), 0.0, 1e-15);
  EXPECT_NEAR(signed_permutation_distance(a, b, MatchSearch::exhaustive), 0.0, 1e-15);
}

TEST(SignedPermutation, RowsAndColumnsScrambled) {
  std::mt19937_64 gen(25);
  for (int n : {3, 5, 8}) {
    const Matrix a = oracle::gram_schmidt_rotation(n, gen);
    std::vector<int> rp(n), cp(n);
    std::iota(rp.begin(), rp.end(), 0);
    std::iota(cp.begin(), cp.end(), 0);
    std::shuffle(rp.begin(), rp.end(), gen);
    std::shuffle(cp.begin(), cp.end(), gen);
    Matrix b(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        b(i, j) = a(rp[i], cp[j]);
    for (int i = 0; i < n; ++i)
      if (i % 2) b.row(i) = -b.row(i);
    for (int j = 0; j < n; ++j)
      if (j % 3 == 0) b.col(j) = -b.col(j);
    EXPECT_NEAR(signed_permutation_distance(a, b), 0.0, 1e-12) << "n=" << n;
  }
}

TEST(SignedPermutation, GreedyIsAnUpperBoundOnExhaustive) {
  std::mt19937_64 gen(26);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + trial % 3;
    const Matrix a = oracle::gram_schmidt_rotation(n, gen);
    const Matrix b = oracle::gram_schmidt_rotation(n, gen);
    const double greedy = signed_permutation_distance(a, b);
    const double exact = signed_permutation_distance(a, b, MatchSearch::exhaustive);
    EXPECT_GE(greedy, exact - 1e-12);
  }
}

TEST(SignedPermutation, ReferenceMatricesAreClose) {
  const Matrix m = golden_matrix(GoldenMatrix::M11);
  const Matrix q = golden_matrix(GoldenMatrix::Q30dB_5D);
  const double greedy = signed_permutation_distance(q, m);
  const double exact = signed_permutation_distance(q, m, MatchSearch::exhaustive);
  EXPECT_LE(greedy, 0.5);
  EXPECT_LE(exact, greedy + 1e-12);
}

TEST(SignedPermutation, Limits) {
  EXPECT_THROW(signed_permutation_distance(Matrix::Identity(3, 3), Matrix::Identity(4, 4)), Error);
  EXPECT_THROW(signed_permutation_distance(Matrix::Identity(9, 9), Matrix::Identity(9, 9)), Error);
  EXPECT_THROW(signed_permutation_distance(Matrix::Identity(6, 6), Matrix::Identity(6, 6),
                                           MatchSearch::exhaustive),
               Error);
}

TEST(ConstellationFile, RoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "geoflow_cube4.txt";
  const Constellation c = make_hypercube(4);
  save_constellation(c, path);
  const Constellation back = load_constellation(path);
  EXPECT_LE((back.points() - c.points()).cwiseAbs().maxCoeff(), 1e-15);
  std::filesystem::remove(path);
}

TEST(ConstellationFile, RotatedRoundTripIsExact) {
  std::mt19937_64 gen(27);
  const auto q = RotationMatrix::from_matrix(oracle::gram_schmidt_rotation(5, gen));
  const Constellation c = rotate(make_hypercube(5), q);
  std::ostringstream os;
  write_constellation(os, c);
  std::istringstream is(os.str());
  EXPECT_EQ(read_constellation(is).points(), c.points());
}

TEST(ConstellationFile, DuplicatePoints) {
  std::istringstream is("# dim=2 points=2\n1 0\n1 0\n");
  try {
    read_constellation(is);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::duplicate_point);
  }
}

TEST(ConstellationFile, RaggedRows) {
  std::istringstream is("# dim=2 points=2\n1 0\n1 0 3\n");
  try {
    read_constellation(is);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::dimension_mismatch);
  }
}

TEST(ConstellationFile, CommentsAndParseErrors) {
  std::istringstream ok("# dim=1 points=2\n# a comment\n-1\n\n1\n");
  EXPECT_EQ(read_constellation(ok).size(), 2);

  std::istringstream bad("# dim=2 points=1\n0.5 abc\n");
  try {
    read_constellation(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.column(), 5);
  }

  std::istringstream no_header("1 2\n");
  EXPECT_THROW(read_constellation(no_header), ParseError);
}
