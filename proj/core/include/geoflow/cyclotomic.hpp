#pragma once

// Rotated Z^n lattices from the totally real subfield Q(theta),
// theta = 2 cos(2 pi / m), of a prime cyclotomic field, twisted by the
// element alpha = 2 - theta.

#include <optional>
#include <string>
#include <string_view>

#include "geoflow/lie.hpp"

namespace geoflow {

class CyclotomicSpec {
 public:
  /// m must be a prime with 5 <= m <= 64.
  explicit CyclotomicSpec(int m);

  int conductor() const noexcept { return m_; }
  int degree() const noexcept { return (m_ - 1) / 2; }

 private:
  int m_;
};

enum class IntegralBasis {
  symmetric_powers,  ///< e_j = zeta^j + zeta^-j
  power_basis,       ///< e_j = theta^(j-1)
  suffix_sums,       ///< f_j = e_j + e_(j+1) + ... + e_n
};

std::string_view to_string(IntegralBasis basis);

struct GeneratorMatrix {
  CyclotomicSpec spec;
  RotationMatrix matrix;
  IntegralBasis basis;
  double residual;  ///< ||M M^t - I||_F before canonicalization
  /// Minimum product distance of the rotated unit hypercube, computed when
  /// the degree is small enough to enumerate its difference vectors.
  std::optional<double> diversity;
};

/// Builds M_jk = sqrt(sigma_k(alpha)) sigma_k(e_j) / sqrt(m) for the first
/// integral basis whose matrix is orthonormal to 1e-9, then canonicalizes
/// it (rows signed so the first nonzero entry is positive, rows sorted
/// lexicographically, last row negated if det = -1).
///
/// Throws Error(construction_failed) listing each basis residual when no
/// basis verifies.
GeneratorMatrix build_generator(const CyclotomicSpec& spec);

/// The entries of M_jk before canonicalization, for the given basis.
Matrix twisted_embedding(const CyclotomicSpec& spec, IntegralBasis basis);

enum class GoldenMatrix { M11, Q30dB_5D, Q24dB_4D };

/// Reference 4-decimal matrices, stored verbatim as data.
Matrix golden_matrix(GoldenMatrix which);
std::string_view golden_name(GoldenMatrix which);
std::optional<GoldenMatrix> parse_golden_name(std::string_view name);

/// Nearest rotation to the printed matrix. A printed reflection has its
/// last row negated first, which maps the rotated hypercube to itself up to
/// a coordinate sign.
RotationMatrix golden_rotation(GoldenMatrix which);

/// Printed text of a golden matrix in the matrix file layout, with the
/// reference digits unchanged.
std::string golden_text(GoldenMatrix which);

}  // namespace geoflow
