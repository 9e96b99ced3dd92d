#pragma once

// Union bound on the pairwise error probability of a rotated constellation
// over the Rayleigh fading channel:
//
//   f(Q) = sum over unordered pairs {x, y} of prod_i 1 / (1 + (Q(x-y))_i^2 / (8 N0))
//
// The literal double sum over all ordered (x, y), including x = y, equals
// 2 f(Q) + K. Neither the constant nor the factor moves the minimizer.

#include "geoflow/constellation.hpp"
#include "geoflow/lie.hpp"

namespace geoflow {

class NoiseLevel {
 public:
  static NoiseLevel from_n0(double n0);
  /// SNR = 1 / N0 for unit-energy constellations.
  static NoiseLevel from_snr_db(double snr_db);

  double n0() const noexcept { return n0_; }
  double snr_db() const;

 private:
  explicit NoiseLevel(double n0) : n0_(n0) {}
  double n0_;
};

/// Difference vectors x - y over the K(K-1)/2 unordered distinct pairs,
/// one per row, in (a, b) order with a < b.
class PairDiffCache {
 public:
  explicit PairDiffCache(const Constellation& c);

  int dim() const noexcept { return static_cast<int>(diffs_.cols()); }
  long size() const noexcept { return static_cast<long>(diffs_.rows()); }
  const Matrix& diffs() const noexcept { return diffs_; }

 private:
  Matrix diffs_;
};

enum class PairSum { unordered, ordered, literal };

/// How the pair sum is split. Results depend on `partitions` (fixed
/// summation order) but never on `threads`.
struct EvalOptions {
  int partitions = 1;
  int threads = 1;
};

struct ValueAndGradient {
  double value;
  Matrix gradient;
};

/// f and its Euclidean gradient for one constellation and noise level. The
/// matrix argument may be any square matrix; finite differences evaluate f
/// away from SO(n).
class PepObjective {
 public:
  PepObjective(const Constellation& c, NoiseLevel noise, EvalOptions options = {});

  int dim() const noexcept { return cache_.dim(); }
  long pair_count() const noexcept { return cache_.size(); }
  NoiseLevel noise() const noexcept { return noise_; }
  const EvalOptions& options() const noexcept { return options_; }

  double value(const Matrix& q) const;
  Matrix gradient(const Matrix& q) const;
  ValueAndGradient value_and_gradient(const Matrix& q) const;

  /// Central differences with perturbation `delta` in one entry at a time.
  Matrix gradient_fd(const Matrix& q, double delta) const;

 private:
  void check_dim(const Matrix& q) const;

  PairDiffCache cache_;
  NoiseLevel noise_;
  EvalOptions options_;
};

double pep_bound(const Constellation& c, const RotationMatrix& q, NoiseLevel noise);

/// Sums over ordered distinct pairs, or over all ordered pairs for
/// PairSum::literal, by direct enumeration of the rotated points. Kept as an
/// independent route for checking the pair convention.
double pep_bound_sum(const Constellation& c, const Matrix& q, NoiseLevel noise, PairSum sum);

Matrix pep_gradient_analytic(const Constellation& c, const RotationMatrix& q, NoiseLevel noise);

inline constexpr double kDefaultFdDelta = 1e-5;

Matrix pep_gradient_fd(const Constellation& c, const RotationMatrix& q, NoiseLevel noise,
                       double delta = kDefaultFdDelta);

}  // namespace geoflow
