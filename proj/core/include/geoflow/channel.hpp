#pragma once

// Monte-Carlo simulation of y = H x + z with H = diag(alpha_i) Rayleigh,
// E[alpha_i^2] = 1, z_i ~ N(0, sigma^2), and a maximum-likelihood receiver
// that knows H.

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "geoflow/constellation.hpp"
#include "geoflow/objective.hpp"
#include "geoflow/rng.hpp"

namespace geoflow {

/// Per-coordinate noise variance as a function of N0.
enum class NoiseConvention {
  dimension_scaled,  ///< sigma^2 = n N0
  half_n0,           ///< sigma^2 = N0 / 2
};

std::string_view to_string(NoiseConvention c);
NoiseConvention parse_noise_convention(std::string_view name);

double noise_variance(NoiseLevel noise, int dim, NoiseConvention convention);

struct ChannelSample {
  Vector fade;
  Vector noise;
};

/// alpha_i = sqrt((g1^2 + g2^2) / 2) with g1, g2 standard normal; then
/// z_i = sigma * g. Draws are consumed coordinate by coordinate, all fades
/// before all noise values.
ChannelSample sample_channel(int dim, NoiseLevel noise, Rng& rng,
                             NoiseConvention convention = NoiseConvention::dimension_scaled);

/// argmin_j sum_i (y_i - alpha_i x_i^(j))^2, lowest index on ties.
int ml_detect(const Vector& y, const Vector& fade, const Constellation& candidates);

struct SimulationConfig {
  std::vector<double> snr_db_grid;
  std::int64_t trials_per_point = 100000;
  std::uint64_t seed = 1;
  int shards = 8;
  int threads = 1;
  NoiseConvention convention = NoiseConvention::dimension_scaled;
  bool noiseless = false;  ///< z = 0
  bool unit_fade = false;  ///< alpha = 1

  void validate() const;
};

struct SimulationPoint {
  double snr_db;
  double cer;
  std::int64_t errors;
  std::int64_t trials;
  double std_error;
};

struct SimulationResult {
  std::vector<SimulationPoint> points;
  std::uint64_t seed;
  int shards;
};

/// Shard s of SNR point p draws from Rng(derive_seed(derive_seed(seed, s), p)); shard
/// counts are summed in shard order, so the result depends on `shards` but
/// not on `threads`.
SimulationResult estimate_cer(const Constellation& c, const RotationMatrix& q,
                              const SimulationConfig& cfg);

/// Grid point `point` of estimate_cer alone, on the same streams.
SimulationPoint estimate_cer_at(const Constellation& c, const RotationMatrix& q,
                                const SimulationConfig& cfg, std::size_t point);

/// Writes `snr_db,cer,std_error,errors,trials,seed`.
void write_result_csv(std::ostream& os, const SimulationResult& result);

}  // namespace geoflow
