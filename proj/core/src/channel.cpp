#include "geoflow/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <boost/random/uniform_int_distribution.hpp>

#include "geoflow/error.hpp"
#include "geoflow/matrix_io.hpp"
#include "parallel.hpp"

namespace geoflow {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

int detect_rows(const double* y, const double* fade, const RowMajor& pts) {
  const int k = static_cast<int>(pts.rows());
  const int n = static_cast<int>(pts.cols());
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int j = 0; j < k; ++j) {
    const double* x = pts.data() + static_cast<std::ptrdiff_t>(j) * n;
    double dist = 0.0;
    for (int i = 0; i < n; ++i) {
      const double e = y[i] - fade[i] * x[i];
      dist += e * e;
    }
    if (dist < best_dist) {
      best_dist = dist;
      best = j;
    }
  }
  return best;
}

double rayleigh(Rng& rng) {
  const double g1 = standard_normal(rng);
  const double g2 = standard_normal(rng);
  return std::sqrt((g1 * g1 + g2 * g2) / 2.0);
}

}  // namespace

std::string_view to_string(NoiseConvention c) {
  switch (c) {
    case NoiseConvention::dimension_scaled: return "dimension_scaled";
    case NoiseConvention::half_n0: return "half_n0";
  }
  return "unknown";
}

NoiseConvention parse_noise_convention(std::string_view name) {
  if (name == "dimension_scaled") return NoiseConvention::dimension_scaled;
  if (name == "half_n0") return NoiseConvention::half_n0;
  throw Error(ErrorKind::invalid_argument,
              "unknown noise convention '" + std::string(name) +
                  "' (expected dimension_scaled or half_n0)");
}

double noise_variance(NoiseLevel noise, int dim, NoiseConvention convention) {
  switch (convention) {
    case NoiseConvention::dimension_scaled: return dim * noise.n0();
    case NoiseConvention::half_n0: return noise.n0() / 2.0;
  }
  throw Error(ErrorKind::invalid_argument, "unknown noise convention");
}

ChannelSample sample_channel(int dim, NoiseLevel noise, Rng& rng, NoiseConvention convention) {
  if (dim < 1) throw Error(ErrorKind::invalid_argument, "sample_channel: dim must be >= 1");
  const double sigma = std::sqrt(noise_variance(noise, dim, convention));
  ChannelSample s{Vector(dim), Vector(dim)};
  for (int i = 0; i < dim; ++i) s.fade(i) = rayleigh(rng);
  for (int i = 0; i < dim; ++i) s.noise(i) = sigma * standard_normal(rng);
  return s;
}

int ml_detect(const Vector& y, const Vector& fade, const Constellation& candidates) {
  if (y.size() != candidates.dim() || fade.size() != candidates.dim()) {
    throw Error(ErrorKind::dimension_mismatch, "ml_detect: vector and constellation dimensions differ");
  }
  const RowMajor pts = candidates.points();
  return detect_rows(y.data(), fade.data(), pts);
}

void SimulationConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw Error(ErrorKind::invalid_argument, "simulation." + field + ": " + why);
  };
  if (snr_db_grid.empty()) fail("snr_grid", "must list at least one SNR");
  for (double s : snr_db_grid)
    if (!std::isfinite(s)) fail("snr_grid", "SNR values must be finite");
  if (trials_per_point < 1) fail("trials", "must be >= 1");
  if (shards < 1) fail("shards", "must be >= 1");
}

SimulationPoint estimate_cer_at(const Constellation& c, const RotationMatrix& q,
                                const SimulationConfig& cfg, std::size_t p) {
  cfg.validate();
  if (p >= cfg.snr_db_grid.size()) {
    throw Error(ErrorKind::invalid_argument, "estimate_cer_at: grid point out of range");
  }
  const Constellation rotated = rotate(c, q);
  const RowMajor pts = rotated.points();
  const int n = rotated.dim();
  const int k = rotated.size();
  const double snr = cfg.snr_db_grid[p];
  const double sigma =
      cfg.noiseless ? 0.0
                    : std::sqrt(noise_variance(NoiseLevel::from_snr_db(snr), n, cfg.convention));
  std::vector<std::int64_t> shard_errors(cfg.shards, 0);

  detail::for_each_partition(cfg.shards, cfg.threads, [&](int s) {
    const auto [begin, end] = detail::partition_bounds(cfg.trials_per_point, cfg.shards, s);
    Rng rng(derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(s)), p));
    boost::random::uniform_int_distribution<int> pick(0, k - 1);
    std::vector<double> fade(n), y(n);
    std::int64_t errors = 0;
    for (long t = begin; t < end; ++t) {
      const int sent = pick(rng);
      for (int i = 0; i < n; ++i) fade[i] = rayleigh(rng);
      if (cfg.unit_fade) std::fill(fade.begin(), fade.end(), 1.0);
      const double* x = pts.data() + static_cast<std::ptrdiff_t>(sent) * n;
      for (int i = 0; i < n; ++i) {
        const double z = sigma * standard_normal(rng);
        y[i] = fade[i] * x[i] + z;
      }
      if (detect_rows(y.data(), fade.data(), pts) != sent) ++errors;
    }
    shard_errors[s] = errors;
  });

  std::int64_t errors = 0;
  for (auto e : shard_errors) errors += e;
  const double trials = static_cast<double>(cfg.trials_per_point);
  const double cer = static_cast<double>(errors) / trials;
  return {snr, cer, errors, cfg.trials_per_point, std::sqrt(cer * (1.0 - cer) / trials)};
}

SimulationResult estimate_cer(const Constellation& c, const RotationMatrix& q,
                              const SimulationConfig& cfg) {
  cfg.validate();
  SimulationResult result{{}, cfg.seed, cfg.shards};
  for (std::size_t p = 0; p < cfg.snr_db_grid.size(); ++p) {
    result.points.push_back(estimate_cer_at(c, q, cfg, p));
  }
  return result;
}

void write_result_csv(std::ostream& os, const SimulationResult& result) {
  os << "snr_db,cer,std_error,errors,trials,seed\n";
  for (const auto& p : result.points) {
    os << format_double(p.snr_db) << ',' << format_double(p.cer) << ','
       << format_double(p.std_error) << ',' << p.errors << ',' << p.trials << ','
       << result.seed << '\n';
  }
}

}  // namespace geoflow
