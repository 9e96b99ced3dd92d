#pragma once

// Geodesic flow on SO(n): Q_{k+1} = exp(-h r_k) Q_k with
// r_k = G_k Q_k^t - Q_k G_k^t and G_k the Euclidean gradient of the
// objective at Q_k.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "geoflow/constellation.hpp"
#include "geoflow/lie.hpp"
#include "geoflow/objective.hpp"

namespace geoflow {

enum class GradientMode { analytic, central_difference };

struct InitIdentity {};
struct InitGiven {
  RotationMatrix rotation;
};
struct InitRandom {
  std::uint64_t seed;
};
using InitSpec = std::variant<InitIdentity, InitGiven, InitRandom>;

struct SaddleEscape {
  bool enabled = true;
  /// Escape when ||r_0||_F <= threshold * max(1, ||G_0||_F).
  double threshold = 1e-9;
  /// Q_0 <- exp(scale * S) Q_0 with S a unit-norm random skew matrix.
  double scale = 1e-3;
  std::uint64_t seed = 0;
};

struct OptimizerConfig {
  double step_size = 0.01;
  int iterations = 10000;
  GradientMode gradient = GradientMode::analytic;
  double fd_delta = kDefaultFdDelta;
  InitSpec init = InitIdentity{};
  int reortho_period = 1000;
  double reortho_threshold = 1e-10;
  bool track_best = true;
  SaddleEscape escape;
  EvalOptions eval;

  /// Throws Error(invalid_argument) naming the offending field.
  void validate() const;
};

struct OptimizerTrace {
  std::vector<double> objective_history;  ///< f(Q_0) ... f(Q_N)
  std::vector<double> drift_history;      ///< ||Q_k Q_k^t - I||_F
  int best_iteration = 0;
  double best_value = 0.0;
  double ortho_drift_max = 0.0;
  /// f at the configured initial rotation, before any saddle escape.
  double init_value = 0.0;
  bool escaped_saddle = false;
  std::vector<int> projections;  ///< iterations where Q_k was re-projected
  double initial_skew_norm = 0.0;  ///< ||r_0||_F
  double final_skew_norm = 0.0;    ///< ||r_N||_F at Q_N
};

struct OptimizerResult {
  RotationMatrix rotation;  ///< best iterate if track_best, else Q_N
  RotationMatrix final_matrix;
  RotationMatrix best_matrix;
  OptimizerTrace trace;
};

OptimizerResult geodesic_flow(const Constellation& c, NoiseLevel noise, const OptimizerConfig& cfg);

/// Runs the flow at each SNR of the grid in the given order, starting each
/// point from the previous point's returned rotation. The first point uses
/// cfg.init.
std::vector<OptimizerResult> snr_continuation(const Constellation& c,
                                              std::span<const double> snr_db_grid,
                                              const OptimizerConfig& cfg);

struct FlowStage {
  double snr_db;
  double step_size;
  int iterations;
};

/// Runs the stages in order; each stage overrides step_size and iterations
/// of `cfg` and starts from the previous stage's returned rotation.
std::vector<OptimizerResult> staged_flow(const Constellation& c, std::span<const FlowStage> stages,
                                         const OptimizerConfig& cfg);

struct MultiStartResult {
  std::vector<OptimizerResult> stages;  ///< the winning restart
  int restart = 0;
  std::vector<double> final_values;     ///< last-stage best value of every restart
};

/// staged_flow from `restarts` starting points. Restart 0 uses the seeds of
/// `cfg`; restart r > 0 replaces the escape seed s by derive_seed(s, r), and
/// a random init seed likewise. The restart with the lowest last-stage best
/// value wins, the lowest index on ties.
MultiStartResult multi_start_flow(const Constellation& c, std::span<const FlowStage> stages,
                                  const OptimizerConfig& cfg, int restarts);

/// True iff q has the 4x4 signed circulant pattern
///
///    a  b  c  d
///   -d  a  b  c
///   -c -d  a  b
///   -b -c -d  a
///
/// within tol, and a^2+b^2+c^2+d^2 = 1, ab - ad + cd + bc = 0 within tol.
bool check_two_param_family(const Matrix& q, double tol);

/// Writes `iteration,f_value,ortho_drift` rows, keeping every `every`-th
/// iteration plus the last one.
void write_trace_csv(std::ostream& os, const OptimizerTrace& trace, int every = 1);

}  // namespace geoflow
