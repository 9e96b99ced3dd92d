#include "geoflow/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "geoflow/error.hpp"
#include "geoflow/matrix_io.hpp"
#include "geoflow/rng.hpp"

namespace geoflow {

namespace {

RotationMatrix initial_rotation(const InitSpec& init, int dim) {
  return std::visit(
      [dim](const auto& spec) -> RotationMatrix {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, InitIdentity>) {
          return RotationMatrix::identity(dim);
        } else if constexpr (std::is_same_v<T, InitGiven>) {
          if (spec.rotation.dim() != dim) {
            throw Error(ErrorKind::invalid_argument,
                        "optimizer.init: given rotation has dimension " +
                            std::to_string(spec.rotation.dim()) + ", constellation has " +
                            std::to_string(dim));
          }
          return spec.rotation;
        } else {
          Rng rng(spec.seed);
          return random_rotation(dim, rng);
        }
      },
      init);
}

void require_finite(const ValueAndGradient& vg, int iteration) {
  if (!std::isfinite(vg.value) || !vg.gradient.allFinite()) {
    throw Error(ErrorKind::numerical_failure,
                "objective is not finite at iteration " + std::to_string(iteration));
  }
}

}  // namespace

void OptimizerConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw Error(ErrorKind::invalid_argument, "optimizer." + field + ": " + why);
  };
  if (!(step_size > 0.0) || !std::isfinite(step_size)) fail("step_size", "must be > 0");
  if (iterations < 1) fail("iterations", "must be >= 1");
  if (gradient == GradientMode::central_difference && !(fd_delta > 0.0)) {
    fail("fd_delta", "must be > 0");
  }
  if (reortho_period < 1) fail("reortho_period", "must be >= 1");
  if (!(reortho_threshold > 0.0)) fail("reortho_threshold", "must be > 0");
  if (!(escape.threshold >= 0.0)) fail("escape_threshold", "must be >= 0");
  if (!(escape.scale > 0.0)) fail("escape_scale", "must be > 0");
  if (eval.partitions < 1) fail("partitions", "must be >= 1");
}

OptimizerResult geodesic_flow(const Constellation& c, NoiseLevel noise, const OptimizerConfig& cfg) {
  cfg.validate();
  if (c.size() < 2) {
    throw Error(ErrorKind::invalid_argument, "geodesic_flow needs a constellation with >= 2 points");
  }
  const int n = c.dim();
  const PepObjective objective(c, noise, cfg.eval);
  auto evaluate = [&](const Matrix& q) -> ValueAndGradient {
    if (cfg.gradient == GradientMode::analytic) return objective.value_and_gradient(q);
    return {objective.value(q), objective.gradient_fd(q, cfg.fd_delta)};
  };

  RotationMatrix q = initial_rotation(cfg.init, n);
  OptimizerTrace trace;
  ValueAndGradient vg = evaluate(q.matrix());
  require_finite(vg, 0);
  trace.init_value = vg.value;

  if (cfg.escape.enabled && n > 1) {
    const SkewMatrix r0 = skew_lift(vg.gradient, q);
    if (r0.norm() <= cfg.escape.threshold * std::max(1.0, vg.gradient.norm())) {
      Rng rng(cfg.escape.seed);
      q = exp_skew(random_skew(n, rng).scaled(cfg.escape.scale)) * q;
      vg = evaluate(q.matrix());
      trace.escaped_saddle = true;
    }
  }

  trace.objective_history.reserve(cfg.iterations + 1);
  trace.drift_history.reserve(cfg.iterations + 1);
  RotationMatrix best = q;
  const RotationTolerance tol;

  for (int k = 0;; ++k) {
    require_finite(vg, k);
    const double drift = q.drift();
    if (drift > tol.ortho || std::abs(q.matrix().determinant() - 1.0) > tol.det) {
      throw Error(ErrorKind::corrupted_state,
                  "iterate " + std::to_string(k) + " left SO(n): drift " + format_double(drift));
    }
    trace.objective_history.push_back(vg.value);
    trace.drift_history.push_back(drift);
    trace.ortho_drift_max = std::max(trace.ortho_drift_max, drift);
    if (k == 0 || vg.value < trace.best_value) {
      trace.best_value = vg.value;
      trace.best_iteration = k;
      best = q;
    }

    const SkewMatrix r = skew_lift(vg.gradient, q);
    if (k == 0) trace.initial_skew_norm = r.norm();
    if (k == cfg.iterations) {
      trace.final_skew_norm = r.norm();
      break;
    }

    q = exp_skew(r.scaled(-cfg.step_size)) * q;
    if ((k + 1) % cfg.reortho_period == 0 && q.drift() > cfg.reortho_threshold) {
      q = project_to_rotation(q.matrix());
      trace.projections.push_back(k + 1);
    }
    vg = evaluate(q.matrix());
  }

  RotationMatrix chosen = cfg.track_best ? best : q;
  return OptimizerResult{std::move(chosen), std::move(q), std::move(best), std::move(trace)};
}

std::vector<OptimizerResult> snr_continuation(const Constellation& c,
                                              std::span<const double> snr_db_grid,
                                              const OptimizerConfig& cfg) {
  std::vector<OptimizerResult> out;
  out.reserve(snr_db_grid.size());
  OptimizerConfig stage = cfg;
  for (double snr : snr_db_grid) {
    out.push_back(geodesic_flow(c, NoiseLevel::from_snr_db(snr), stage));
    stage.init = InitGiven{out.back().rotation};
  }
  return out;
}

std::vector<OptimizerResult> staged_flow(const Constellation& c, std::span<const FlowStage> stages,
                                         const OptimizerConfig& cfg) {
  if (stages.empty()) throw Error(ErrorKind::invalid_argument, "staged_flow needs at least one stage");
  std::vector<OptimizerResult> out;
  out.reserve(stages.size());
  OptimizerConfig stage = cfg;
  for (const FlowStage& st : stages) {
    stage.step_size = st.step_size;
    stage.iterations = st.iterations;
    out.push_back(geodesic_flow(c, NoiseLevel::from_snr_db(st.snr_db), stage));
    stage.init = InitGiven{out.back().rotation};
  }
  return out;
}

MultiStartResult multi_start_flow(const Constellation& c, std::span<const FlowStage> stages,
                                  const OptimizerConfig& cfg, int restarts) {
  if (restarts < 1) throw Error(ErrorKind::invalid_argument, "optimizer.restarts: must be >= 1");
  MultiStartResult best;
  for (int r = 0; r < restarts; ++r) {
    OptimizerConfig start = cfg;
    if (r > 0) {
      start.escape.seed = derive_seed(cfg.escape.seed, static_cast<std::uint64_t>(r));
      if (const auto* rnd = std::get_if<InitRandom>(&cfg.init)) {
        start.init = InitRandom{derive_seed(rnd->seed, static_cast<std::uint64_t>(r))};
      }
    }
    auto runs = staged_flow(c, stages, start);
    const double value = runs.back().trace.best_value;
    best.final_values.push_back(value);
    if (r == 0 || value < best.stages.back().trace.best_value) {
      best.stages = std::move(runs);
      best.restart = r;
    }
  }
  return best;
}

bool check_two_param_family(const Matrix& q, double tol) {
  if (q.rows() != 4 || q.cols() != 4) {
    throw Error(ErrorKind::invalid_argument, "check_two_param_family requires a 4x4 matrix");
  }
  const double a = (q(0, 0) + q(1, 1) + q(2, 2) + q(3, 3)) / 4.0;
  const double b = (q(0, 1) + q(1, 2) + q(2, 3) - q(3, 0)) / 4.0;
  const double c = (q(0, 2) + q(1, 3) - q(2, 0) - q(3, 1)) / 4.0;
  const double d = (q(0, 3) - q(1, 0) - q(2, 1) - q(3, 2)) / 4.0;
  const Matrix pattern = make_signed_circulant_4d(a, b, c, d);
  if ((pattern - q).cwiseAbs().maxCoeff() > tol) return false;
  const double unit = a * a + b * b + c * c + d * d - 1.0;
  const double cross = a * b - a * d + c * d + b * c;
  return std::abs(unit) <= tol && std::abs(cross) <= tol;
}

void write_trace_csv(std::ostream& os, const OptimizerTrace& trace, int every) {
  if (every < 1) throw Error(ErrorKind::invalid_argument, "trace_every must be >= 1");
  os << "iteration,f_value,ortho_drift\n";
  const int last = static_cast<int>(trace.objective_history.size()) - 1;
  for (int k = 0; k <= last; ++k) {
    if (k % every != 0 && k != last) continue;
    os << k << ',' << format_double(trace.objective_history[k]) << ','
       << format_double(trace.drift_history[k]) << '\n';
  }
}

}  // namespace geoflow
