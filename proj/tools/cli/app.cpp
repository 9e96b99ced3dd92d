#include "app.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "geoflow/channel.hpp"
#include "geoflow/cyclotomic.hpp"
#include "geoflow/error.hpp"
#include "geoflow/matrix_io.hpp"
#include "geoflow/optimizer.hpp"
#include "geoflow/rng.hpp"

namespace geoflow::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr const char* kFNote =
    "# f sums the K(K-1)/2 unordered distinct pairs; the literal sum over all ordered x, y "
    "(x = y included) equals 2 f + K";

std::string flag_for(const KeyInfo& k) {
  const std::string key = std::string(k.section) + "." + k.name;
  if (key == "constellation.spec") return "--constellation";
  if (key == "rotation.source") return "--rotation";
  if (key == "noise.grid") return "--snr-grid";
  if (key == "noise.convention") return "--noise-convention";
  std::string f = std::string("--") + k.name;
  for (char& ch : f)
    if (ch == '_') ch = '-';
  return f;
}

struct Overrides {
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  bool unnormalized = false;

  void apply(ConfigTree& tree) const {
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) tree.set(key, values.at(key));
    }
    if (unnormalized) tree.set("constellation.normalize", "false");
  }
};

struct Scenario {
  ExperimentConfig cfg;
  Constellation c;
};

Scenario make_scenario(const std::string& config_path, const Overrides& ov,
                       const std::string& rotation_override = {}) {
  ConfigTree tree = config_path.empty() ? ConfigTree::empty() : ConfigTree::load(config_path);
  ov.apply(tree);
  if (!rotation_override.empty()) tree.set("rotation.source", rotation_override);
  ExperimentConfig cfg = build_config(tree);
  Constellation c = make_constellation(cfg);
  return {std::move(cfg), std::move(c)};
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("run.out: cannot write " + path.string());
  body(os);
  os.flush();
  if (!os) throw ConfigError("run.out: write failed for " + path.string());
}

void prepare_out(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw ConfigError("run.out: cannot create directory " + dir.string());
  }
}

std::string snr_tag(double snr) {
  std::string s = format_double(snr);
  for (char& ch : s)
    if (ch == '-') ch = 'm';
  return s + "dB";
}

InitSpec init_spec(const Scenario& s) {
  const std::string& src = s.cfg.init_source;
  if (src == "identity") return InitIdentity{};
  if (src.rfind("random:", 0) == 0) return InitRandom{std::stoull(src.substr(7))};
  return InitGiven{fixed_rotation(src, s.cfg.init_file, s.c.dim(), "optimizer.init")};
}

RotationMatrix starting_rotation(const InitSpec& init, int dim) {
  if (const auto* given = std::get_if<InitGiven>(&init)) return given->rotation;
  if (const auto* rnd = std::get_if<InitRandom>(&init)) {
    Rng rng(rnd->seed);
    return random_rotation(dim, rng);
  }
  return RotationMatrix::identity(dim);
}

struct Optimized {
  RotationMatrix start;
  std::vector<OptimizerResult> stages;  ///< continuation pre-stages
  std::vector<OptimizerResult> runs;    ///< one per target SNR
  int restart = 0;
  std::vector<double> restart_values;
};

/// Pre-stages of optimizer.continuation, then either one run at `targets[0]`
/// (repeated over optimizer.restarts starts) or a warm-started sweep over `targets`.
Optimized optimize(const Scenario& s, const std::vector<double>& targets) {
  OptimizerConfig oc = s.cfg.optimizer;
  oc.init = init_spec(s);
  if (targets.size() == 1) {
    std::vector<FlowStage> plan;
    for (const Stage& st : s.cfg.continuation) plan.push_back({st.snr_db, st.step_size, st.iterations});
    plan.push_back({targets[0], oc.step_size, oc.iterations});
    MultiStartResult ms = multi_start_flow(s.c, plan, oc, s.cfg.restarts);
    InitSpec init = oc.init;
    if (const auto* rnd = std::get_if<InitRandom>(&oc.init); rnd && ms.restart > 0) {
      init = InitRandom{derive_seed(rnd->seed, static_cast<std::uint64_t>(ms.restart))};
    }
    Optimized o{starting_rotation(init, s.c.dim()), std::move(ms.stages), {}, ms.restart,
                std::move(ms.final_values)};
    o.runs.push_back(std::move(o.stages.back()));
    o.stages.pop_back();
    return o;
  }
  Optimized o{starting_rotation(oc.init, s.c.dim()), {}, {}, 0, {}};
  for (const Stage& st : s.cfg.continuation) {
    OptimizerConfig sc = oc;
    sc.step_size = st.step_size;
    sc.iterations = st.iterations;
    o.stages.push_back(geodesic_flow(s.c, NoiseLevel::from_snr_db(st.snr_db), sc));
    oc.init = InitGiven{o.stages.back().rotation};
  }
  o.runs = snr_continuation(s.c, targets, oc);
  return o;
}

void report_stages(std::ostream& out, const Optimized& o, const ExperimentConfig& cfg) {
  if (o.restart_values.size() > 1) {
    for (std::size_t r = 0; r < o.restart_values.size(); ++r) {
      out << "restart " << r << ": f(best) = " << format_double(o.restart_values[r]) << '\n';
    }
    out << "chosen restart = " << o.restart << '\n';
  }
  for (std::size_t i = 0; i < o.stages.size(); ++i) {
    const Stage& st = cfg.continuation[i];
    out << "stage " << i + 1 << ": snr_db = " << format_double(st.snr_db)
        << ", h = " << format_double(st.step_size) << ", iterations = " << st.iterations
        << ", f(best) = " << format_double(o.stages[i].trace.best_value) << '\n';
  }
}

/// One rotation per grid point of the scenario. Optimized rotations are
/// written to `out` with the given file stem.
std::vector<RotationMatrix> grid_rotations(const Scenario& s, std::ostream& log,
                                           const std::string& stem) {
  const auto& cfg = s.cfg;
  const auto& grid = cfg.grid;
  if (!is_optimized_source(cfg.rotation_source)) {
    const RotationMatrix q =
        fixed_rotation(cfg.rotation_source, cfg.rotation_file, s.c.dim(), "rotation.source");
    return std::vector<RotationMatrix>(grid.size(), q);
  }
  if (cfg.rotation_source == "optimize") {
    const Optimized o = optimize(s, {cfg.snr_db});
    report_stages(log, o, cfg);
    const auto& r = o.runs.front();
    log << stem << ": optimized at snr_db = " << format_double(cfg.snr_db)
        << ", f(best) = " << format_double(r.trace.best_value) << '\n';
    save_matrix(cfg.out / (stem + ".txt"), r.rotation.matrix());
    return std::vector<RotationMatrix>(grid.size(), r.rotation);
  }
  const Optimized o = optimize(s, grid);
  report_stages(log, o, cfg);
  std::vector<RotationMatrix> out;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const auto& r = o.runs[p];
    log << stem << ": optimized at snr_db = " << format_double(grid[p])
        << ", f(best) = " << format_double(r.trace.best_value) << '\n';
    save_matrix(cfg.out / (stem + "_" + snr_tag(grid[p]) + ".txt"), r.rotation.matrix());
    out.push_back(r.rotation);
  }
  return out;
}

Json scenario_json(const Scenario& s) {
  const auto& cfg = s.cfg;
  Json j;
  j["constellation"] = cfg.constellation_spec;
  j["normalized"] = cfg.normalize;
  j["points"] = s.c.size();
  j["dim"] = s.c.dim();
  j["rotation"] = cfg.rotation_source;
  if (is_optimized_source(cfg.rotation_source)) {
    j["optimizer"] = {{"snr_db", cfg.snr_db},
                      {"step_size", cfg.optimizer.step_size},
                      {"iterations", cfg.optimizer.iterations},
                      {"init", cfg.init_source},
                      {"partitions", cfg.optimizer.eval.partitions},
                      {"restarts", cfg.restarts},
                      {"continuation", Json::array()}};
    for (const auto& st : cfg.continuation) {
      j["optimizer"]["continuation"].push_back(
          {{"snr_db", st.snr_db}, {"step_size", st.step_size}, {"iterations", st.iterations}});
    }
  }
  j["rng"] = std::string(kRngName);
  j["seed"] = cfg.seed;
  j["shards"] = cfg.simulation.shards;
  j["trials_per_point"] = cfg.simulation.trials_per_point;
  j["noise_convention"] = std::string(to_string(cfg.convention));
  j["noiseless"] = cfg.simulation.noiseless;
  j["unit_fade"] = cfg.simulation.unit_fade;
  j["snr_db_grid"] = cfg.grid;
  return j;
}

void write_json(const fs::path& path, const Json& j) {
  write_file(path, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

int cmd_optimize(const Scenario& s, std::ostream& out) {
  const auto& cfg = s.cfg;
  prepare_out(cfg.out);
  const Optimized o = optimize(s, {cfg.snr_db});
  const OptimizerResult& r = o.runs.front();
  const NoiseLevel noise = NoiseLevel::from_snr_db(cfg.snr_db);

  save_matrix(cfg.out / "rotation.txt", r.rotation.matrix());
  write_file(cfg.out / "trace.csv",
             [&](std::ostream& os) { write_trace_csv(os, r.trace, cfg.trace_every); });

  out << kFNote << '\n';
  out << "constellation = " << cfg.constellation_spec << " (K = " << s.c.size()
      << ", n = " << s.c.dim() << ")\n";
  out << "snr_db = " << format_double(cfg.snr_db) << '\n';
  report_stages(out, o, cfg);
  out << "f(Q0) = " << format_double(pep_bound(s.c, o.start, noise)) << '\n';
  out << "f(best) = " << format_double(r.trace.best_value) << '\n';
  out << "best_iteration = " << r.trace.best_iteration << '\n';
  const bool escaped = o.stages.empty() ? r.trace.escaped_saddle : o.stages[0].trace.escaped_saddle;
  out << "escaped_saddle = " << (escaped ? "true" : "false") << '\n';
  out << "ortho_drift_max = " << format_double(r.trace.ortho_drift_max) << '\n';
  out << "projections = " << r.trace.projections.size() << '\n';
  out << "wrote " << (cfg.out / "rotation.txt").string() << ", " << (cfg.out / "trace.csv").string()
      << '\n';
  return kExitOk;
}

int cmd_simulate(const Scenario& s, std::ostream& out) {
  const auto& cfg = s.cfg;
  prepare_out(cfg.out);
  const auto rotations = grid_rotations(s, out, "rotation");
  SimulationResult result{{}, cfg.simulation.seed, cfg.simulation.shards};
  for (std::size_t p = 0; p < cfg.grid.size(); ++p) {
    result.points.push_back(estimate_cer_at(s.c, rotations[p], cfg.simulation, p));
  }
  write_file(cfg.out / "result.csv", [&](std::ostream& os) { write_result_csv(os, result); });
  Json meta = {{"command", "simulate"}};
  meta.update(scenario_json(s));
  write_json(cfg.out / "metadata.json", meta);

  out << "snr_db cer std_error errors trials\n";
  for (const auto& pt : result.points) {
    out << format_double(pt.snr_db) << ' ' << format_double(pt.cer) << ' '
        << format_double(pt.std_error) << ' ' << pt.errors << ' ' << pt.trials << '\n';
  }
  out << "wrote " << (cfg.out / "result.csv").string() << '\n';
  return kExitOk;
}

int cmd_mindist(const Scenario& s, std::ostream& out) {
  const auto& cfg = s.cfg;
  RotationMatrix q = RotationMatrix::identity(s.c.dim());
  if (cfg.rotation_source == "optimize-sweep") {
    throw ConfigError("rotation.source: optimize-sweep needs a grid; mindist takes one rotation");
  }
  if (cfg.rotation_source == "optimize") {
    prepare_out(cfg.out);
    q = grid_rotations(s, out, "rotation").front();
  } else {
    q = fixed_rotation(cfg.rotation_source, cfg.rotation_file, s.c.dim(), "rotation.source");
  }
  const ProductDistance d = min_product_distance(rotate(s.c, q));
  out << "min_product_distance = " << format_double(d.value) << '\n';
  out << "pair = " << d.first << ' ' << d.second << '\n';
  return kExitOk;
}

int cmd_compare(const Scenario& a, const Scenario& b, std::ostream& out) {
  if (a.c.dim() != b.c.dim()) {
    throw Error(ErrorKind::dimension_mismatch,
                "compare: constellation dimensions differ (" + std::to_string(a.c.dim()) + " vs " +
                    std::to_string(b.c.dim()) + ")");
  }
  if (a.cfg.grid != b.cfg.grid) throw ConfigError("noise.grid: A and B must share the SNR grid");
  if (a.cfg.out != b.cfg.out) throw ConfigError("run.out: A and B must share the output directory");
  prepare_out(a.cfg.out);
  const auto rot_a = grid_rotations(a, out, "rotation_A");
  const auto rot_b = grid_rotations(b, out, "rotation_B");

  const auto& grid = a.cfg.grid;
  write_file(a.cfg.out / "compare.csv", [&](std::ostream& os) {
    os << "snr_db,f_A,f_B,cer_A,cer_B,std_error_A,std_error_B,errors_A,errors_B,trials_A,trials_B\n";
    for (std::size_t p = 0; p < grid.size(); ++p) {
      const NoiseLevel noise = NoiseLevel::from_snr_db(grid[p]);
      const double fa = pep_bound(a.c, rot_a[p], noise);
      const double fb = pep_bound(b.c, rot_b[p], noise);
      const SimulationPoint ca = estimate_cer_at(a.c, rot_a[p], a.cfg.simulation, p);
      const SimulationPoint cb = estimate_cer_at(b.c, rot_b[p], b.cfg.simulation, p);
      os << format_double(grid[p]) << ',' << format_double(fa) << ',' << format_double(fb) << ','
         << format_double(ca.cer) << ',' << format_double(cb.cer) << ','
         << format_double(ca.std_error) << ',' << format_double(cb.std_error) << ',' << ca.errors
         << ',' << cb.errors << ',' << ca.trials << ',' << cb.trials << '\n';
      out << "snr_db = " << format_double(grid[p]) << ": f_A = " << format_double(fa)
          << ", f_B = " << format_double(fb) << ", cer_A = " << format_double(ca.cer)
          << ", cer_B = " << format_double(cb.cer) << '\n';
    }
  });
  write_json(a.cfg.out / "metadata.json",
             Json{{"command", "compare"}, {"A", scenario_json(a)}, {"B", scenario_json(b)}});
  out << kFNote << '\n';
  out << "wrote " << (a.cfg.out / "compare.csv").string() << '\n';
  return kExitOk;
}

int cmd_golden(const std::vector<std::string>& names, const ExperimentConfig& cfg,
               std::ostream& out) {
  std::vector<GoldenMatrix> which;
  if (names.empty()) {
    which = {GoldenMatrix::M11, GoldenMatrix::Q30dB_5D, GoldenMatrix::Q24dB_4D};
  } else {
    for (const auto& n : names) {
      const auto g = parse_golden_name(n);
      if (!g) throw ConfigError("golden: unknown matrix '" + n + "' (M11, Q30dB_5D, Q24dB_4D)");
      which.push_back(*g);
    }
  }
  prepare_out(cfg.out);
  for (GoldenMatrix g : which) {
    const std::string text = golden_text(g);
    write_file(cfg.out / (std::string(golden_name(g)) + ".txt"),
               [&](std::ostream& os) { os << text; });
    if (which.size() > 1) out << "# " << golden_name(g) << '\n';
    out << text;
  }
  return kExitOk;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::numerical_failure:
    case ErrorKind::corrupted_state:
    case ErrorKind::construction_failed:
      return kExitNumerical;
    default:
      return kExitUsage;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"geoflow: rotations of finite constellations for Rayleigh fading channels"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "INI config file")->check(CLI::ExistingFile);
  Overrides ov;
  for (const auto& k : config_keys()) {
    const std::string key = std::string(k.section) + "." + k.name;
    ov.options.emplace_back(key, app.add_option(flag_for(k), ov.values[key], k.help));
  }
  app.add_flag("--unnormalized", ov.unnormalized, "use raw coordinates (constellation.normalize = false)");

  auto* optimize_cmd = app.add_subcommand("optimize", "geodesic flow at noise.snr_db; writes rotation.txt and trace.csv");
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte-Carlo CER over noise.grid; writes result.csv");
  auto* mindist_cmd = app.add_subcommand("mindist", "minimum product distance of the rotated constellation");
  auto* compare_cmd = app.add_subcommand("compare", "f and CER of two configurations; writes compare.csv");
  auto* golden_cmd = app.add_subcommand("golden", "dump the embedded reference matrices");

  std::string config_a, config_b, rotation_a, rotation_b;
  compare_cmd->add_option("--config-a", config_a, "config of A (default --config)")->check(CLI::ExistingFile);
  compare_cmd->add_option("--config-b", config_b, "config of B (default --config)")->check(CLI::ExistingFile);
  compare_cmd->add_option("--rotation-a", rotation_a, "rotation.source of A");
  compare_cmd->add_option("--rotation-b", rotation_b, "rotation.source of B");
  std::vector<std::string> golden_names;
  golden_cmd->add_option("names", golden_names, "M11 | Q30dB_5D | Q24dB_4D (default all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*optimize_cmd) return cmd_optimize(make_scenario(config_path, ov), out);
    if (*simulate_cmd) return cmd_simulate(make_scenario(config_path, ov), out);
    if (*mindist_cmd) return cmd_mindist(make_scenario(config_path, ov), out);
    if (*compare_cmd) {
      const Scenario a = make_scenario(config_a.empty() ? config_path : config_a, ov, rotation_a);
      const Scenario b = make_scenario(config_b.empty() ? config_path : config_b, ov, rotation_b);
      return cmd_compare(a, b, out);
    }
    ConfigTree tree = config_path.empty() ? ConfigTree::empty() : ConfigTree::load(config_path);
    ov.apply(tree);
    return cmd_golden(golden_names, build_config(tree), out);
  } catch (const ConfigError& e) {
    err << "geoflow: config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "geoflow: parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "geoflow: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "geoflow: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "geoflow: internal error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace geoflow::cli
