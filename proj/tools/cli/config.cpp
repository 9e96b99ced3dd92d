#include "config.hpp"

#include <charconv>
#include <cmath>
#include <set>

#include <boost/property_tree/ini_parser.hpp>

#include "geoflow/cyclotomic.hpp"
#include "geoflow/error.hpp"
#include "geoflow/matrix_io.hpp"

namespace geoflow::cli {

namespace fs = std::filesystem;

const std::vector<KeyInfo>& config_keys() {
  static const std::vector<KeyInfo> keys = {
      {"constellation", "spec", "hypercube:<n> | nuqam16:<gamma> | qam:<M> | file:<path>"},
      {"constellation", "normalize", "scale to unit average energy (default true)"},
      {"rotation", "source",
       "identity | angle:<deg> | dvb:<r> | cyclotomic:<m> | golden:<name> | file:<path> | "
       "optimize | optimize-sweep"},
      {"noise", "snr_db", "optimization SNR in dB (N0 = 10^(-snr/10))"},
      {"noise", "grid", "simulation SNR grid, start:stop:step or a comma list"},
      {"noise", "convention", "dimension_scaled (sigma^2 = n N0) | half_n0 (sigma^2 = N0/2)"},
      {"optimizer", "step_size", "geodesic step h"},
      {"optimizer", "iterations", "iterations N"},
      {"optimizer", "gradient", "analytic | central_difference"},
      {"optimizer", "fd_delta", "central difference perturbation"},
      {"optimizer", "init", "identity | random:<seed> | any fixed rotation source"},
      {"optimizer", "reortho_period", "iterations between drift checks"},
      {"optimizer", "reortho_threshold", "project back when drift exceeds this"},
      {"optimizer", "track_best", "return the best iterate instead of the last"},
      {"optimizer", "escape", "perturb a stationary starting point"},
      {"optimizer", "escape_threshold", "relative ||r_0|| below which to perturb"},
      {"optimizer", "escape_scale", "size of the perturbation"},
      {"optimizer", "escape_seed", "seed of the perturbation (default run.seed)"},
      {"optimizer", "partitions", "fixed split of the pair sum"},
      {"optimizer", "continuation", "pre-stages snr:h:iterations, comma separated"},
      {"optimizer", "restarts", "independent starts of the whole schedule; the lowest f wins"},
      {"simulation", "trials", "trials per SNR point"},
      {"simulation", "shards", "fixed split of the trials"},
      {"simulation", "noiseless", "z = 0"},
      {"simulation", "unit_fade", "alpha = 1"},
      {"run", "seed", "master seed"},
      {"run", "out", "output directory"},
      {"run", "threads", "worker cap; never changes results"},
      {"run", "trace_every", "keep every k-th trace row"},
  };
  return keys;
}

namespace {

bool known_key(const std::string& key) {
  for (const auto& k : config_keys()) {
    if (key == std::string(k.section) + "." + k.name) return true;
  }
  return false;
}

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) {
    throw ConfigError(key + ": cannot parse '" + text + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw ConfigError(key + ": must be finite");
  }
  return value;
}

bool parse_bool(const std::string& text, const std::string& key) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::pair<std::string, std::string> split_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) return {spec, ""};
  return {spec.substr(0, colon), spec.substr(colon + 1)};
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

fs::path resolve_file(const ConfigTree& tree, const std::string& key, const std::string& path) {
  if (path.empty()) throw ConfigError(key + ": file: needs a path");
  fs::path p(path);
  if (p.is_relative()) p = tree.base_dir(key) / p;
  if (!fs::exists(p)) throw ConfigError(key + ": file not found: " + p.string());
  return p;
}

const std::set<std::string> kFixedSources = {"identity", "angle", "dvb", "cyclotomic", "golden",
                                             "file"};

void check_rotation_source(const std::string& source, const std::string& key, bool allow_optimize,
                           bool allow_random) {
  const auto [name, arg] = split_spec(source);
  if (allow_optimize && (source == "optimize" || source == "optimize-sweep")) return;
  if (allow_random && name == "random") {
    parse_number<std::uint64_t>(arg, key);
    return;
  }
  if (!kFixedSources.count(name)) throw ConfigError(key + ": unknown rotation source '" + source + "'");
  if (name == "identity" && !arg.empty()) throw ConfigError(key + ": identity takes no argument");
  if (name == "angle" || name == "dvb") parse_number<double>(arg, key);
  if (name == "cyclotomic") parse_number<int>(arg, key);
  if (name == "golden" && !parse_golden_name(arg)) {
    throw ConfigError(key + ": unknown golden matrix '" + arg + "' (M11, Q30dB_5D, Q24dB_4D)");
  }
}

}  // namespace

ConfigTree ConfigTree::load(const fs::path& ini) {
  ConfigTree t;
  if (!fs::exists(ini)) throw ConfigError("config: file not found: " + ini.string());
  try {
    boost::property_tree::read_ini(ini.string(), t.tree_);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  for (const auto& [section, body] : t.tree_) {
    if (body.empty()) throw ConfigError(section + ": key outside any section");
    for (const auto& [name, value] : body) {
      const std::string key = section + "." + name;
      if (!known_key(key)) throw ConfigError(key + ": unknown key");
    }
  }
  t.file_dir_ = fs::absolute(ini).parent_path();
  return t;
}

ConfigTree ConfigTree::empty() {
  ConfigTree t;
  t.file_dir_ = fs::current_path();
  return t;
}

void ConfigTree::set(const std::string& key, const std::string& value) {
  if (!known_key(key)) throw ConfigError(key + ": unknown key");
  tree_.put(key, value);
  from_flag_[key] = true;
}

std::optional<std::string> ConfigTree::get(const std::string& key) const {
  if (auto v = tree_.get_optional<std::string>(key)) return *v;
  return std::nullopt;
}

fs::path ConfigTree::base_dir(const std::string& key) const {
  const auto it = from_flag_.find(key);
  if (it != from_flag_.end() && it->second) return fs::current_path();
  return file_dir_;
}

std::vector<double> parse_grid(const std::string& text, const char* key) {
  std::vector<double> grid;
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ConfigError(std::string(key) + ": expected start:stop:step");
    const double start = parse_number<double>(parts[0], key);
    const double stop = parse_number<double>(parts[1], key);
    const double step = parse_number<double>(parts[2], key);
    if (!(step > 0.0) || stop < start) {
      throw ConfigError(std::string(key) + ": need step > 0 and stop >= start");
    }
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 100000) throw ConfigError(std::string(key) + ": too many grid points");
    for (long i = 0; i < count; ++i) grid.push_back(start + static_cast<double>(i) * step);
  } else {
    for (const auto& p : split(text, ',')) grid.push_back(parse_number<double>(p, key));
  }
  return grid;
}

ExperimentConfig build_config(const ConfigTree& tree) {
  ExperimentConfig cfg;
  auto str = [&](const char* key, std::string& out) {
    if (auto v = tree.get(key)) out = *v;
  };
  auto num = [&]<typename T>(const char* key, T& out) {
    if (auto v = tree.get(key)) out = parse_number<T>(*v, key);
  };
  auto flag = [&](const char* key, bool& out) {
    if (auto v = tree.get(key)) out = parse_bool(*v, key);
  };

  num("run.seed", cfg.seed);
  if (auto v = tree.get("run.out")) {
    if (v->empty()) throw ConfigError("run.out: must not be empty");
    cfg.out = *v;
  }
  num("run.threads", cfg.threads);
  if (cfg.threads < 1) throw ConfigError("run.threads: must be >= 1");
  num("run.trace_every", cfg.trace_every);
  if (cfg.trace_every < 1) throw ConfigError("run.trace_every: must be >= 1");

  str("constellation.spec", cfg.constellation_spec);
  flag("constellation.normalize", cfg.normalize);
  {
    const auto [name, arg] = split_spec(cfg.constellation_spec);
    const char* key = "constellation.spec";
    if (name == "hypercube" || name == "qam") {
      parse_number<int>(arg, key);
    } else if (name == "nuqam16") {
      parse_number<double>(arg, key);
    } else if (name == "file") {
      cfg.constellation_file = resolve_file(tree, key, arg);
    } else {
      throw ConfigError(std::string(key) + ": unknown constellation '" + cfg.constellation_spec + "'");
    }
  }

  str("rotation.source", cfg.rotation_source);
  check_rotation_source(cfg.rotation_source, "rotation.source", true, false);
  if (split_spec(cfg.rotation_source).first == "file") {
    cfg.rotation_file = resolve_file(tree, "rotation.source", split_spec(cfg.rotation_source).second);
  }

  num("noise.snr_db", cfg.snr_db);
  if (auto v = tree.get("noise.grid")) {
    cfg.grid = parse_grid(*v, "noise.grid");
  } else {
    cfg.grid = {cfg.snr_db};
  }
  if (auto v = tree.get("noise.convention")) {
    try {
      cfg.convention = parse_noise_convention(*v);
    } catch (const Error& e) {
      throw ConfigError(std::string("noise.convention: ") + e.what());
    }
  }

  OptimizerConfig& opt = cfg.optimizer;
  opt.eval.partitions = 8;
  opt.escape.seed = cfg.seed;
  num("optimizer.step_size", opt.step_size);
  num("optimizer.iterations", opt.iterations);
  if (auto v = tree.get("optimizer.gradient")) {
    if (*v == "analytic") {
      opt.gradient = GradientMode::analytic;
    } else if (*v == "central_difference") {
      opt.gradient = GradientMode::central_difference;
    } else {
      throw ConfigError("optimizer.gradient: expected analytic or central_difference, got '" + *v + "'");
    }
  }
  num("optimizer.fd_delta", opt.fd_delta);
  str("optimizer.init", cfg.init_source);
  check_rotation_source(cfg.init_source, "optimizer.init", false, true);
  if (split_spec(cfg.init_source).first == "file") {
    cfg.init_file = resolve_file(tree, "optimizer.init", split_spec(cfg.init_source).second);
  }
  num("optimizer.reortho_period", opt.reortho_period);
  num("optimizer.reortho_threshold", opt.reortho_threshold);
  flag("optimizer.track_best", opt.track_best);
  flag("optimizer.escape", opt.escape.enabled);
  num("optimizer.escape_threshold", opt.escape.threshold);
  num("optimizer.escape_scale", opt.escape.scale);
  num("optimizer.escape_seed", opt.escape.seed);
  num("optimizer.partitions", opt.eval.partitions);
  opt.eval.threads = cfg.threads;
  if (auto v = tree.get("optimizer.continuation"); v && !v->empty()) {
    for (const auto& item : split(*v, ',')) {
      const auto parts = split(item, ':');
      if (parts.size() != 3) {
        throw ConfigError("optimizer.continuation: expected snr:h:iterations, got '" + item + "'");
      }
      Stage s{parse_number<double>(parts[0], "optimizer.continuation"),
              parse_number<double>(parts[1], "optimizer.continuation"),
              parse_number<int>(parts[2], "optimizer.continuation")};
      if (!(s.step_size > 0.0) || s.iterations < 1) {
        throw ConfigError("optimizer.continuation: need h > 0 and iterations >= 1");
      }
      cfg.continuation.push_back(s);
    }
  }
  num("optimizer.restarts", cfg.restarts);
  if (cfg.restarts < 1) throw ConfigError("optimizer.restarts: must be >= 1");
  if (cfg.restarts > 1 && cfg.rotation_source == "optimize-sweep") {
    throw ConfigError("optimizer.restarts: optimize-sweep takes a single start");
  }
  try {
    opt.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  SimulationConfig& sim = cfg.simulation;
  sim.seed = cfg.seed;
  sim.threads = cfg.threads;
  sim.convention = cfg.convention;
  sim.snr_db_grid = cfg.grid;
  num("simulation.trials", sim.trials_per_point);
  num("simulation.shards", sim.shards);
  flag("simulation.noiseless", sim.noiseless);
  flag("simulation.unit_fade", sim.unit_fade);
  try {
    sim.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

Constellation make_constellation(const ExperimentConfig& cfg) {
  const auto [name, arg] = split_spec(cfg.constellation_spec);
  const auto norm = cfg.normalize ? Normalization::unit_energy : Normalization::raw;
  const char* key = "constellation.spec";
  if (name == "hypercube") return make_hypercube(parse_number<int>(arg, key), norm);
  if (name == "qam") return make_qam(parse_number<int>(arg, key), norm);
  if (name == "nuqam16") return make_nuqam16(NuqamParams(parse_number<double>(arg, key)), norm);
  const Constellation c = load_constellation(cfg.constellation_file);
  return cfg.normalize ? c.normalized() : c;
}

bool is_optimized_source(const std::string& source) {
  return source == "optimize" || source == "optimize-sweep";
}

RotationMatrix fixed_rotation(const std::string& source, const fs::path& file, int dim,
                              const char* key) {
  const auto [name, arg] = split_spec(source);
  RotationMatrix q = RotationMatrix::identity(std::max(dim, 1));
  if (name == "identity") {
    return q;
  } else if (name == "angle") {
    q = make_rotation_2d(degrees_to_radians(parse_number<double>(arg, key)));
  } else if (name == "dvb") {
    q = make_dvb_rotation_4d(DvbRotationParam(parse_number<double>(arg, key)));
  } else if (name == "cyclotomic") {
    q = build_generator(CyclotomicSpec(parse_number<int>(arg, key))).matrix;
  } else if (name == "golden") {
    q = golden_rotation(*parse_golden_name(arg));
  } else if (name == "file") {
    q = RotationMatrix::from_matrix(load_matrix(file));
  } else {
    throw ConfigError(std::string(key) + ": '" + source + "' is not a fixed rotation");
  }
  if (q.dim() != dim) {
    throw Error(ErrorKind::dimension_mismatch, std::string(key) + ": rotation '" + source +
                                                   "' has dimension " + std::to_string(q.dim()) +
                                                   ", constellation has " + std::to_string(dim));
  }
  return q;
}

}  // namespace geoflow::cli
