#pragma once
// Experiment configuration: an INI file with sections constellation,
// rotation, noise, optimizer, simulation and run. Every key has a flag of the
// same name with '_' spelled '-'.
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "geoflow/channel.hpp"
#include "geoflow/constellation.hpp"
#include "geoflow/optimizer.hpp"

namespace geoflow::cli {

/// Bad or missing configuration; the message starts with the key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KeyInfo {
  const char* section;
  const char* name;
  const char* help;
};

/// All accepted keys, in documentation order.
const std::vector<KeyInfo>& config_keys();

/// Raw key/value pairs plus the directory that relative paths resolve
/// against for each key.
class ConfigTree {
 public:
  static ConfigTree load(const std::filesystem::path& ini);
  static ConfigTree empty();

  void set(const std::string& key, const std::string& value);
  std::optional<std::string> get(const std::string& key) const;
  std::filesystem::path base_dir(const std::string& key) const;

 private:
  boost::property_tree::ptree tree_;
  std::filesystem::path file_dir_;
  std::map<std::string, bool> from_flag_;
};

struct Stage {
  double snr_db;
  double step_size;
  int iterations;
};

struct ExperimentConfig {
  std::string constellation_spec = "hypercube:2";
  bool normalize = true;
  std::filesystem::path constellation_file;  ///< resolved for file: specs

  std::string rotation_source = "identity";
  std::filesystem::path rotation_file;

  double snr_db = 24.0;
  std::vector<double> grid;  ///< falls back to {snr_db}
  NoiseConvention convention = NoiseConvention::dimension_scaled;

  OptimizerConfig optimizer;
  std::string init_source = "identity";
  std::filesystem::path init_file;
  std::vector<Stage> continuation;
  int restarts = 1;

  SimulationConfig simulation;

  std::uint64_t seed = 1;
  std::filesystem::path out = ".";
  int threads = 1;
  int trace_every = 1;
};

/// Validates every key and throws ConfigError naming the first bad one.
ExperimentConfig build_config(const ConfigTree& tree);

Constellation make_constellation(const ExperimentConfig& cfg);

/// identity | angle:<deg> | dvb:<r> | cyclotomic:<m> | golden:<name> |
/// file:<path>. `key` names the config field in error messages.
RotationMatrix fixed_rotation(const std::string& source, const std::filesystem::path& file,
                              int dim, const char* key);

bool is_optimized_source(const std::string& source);

/// "20:28:1" (inclusive) or "20,22,24".
std::vector<double> parse_grid(const std::string& text, const char* key);

}  // namespace geoflow::cli
