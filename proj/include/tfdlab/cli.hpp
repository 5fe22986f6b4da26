#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tfdlab/dephasing.hpp"
#include "tfdlab/ensemble.hpp"

namespace tfdlab::cli {

enum class Command { Syk, Gue, Times };

const char* to_string(Command cmd);

/// Bad config file, bad flag or bad value. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Time grid as given in the config; t_max defaults to 10x the plateau estimate.
struct GridConfig {
  TimeGrid::Kind kind = TimeGrid::Kind::Log;
  double t_min = 0.01;
  std::optional<double> t_max;
  int n_points = 400;

  TimeGrid resolve(double t_plateau_estimate) const;
};

struct RunConfig {
  Command command = Command::Syk;
  /// SykParams for syk and times (n_majorana replaced per sweep entry), GueParams for gue.
  ModelParams model;
  std::vector<int> n_values;  // times only
  std::vector<double> betas;  // one entry except for gue
  std::vector<double> gammas;  // always {0} for gue
  int n_samples = 10;
  std::uint64_t master_seed = 0;
  GridConfig grid;
  int threads = 1;
  std::optional<std::string> cache_dir;
  std::string output_dir = "out";
  std::vector<Observable> observables{Observable::Fidelity};
  bool plot = false;
  DetectorConfig detector;

  /// Throws ConfigError.
  void validate() const;
  /// Ensemble for one model; `n_majorana` overrides the SYK size when set.
  EnsembleSpec ensemble_spec(std::optional<int> n_majorana = std::nullopt) const;
};

/// Parses a JSON config document. Unknown keys are rejected. Throws ConfigError.
RunConfig parse_config(Command command, const std::string& json_text);
RunConfig load_config(Command command, const std::string& path);

struct Overrides {
  std::optional<std::string> output_dir;
  bool plot = false;
  std::optional<int> threads;
};

/// Flag > environment (TFDLAB_THREADS, passed as `env_threads`) > config.
void apply_overrides(RunConfig& config, const Overrides& overrides, const char* env_threads);

/// Output directory exists and is writable, or can be created. Throws ConfigError.
void check_output_dir(const std::string& dir);

// Each returns an exit code; runtime failures are reported on stderr.
int cmd_syk(const RunConfig& config);
int cmd_gue(const RunConfig& config);
int cmd_times(const RunConfig& config);

/// File names used by the commands.
std::string observable_csv_name(Observable obs, double gamma);
std::string gue_csv_name(double beta);

/// Full command line: `tfdlab syk|gue|times --config <file> [--out <dir>] [--plot] [--threads k]`.
int run(int argc, char** argv);

}  // namespace tfdlab::cli
