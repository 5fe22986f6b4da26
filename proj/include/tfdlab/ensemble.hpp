#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tfdlab/dephasing.hpp"
#include "tfdlab/gue.hpp"
#include "tfdlab/spectra.hpp"
#include "tfdlab/syk.hpp"
#include "tfdlab/times.hpp"

namespace tfdlab {

struct TimeGrid {
  enum class Kind { Log, Linear };

  Kind kind = Kind::Log;
  double t_min = 0.01;
  double t_max = 100.0;
  int n_points = 400;

  void validate() const;
  std::vector<double> points() const;
  /// LOG grid, 400 points, from 0.01 to 10 * t_plateau.
  static TimeGrid default_for(double t_plateau);
};

using ModelParams = std::variant<SykParams, GueParams>;

struct EnsembleSpec {
  ModelParams model;
  std::vector<DephasingParams> dephasing;
  int n_samples = 1;
  std::uint64_t master_seed = 0;
  TimeGrid grid;
  int threads = 1;
  /// When set, spectra are read from / written to this directory.
  std::optional<std::string> cache_dir;

  void validate() const;
};

/// Mean and standard error of one observable under one dephasing setting.
struct EnsembleCurve {
  std::size_t dephasing_index = 0;
  Observable observable = Observable::Fidelity;
  ObservableSeries series;  // values = mean; sem absent when n_samples == 1
  int n_samples = 0;
};

/// Per-realization scalars, one entry per dephasing setting.
struct RealizationSummary {
  std::uint64_t seed = 0;
  std::uint64_t spectrum_hash = 0;
  int dimension = 0;
  std::vector<double> plateau_value;
  std::vector<DecoherenceTime> tau_D;
};

struct EnsembleResult {
  std::vector<EnsembleCurve> curves;
  std::vector<RealizationSummary> realizations;

  const EnsembleCurve& curve(std::size_t dephasing_index, Observable obs) const;
  /// Realization-averaged G(beta)/Z(beta)^2 for a dephasing setting.
  double mean_plateau_value(std::size_t dephasing_index) const;
  /// Realization-averaged exact decoherence time; infinite if any is.
  DecoherenceTime mean_tau_D(std::size_t dephasing_index) const;
};

/// Model parameters for realization `index` (seed split from the master).
ModelParams realization_params(const EnsembleSpec& spec, std::size_t index);

/// Spectrum of realization `index`, going through the cache directory when set.
Spectrum realization_spectrum(const EnsembleSpec& spec, std::size_t index);

/// Spectrum for fixed model parameters (seed included).
Spectrum model_spectrum(const ModelParams& params);

/// Cache file name for fixed model parameters.
std::string spectrum_cache_name(const ModelParams& params);

EnsembleResult run_ensemble(const EnsembleSpec& spec, const std::vector<Observable>& observables);

// --- curve features ---

struct DetectorConfig {
  int window = 7;
  double eps_dip = 0.2;
  double eps_plateau = 0.15;

  void validate() const;
};

struct Dip {
  double time;
  double value;  // smoothed value at the dip
  std::size_t index;
};

/// Centered moving average of log(values); the window shrinks at the ends.
std::vector<double> smooth_log(const std::vector<double>& values, int window);

/// Global minimum of the smoothed curve before it settles into the plateau
/// band (1 + eps_plateau); none if the minimum stays within (1 + eps_dip) of
/// the plateau or the curve never recovers from it.
std::optional<Dip> detect_dip(const ObservableSeries& series, double plateau_value,
                              const DetectorConfig& config = {});

/// Earliest time after the dip (or the first grid point) from which every
/// smoothed value stays within a factor (1 + eps_plateau) of the plateau.
std::optional<double> detect_plateau(const ObservableSeries& series, double plateau_value,
                                     const DetectorConfig& config = {});

/// Dip and plateau estimates for SYK from the Gaussian density of states,
/// with c_N = N/400, alpha = 2 - delta_{4, N mod 8} and tau_D = 1/(gamma N).
CharacteristicTimes estimate_times_syk(int n_majorana, double beta, double gamma);

}  // namespace tfdlab
