#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tfdlab/spectra.hpp"
#include "tfdlab/times.hpp"

namespace tfdlab {

/// Energy-dephasing channel on the thermofield double: inverse temperature
/// beta and dephasing strength gamma (gamma = 0 is unitary evolution).
struct DephasingParams {
  double beta = 0.0;
  double gamma = 0.0;

  void validate() const;
};

/// Values of one observable on a time grid.
struct ObservableSeries {
  std::string label;
  std::vector<double> times;
  std::vector<double> values;
  std::optional<std::vector<double>> sem;

  void validate() const;
};

enum class Observable { Fidelity, Purity, Renyi2, Negativity, Sff };

const char* to_string(Observable obs);
Observable parse_observable(const std::string& text);

/// Evaluates every observable of one (spectrum, channel) pair; Boltzmann
/// weights are computed once. Pair sums run over merged levels with
/// multiplicity weights, m < n terms doubled.
class DephasingEvaluator {
 public:
  DephasingEvaluator(const Spectrum& spectrum, DephasingParams params);

  double fidelity(double t) const;
  double purity(double t) const;
  double renyi2(double t) const;
  double log_negativity(double t) const;
  /// |Z(beta + i tau)|^2 / Z(beta)^2.
  double sff(double tau) const;
  /// Dispatch by observable; Sff is reported at tau = 2t, and Fidelity at
  /// gamma = 0 takes the O(levels) route through sff.
  double evaluate(Observable obs, double t) const;

  const DephasingParams& params() const noexcept { return params_; }

 private:
  // sum_mn a_m b_n kernel(|E_m - E_n|) with exponent rate*dE^2 cut off once
  // the Gaussian factor underflows.
  template <class Kernel>
  double pair_sum(const std::vector<double>& a, double rate, Kernel&& kernel) const;

  std::vector<double> energies_;
  std::vector<double> weights_;       // N_n exp(-beta E_n) / Z(beta)
  std::vector<double> half_weights_;  // N_n exp(-beta E_n / 2) / sqrt(Z(beta))
  DephasingParams params_;
};

/// Survival probability of the TFD under dephasing.
double fidelity(const Spectrum& spectrum, const DephasingParams& params, double t);

/// Density matrix on the |mm><nn| support, one row per state (levels
/// expanded by multiplicity). Total dimension limited to 256.
Eigen::MatrixXcd evolve_tfd(const Spectrum& spectrum, const DephasingParams& params, double t);

/// <TFD| rho |TFD> for a matrix from evolve_tfd.
double tfd_overlap(const Spectrum& spectrum, double beta, const Eigen::MatrixXcd& rho);

/// Composite Gauss-Legendre rule on |u| <= cutoff.
struct QuadratureSpec {
  int nodes_per_panel = 16;
  int panels = 8;
  double cutoff = 6.0;

  int nodes() const { return nodes_per_panel * panels; }
  /// Enough panels to resolve cos(omega u) on the interval.
  static QuadratureSpec for_bandwidth(double omega);
};

/// (1/sqrt(pi)) * integral over |u| <= cutoff of exp(-u^2) f(u).
double gaussian_average(const std::function<double(double)>& f, const QuadratureSpec& quad);

/// Fidelity as the form factor smeared by a Gaussian of width 2 sqrt(gamma t)
/// around tau = 2t. Requires gamma > 0 and t > 0. A default-constructed quad
/// is widened to cover the spectral bandwidth.
double fidelity_by_convolution(const Spectrum& spectrum, const DephasingParams& params, double t,
                               std::optional<QuadratureSpec> quad = std::nullopt);

double purity(const Spectrum& spectrum, const DephasingParams& params, double t);
double renyi2(const Spectrum& spectrum, const DephasingParams& params, double t);
double log_negativity(const Spectrum& spectrum, const DephasingParams& params, double t);

/// 1 / (4 gamma Var_beta(E)); infinite for gamma = 0 (flagged unitary) or
/// zero variance.
DecoherenceTime decoherence_time(const Spectrum& spectrum, const DephasingParams& params);

}  // namespace tfdlab
