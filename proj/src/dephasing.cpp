#include "tfdlab/dephasing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tfdlab {

namespace {

// exp(-x) is exactly zero in double precision beyond this.
constexpr double kUnderflowExponent = 746.0;
constexpr int kMaxOracleDimension = 256;

struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Nodes and weights on [-1, 1] by Newton iteration on P_n.
GaussLegendre gauss_legendre(int n) {
  GaussLegendre rule{std::vector<double>(n), std::vector<double>(n)};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

}  // namespace

void DephasingParams::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw InvalidArgument("beta must be finite and >= 0");
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw InvalidArgument("gamma must be finite and >= 0");
  }
}

void ObservableSeries::validate() const {
  if (times.size() != values.size()) throw InvalidArgument(label + ": times/values length mismatch");
  if (sem && sem->size() != values.size()) throw InvalidArgument(label + ": sem length mismatch");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0) || (i > 0 && !(times[i] > times[i - 1]))) {
      throw InvalidArgument(label + ": times must be positive and strictly increasing");
    }
    if (!std::isfinite(values[i])) throw InvalidArgument(label + ": non-finite value");
  }
}

const char* to_string(Observable obs) {
  switch (obs) {
    case Observable::Fidelity: return "fidelity";
    case Observable::Purity: return "purity";
    case Observable::Renyi2: return "renyi2";
    case Observable::Negativity: return "negativity";
    case Observable::Sff: return "sff";
  }
  return "?";
}

Observable parse_observable(const std::string& text) {
  for (auto obs : {Observable::Fidelity, Observable::Purity, Observable::Renyi2,
                   Observable::Negativity, Observable::Sff}) {
    if (text == to_string(obs)) return obs;
  }
  throw InvalidArgument("unknown observable '" + text +
                        "' (expected fidelity|purity|renyi2|negativity|sff)");
}

DephasingEvaluator::DephasingEvaluator(const Spectrum& spectrum, DephasingParams params)
    : params_(params) {
  params_.validate();
  const auto& levels = spectrum.levels();
  const double e0 = spectrum.min_energy();
  energies_.reserve(levels.size());
  weights_.reserve(levels.size());
  half_weights_.reserve(levels.size());
  double z = 0.0;
  for (const auto& level : levels) {
    energies_.push_back(level.energy - e0);
    const double x = std::exp(-params_.beta * (level.energy - e0));
    weights_.push_back(level.multiplicity * x);
    half_weights_.push_back(level.multiplicity * std::sqrt(x));
    z += weights_.back();
  }
  const double root_z = std::sqrt(z);
  for (double& w : weights_) w /= z;
  for (double& w : half_weights_) w /= root_z;
}

template <class Kernel>
double DephasingEvaluator::pair_sum(const std::vector<double>& a, double rate,
                                    Kernel&& kernel) const {
  const std::size_t n = energies_.size();
  double diagonal = 0.0;
  for (std::size_t m = 0; m < n; ++m) diagonal += a[m] * a[m];
  double off = 0.0;
  for (std::size_t m = 0; m + 1 < n; ++m) {
    double row = 0.0;
    for (std::size_t k = m + 1; k < n; ++k) {
      const double gap = energies_[k] - energies_[m];
      if (rate * gap * gap > kUnderflowExponent) break;
      row += a[k] * kernel(gap);
    }
    off += a[m] * row;
  }
  return diagonal + 2.0 * off;
}

double DephasingEvaluator::fidelity(double t) const {
  if (t < 0.0) throw InvalidArgument("fidelity: t must be >= 0");
  if (t == 0.0) return 1.0;
  const double rate = params_.gamma * t;
  return pair_sum(weights_, rate, [&](double gap) {
    return std::cos(2.0 * t * gap) * std::exp(-rate * gap * gap);
  });
}

double DephasingEvaluator::purity(double t) const {
  if (t < 0.0) throw InvalidArgument("purity: t must be >= 0");
  if (t == 0.0 || params_.gamma == 0.0) return 1.0;
  const double rate = 2.0 * params_.gamma * t;
  return std::min(1.0, pair_sum(weights_, rate, [&](double gap) { return std::exp(-rate * gap * gap); }));
}

double DephasingEvaluator::renyi2(double t) const { return -std::log2(purity(t)); }

double DephasingEvaluator::log_negativity(double t) const {
  if (t < 0.0) throw InvalidArgument("log_negativity: t must be >= 0");
  const double rate = params_.gamma * t;
  return std::max(0.0, std::log2(pair_sum(half_weights_, rate, [&](double gap) {
                    return std::exp(-rate * gap * gap);
                  })));
}

double DephasingEvaluator::sff(double tau) const {
  if (tau == 0.0) return 1.0;
  double re = 0.0, im = 0.0;
  for (std::size_t n = 0; n < energies_.size(); ++n) {
    const double phase = tau * energies_[n];
    re += weights_[n] * std::cos(phase);
    im -= weights_[n] * std::sin(phase);
  }
  return std::min(1.0, re * re + im * im);
}

double DephasingEvaluator::evaluate(Observable obs, double t) const {
  switch (obs) {
    case Observable::Fidelity:
      return params_.gamma == 0.0 ? sff(2.0 * t) : fidelity(t);
    case Observable::Purity: return purity(t);
    case Observable::Renyi2: return renyi2(t);
    case Observable::Negativity: return log_negativity(t);
    case Observable::Sff: return sff(2.0 * t);
  }
  return 0.0;
}

double fidelity(const Spectrum& spectrum, const DephasingParams& params, double t) {
  return DephasingEvaluator(spectrum, params).fidelity(t);
}

Eigen::MatrixXcd evolve_tfd(const Spectrum& spectrum, const DephasingParams& params, double t) {
  params.validate();
  if (spectrum.dimension() > kMaxOracleDimension) {
    throw InvalidArgument("evolve_tfd supports total dimension <= " +
                          std::to_string(kMaxOracleDimension));
  }
  if (t < 0.0) throw InvalidArgument("evolve_tfd: t must be >= 0");
  std::vector<double> energies;
  for (const auto& level : spectrum.levels()) energies.insert(energies.end(), level.multiplicity, level.energy);
  const double e0 = spectrum.min_energy();
  double z = 0.0;
  for (double e : energies) z += std::exp(-params.beta * (e - e0));
  const auto dim = static_cast<Eigen::Index>(energies.size());
  Eigen::MatrixXcd rho(dim, dim);
  for (Eigen::Index m = 0; m < dim; ++m) {
    for (Eigen::Index n = 0; n < dim; ++n) {
      const double gap = energies[m] - energies[n];
      const double amp = std::exp(-params.beta * (energies[m] + energies[n] - 2.0 * e0) / 2.0 -
                                  params.gamma * t * gap * gap) / z;
      rho(m, n) = std::polar(amp, -2.0 * t * gap);
    }
  }
  return rho;
}

double tfd_overlap(const Spectrum& spectrum, double beta, const Eigen::MatrixXcd& rho) {
  std::vector<double> amps;
  const double e0 = spectrum.min_energy();
  double z = 0.0;
  for (const auto& level : spectrum.levels()) {
    const double x = std::exp(-beta * (level.energy - e0));
    amps.insert(amps.end(), level.multiplicity, std::sqrt(x));
    z += level.multiplicity * x;
  }
  if (static_cast<Eigen::Index>(amps.size()) != rho.rows()) {
    throw InvalidArgument("tfd_overlap: matrix does not match spectrum dimension");
  }
  Eigen::VectorXcd psi(rho.rows());
  for (Eigen::Index i = 0; i < rho.rows(); ++i) psi(i) = amps[i] / std::sqrt(z);
  return (psi.adjoint() * rho * psi)(0, 0).real();
}

QuadratureSpec QuadratureSpec::for_bandwidth(double omega) {
  QuadratureSpec q;
  const int needed = static_cast<int>(std::ceil(std::abs(omega) * q.cutoff / 4.0));
  q.panels = std::max(q.panels, needed);
  return q;
}

double gaussian_average(const std::function<double(double)>& f, const QuadratureSpec& quad) {
  if (quad.nodes_per_panel < 1 || quad.panels < 1 || !(quad.cutoff > 0.0)) {
    throw InvalidArgument("quadrature needs positive node, panel counts and cutoff");
  }
  const auto rule = gauss_legendre(quad.nodes_per_panel);
  const double h = 2.0 * quad.cutoff / quad.panels;
  double total = 0.0;
  for (int p = 0; p < quad.panels; ++p) {
    const double mid = -quad.cutoff + (p + 0.5) * h;
    double panel = 0.0;
    for (int i = 0; i < quad.nodes_per_panel; ++i) {
      const double u = mid + 0.5 * h * rule.nodes[i];
      panel += rule.weights[i] * std::exp(-u * u) * f(u);
    }
    total += 0.5 * h * panel;
  }
  return total / std::sqrt(std::numbers::pi);
}

double fidelity_by_convolution(const Spectrum& spectrum, const DephasingParams& params, double t,
                               std::optional<QuadratureSpec> quad) {
  params.validate();
  if (!(params.gamma > 0.0)) {
    throw InvalidArgument("fidelity_by_convolution needs gamma > 0; use fidelity() for unitary evolution");
  }
  if (!(t > 0.0)) throw InvalidArgument("fidelity_by_convolution needs t > 0");
  const double spread = 2.0 * std::sqrt(params.gamma * t);
  const QuadratureSpec rule = quad ? *quad : QuadratureSpec::for_bandwidth(spread * spectrum.width());
  const DephasingEvaluator eval(spectrum, params);
  return gaussian_average([&](double u) { return eval.sff(2.0 * t + spread * u); }, rule);
}

double purity(const Spectrum& spectrum, const DephasingParams& params, double t) {
  return DephasingEvaluator(spectrum, params).purity(t);
}

double renyi2(const Spectrum& spectrum, const DephasingParams& params, double t) {
  return DephasingEvaluator(spectrum, params).renyi2(t);
}

double log_negativity(const Spectrum& spectrum, const DephasingParams& params, double t) {
  return DephasingEvaluator(spectrum, params).log_negativity(t);
}

DecoherenceTime decoherence_time(const Spectrum& spectrum, const DephasingParams& params) {
  params.validate();
  if (params.gamma == 0.0) return DecoherenceTime::infinite(true);
  const double var = energy_variance(spectrum, params.beta);
  if (var <= 0.0) return DecoherenceTime::infinite(false);
  return DecoherenceTime::finite(1.0 / (4.0 * params.gamma * var));
}

}  // namespace tfdlab
