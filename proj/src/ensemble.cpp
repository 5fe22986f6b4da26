#include "tfdlab/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include "tfdlab/numfmt.hpp"
#include "tfdlab/parallel.hpp"
#include "tfdlab/rng.hpp"

namespace tfdlab {

void TimeGrid::validate() const {
  if (!(t_min > 0.0) || !(t_max > t_min) || !std::isfinite(t_max)) {
    throw InvalidArgument("time grid needs 0 < t_min < t_max");
  }
  if (n_points < 2) throw InvalidArgument("time grid needs at least 2 points");
}

std::vector<double> TimeGrid::points() const {
  validate();
  std::vector<double> out(n_points);
  const double last = n_points - 1;
  for (int i = 0; i < n_points; ++i) {
    if (kind == Kind::Log) {
      out[i] = t_min * std::pow(t_max / t_min, i / last);
    } else {
      out[i] = t_min + (t_max - t_min) * (i / last);
    }
  }
  out.back() = t_max;
  return out;
}

TimeGrid TimeGrid::default_for(double t_plateau) {
  TimeGrid grid;
  grid.t_max = 10.0 * t_plateau;
  return grid;
}

void EnsembleSpec::validate() const {
  if (n_samples < 1) throw InvalidArgument("n_samples must be >= 1");
  if (dephasing.empty()) throw InvalidArgument("at least one dephasing setting is required");
  for (const auto& p : dephasing) p.validate();
  grid.validate();
  std::visit([](const auto& m) { m.validate(); }, model);
}

const EnsembleCurve& EnsembleResult::curve(std::size_t dephasing_index, Observable obs) const {
  for (const auto& c : curves) {
    if (c.dephasing_index == dephasing_index && c.observable == obs) return c;
  }
  throw InvalidArgument(std::string("no curve for observable ") + to_string(obs));
}

double EnsembleResult::mean_plateau_value(std::size_t dephasing_index) const {
  std::vector<double> v;
  for (const auto& r : realizations) v.push_back(r.plateau_value.at(dephasing_index));
  return pairwise_sum(v.data(), v.size()) / static_cast<double>(v.size());
}

DecoherenceTime EnsembleResult::mean_tau_D(std::size_t dephasing_index) const {
  std::vector<double> v;
  for (const auto& r : realizations) {
    const auto& tau = r.tau_D.at(dephasing_index);
    if (tau.is_infinite()) return tau;
    v.push_back(tau.value());
  }
  return DecoherenceTime::finite(pairwise_sum(v.data(), v.size()) / static_cast<double>(v.size()));
}

ModelParams realization_params(const EnsembleSpec& spec, std::size_t index) {
  ModelParams params = spec.model;
  std::visit([&](auto& m) { m.seed = split_seed(spec.master_seed, index); }, params);
  return params;
}

Spectrum model_spectrum(const ModelParams& params) {
  return std::visit(
      [](const auto& m) -> Spectrum {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SykParams>) {
          return syk_spectrum(m);
        } else {
          return sample_gue(m);
        }
      },
      params);
}

std::string spectrum_cache_name(const ModelParams& params) {
  std::ostringstream name;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SykParams>) {
          name << "syk_n" << m.n_majorana << '_' << to_string(m.normalization) << "_j"
               << format_double(m.coupling);
        } else {
          name << "gue_d" << m.dim << "_s" << format_double(m.sigma);
        }
        name << "_seed" << std::hex << m.seed << ".spectrum";
      },
      params);
  return name.str();
}

Spectrum realization_spectrum(const EnsembleSpec& spec, std::size_t index) {
  const ModelParams params = realization_params(spec, index);
  if (!spec.cache_dir) return model_spectrum(params);
  namespace fs = std::filesystem;
  const fs::path dir(*spec.cache_dir);
  const fs::path file = dir / spectrum_cache_name(params);
  if (fs::exists(file)) return load_spectrum(file.string());
  Spectrum spectrum = model_spectrum(params);
  fs::create_directories(dir);
  const fs::path tmp = file.string() + ".tmp";
  save_spectrum(tmp.string(), spectrum);
  fs::rename(tmp, file);
  return spectrum;
}

namespace {

struct RealizationOutput {
  RealizationSummary summary;
  // [dephasing][observable][time]
  std::vector<std::vector<std::vector<double>>> values;
};

}  // namespace

EnsembleResult run_ensemble(const EnsembleSpec& spec, const std::vector<Observable>& observables) {
  spec.validate();
  if (observables.empty()) throw InvalidArgument("observable list must not be empty");
  const auto times = spec.grid.points();
  const auto n = static_cast<std::size_t>(spec.n_samples);
  std::vector<RealizationOutput> outputs(n);

  parallel_for(n, spec.threads, [&](std::size_t i) {
      const ModelParams params = realization_params(spec, i);
      const std::uint64_t seed = std::visit([](const auto& m) { return m.seed; }, params);
      try {
        const Spectrum spectrum = realization_spectrum(spec, i);
        RealizationOutput& out = outputs[i];
        out.summary.seed = seed;
        out.summary.spectrum_hash = spectrum.content_hash();
        out.summary.dimension = spectrum.dimension();
        out.values.resize(spec.dephasing.size());
        for (std::size_t g = 0; g < spec.dephasing.size(); ++g) {
          const auto& channel = spec.dephasing[g];
          out.summary.plateau_value.push_back(plateau_value(spectrum, channel.beta));
          out.summary.tau_D.push_back(decoherence_time(spectrum, channel));
          const DephasingEvaluator eval(spectrum, channel);
          auto& per_obs = out.values[g];
          per_obs.resize(observables.size());
          for (std::size_t o = 0; o < observables.size(); ++o) {
            auto& curve = per_obs[o];
            curve.resize(times.size());
            for (std::size_t k = 0; k < times.size(); ++k) curve[k] = eval.evaluate(observables[o], times[k]);
          }
        }
      } catch (const std::exception& e) {
        std::ostringstream msg;
        msg << "realization " << i << " (seed " << seed << ") failed: " << e.what();
        throw std::runtime_error(msg.str());
      }
  });

  EnsembleResult result;
  result.realizations.reserve(n);
  for (auto& o : outputs) result.realizations.push_back(std::move(o.summary));

  std::vector<double> column(n);
  for (std::size_t g = 0; g < spec.dephasing.size(); ++g) {
    for (std::size_t o = 0; o < observables.size(); ++o) {
      EnsembleCurve curve;
      curve.dephasing_index = g;
      curve.observable = observables[o];
      curve.n_samples = spec.n_samples;
      curve.series.label = to_string(observables[o]);
      curve.series.times = times;
      curve.series.values.resize(times.size());
      if (n > 1) curve.series.sem.emplace(times.size());
      for (std::size_t k = 0; k < times.size(); ++k) {
        for (std::size_t i = 0; i < n; ++i) column[i] = outputs[i].values[g][o][k];
        const double mean = pairwise_sum(column.data(), n) / static_cast<double>(n);
        curve.series.values[k] = mean;
        if (n > 1) {
          for (std::size_t i = 0; i < n; ++i) {
            const double dev = outputs[i].values[g][o][k] - mean;
            column[i] = dev * dev;
          }
          const double var = pairwise_sum(column.data(), n) / static_cast<double>(n - 1);
          (*curve.series.sem)[k] = std::sqrt(var / static_cast<double>(n));
        }
      }
      result.curves.push_back(std::move(curve));
    }
  }
  return result;
}

void DetectorConfig::validate() const {
  if (window < 1) throw InvalidArgument("smoothing window must be >= 1");
  if (!(eps_dip > 0.0) || !(eps_plateau > 0.0)) {
    throw InvalidArgument("detector tolerances must be positive");
  }
}

std::vector<double> smooth_log(const std::vector<double>& values, int window) {
  const auto n = static_cast<std::ptrdiff_t>(values.size());
  std::vector<double> logs(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    logs[i] = std::log(std::max(values[i], std::numeric_limits<double>::min()));
  }
  const std::ptrdiff_t half = std::max(window, 1) / 2;
  std::vector<double> out(values.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + half);
    double s = 0.0;
    for (std::ptrdiff_t k = lo; k <= hi; ++k) s += logs[k];
    out[i] = s / static_cast<double>(hi - lo + 1);
  }
  return out;
}

namespace {

// Index from which every smoothed value stays within the plateau band,
// scanning no earlier than `start`; n when the last point is outside.
std::size_t band_entry(const std::vector<double>& s, double level, double band, std::size_t start) {
  const std::size_t n = s.size();
  for (std::size_t k = n; k-- > start;) {
    if (std::abs(s[k] - level) > band) return k + 1;
  }
  return start;
}

}  // namespace

std::optional<Dip> detect_dip(const ObservableSeries& series, double plateau_value,
                              const DetectorConfig& config) {
  config.validate();
  const auto s = smooth_log(series.values, config.window);
  const std::size_t n = s.size();
  if (n < 3 || !(plateau_value > 0.0)) return std::nullopt;
  const double level = std::log(plateau_value);
  std::size_t end = band_entry(s, level, std::log1p(config.eps_plateau), 0);
  if (end == 0) return std::nullopt;
  if (end > n) end = n;
  const auto it = std::min_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(end));
  const auto imin = static_cast<std::size_t>(it - s.begin());
  const double depth = std::log1p(config.eps_dip);
  if (s[imin] > level - depth) return std::nullopt;
  if (imin + 1 >= n) return std::nullopt;
  const double recovered = *std::max_element(s.begin() + static_cast<std::ptrdiff_t>(imin), s.end());
  if (recovered - s[imin] < depth) return std::nullopt;
  return Dip{series.times[imin], std::exp(s[imin]), imin};
}

std::optional<double> detect_plateau(const ObservableSeries& series, double plateau_value,
                                     const DetectorConfig& config) {
  config.validate();
  const auto s = smooth_log(series.values, config.window);
  const std::size_t n = s.size();
  if (n == 0 || !(plateau_value > 0.0)) return std::nullopt;
  const double level = std::log(plateau_value);
  const double band = std::log1p(config.eps_plateau);
  const auto dip = detect_dip(series, plateau_value, config);
  const std::size_t onset = band_entry(s, level, band, dip ? dip->index + 1 : 0);
  if (onset >= n) return std::nullopt;
  return series.times[onset];
}

CharacteristicTimes estimate_times_syk(int n_majorana, double beta, double gamma) {
  if (n_majorana < 8 || n_majorana % 2 != 0) {
    throw InvalidArgument("estimate_times_syk needs even N >= 8");
  }
  const double n = n_majorana;
  const double d = std::ldexp(1.0, n_majorana / 2);
  const int mod8 = n_majorana % 8;
  const double c_n = n / 400.0;
  CharacteristicTimes times;
  times.t_dip_est = std::pow(std::sqrt(std::numbers::pi) * std::exp(-n * beta * beta / 4.0) /
                                 (std::pow(c_n, 1.5) * std::sqrt(2.0 * n)),
                             0.25) *
                    std::sqrt(d);
  const double alpha = mod8 == 4 ? 1.0 : 2.0;
  times.t_plateau_est = alpha * std::sqrt(2.0 * std::numbers::pi / n) * d;
  times.tau_D = gamma > 0.0 ? DecoherenceTime::finite(1.0 / (gamma * n))
                            : DecoherenceTime::infinite(true);
  const double degeneracy = mod8 == 0 ? 1.0 : 2.0;
  times.plateau_value = degeneracy * std::exp(n * beta * beta / 4.0) / d;
  return times;
}

}  // namespace tfdlab
