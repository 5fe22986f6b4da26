#include "tfdlab/cli.hpp"

#include <unistd.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tfdlab/gue.hpp"
#include "tfdlab/numfmt.hpp"
#include "tfdlab/svg.hpp"

namespace tfdlab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kMaxSykMajoranas = 30;
constexpr int kMaxFiniteDim = 512;
constexpr int kMinAsymptoticDim = 10;

const std::set<std::string> kCommonKeys = {"n_samples", "master_seed", "grid",  "threads",
                                           "cache_dir", "output_dir",  "plot",  "detector"};

const std::set<std::string>& command_keys(Command cmd) {
  static const std::set<std::string> syk = {"n_majorana", "coupling", "normalization", "parity_blocks",
                                            "beta",       "gammas",   "observables"};
  static const std::set<std::string> gue = {"dim", "sigma", "betas"};
  static const std::set<std::string> times = {"n_values", "coupling", "normalization", "parity_blocks",
                                              "beta",     "gammas"};
  switch (cmd) {
    case Command::Syk: return syk;
    case Command::Gue: return gue;
    case Command::Times: return times;
  }
  return syk;
}

double get_number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError(key + ": expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ConfigError(key + ": expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < INT32_MIN || v > INT32_MAX) throw ConfigError(key + ": integer out of range");
  return static_cast<int>(v);
}

bool get_bool(const json& j, const std::string& key) {
  if (!j.is_boolean()) throw ConfigError(key + ": expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& key) {
  if (!j.is_string()) throw ConfigError(key + ": expected a string");
  return j.get<std::string>();
}

std::vector<double> get_numbers(const json& j, const std::string& key) {
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array()) throw ConfigError(key + ": expected a number or an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], key + "[" + std::to_string(i) + "]"));
  return out;
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

GridConfig parse_grid(const json& j) {
  if (!j.is_object()) throw ConfigError("grid: expected an object");
  reject_unknown(j, {"kind", "t_min", "t_max", "n_points"}, "grid");
  GridConfig g;
  if (j.contains("kind")) {
    const auto kind = get_string(j["kind"], "grid.kind");
    if (kind == "log") {
      g.kind = TimeGrid::Kind::Log;
    } else if (kind == "linear") {
      g.kind = TimeGrid::Kind::Linear;
    } else {
      throw ConfigError("grid.kind: expected 'log' or 'linear', got '" + kind + "'");
    }
  }
  if (j.contains("t_min")) g.t_min = get_number(j["t_min"], "grid.t_min");
  if (j.contains("t_max")) g.t_max = get_number(j["t_max"], "grid.t_max");
  if (j.contains("n_points")) g.n_points = get_int(j["n_points"], "grid.n_points");
  return g;
}

DetectorConfig parse_detector(const json& j) {
  if (!j.is_object()) throw ConfigError("detector: expected an object");
  reject_unknown(j, {"window", "eps_dip", "eps_plateau"}, "detector");
  DetectorConfig d;
  if (j.contains("window")) d.window = get_int(j["window"], "detector.window");
  if (j.contains("eps_dip")) d.eps_dip = get_number(j["eps_dip"], "detector.eps_dip");
  if (j.contains("eps_plateau")) d.eps_plateau = get_number(j["eps_plateau"], "detector.eps_plateau");
  return d;
}

SykParams syk_template(const RunConfig& config) { return std::get<SykParams>(config.model); }

double plateau_estimate(const ModelParams& model, double beta) {
  if (const auto* syk = std::get_if<SykParams>(&model)) {
    return estimate_times_syk(syk->n_majorana, beta, 0.0).t_plateau_est;
  }
  const auto& gue = std::get<GueParams>(model);
  return std::sqrt(static_cast<double>(gue.dim)) / gue.sigma;
}

std::string optional_number(const std::optional<double>& v) {
  return v ? format_double(*v) : "nan";
}

std::string time_value(const DecoherenceTime& t) { return t.is_infinite() ? "inf" : format_double(t.value()); }

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : path_(path.string()), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open " + path_ + " for writing");
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  void close() {
    out_.close();
    if (!out_) throw std::runtime_error("write failed: " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

std::string slug(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

template <class Fn>
int guarded(const char* what, Fn&& fn) {
  try {
    fn();
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "tfdlab " << what << ": error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace

const char* to_string(Command cmd) {
  switch (cmd) {
    case Command::Syk: return "syk";
    case Command::Gue: return "gue";
    case Command::Times: return "times";
  }
  return "?";
}

TimeGrid GridConfig::resolve(double t_plateau_estimate) const {
  TimeGrid g;
  g.kind = kind;
  g.t_min = t_min;
  g.t_max = t_max ? *t_max : 10.0 * t_plateau_estimate;
  g.n_points = n_points;
  return g;
}

std::string observable_csv_name(Observable obs, double gamma) {
  return std::string(to_string(obs)) + "_gamma_" + slug(gamma) + ".csv";
}

std::string gue_csv_name(double beta) { return "sff_beta_" + slug(beta) + ".csv"; }

RunConfig parse_config(Command command, const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  std::set<std::string> allowed = kCommonKeys;
  allowed.insert(command_keys(command).begin(), command_keys(command).end());
  reject_unknown(doc, allowed, std::string("config for '") + to_string(command) + "'");

  RunConfig c;
  c.command = command;
  if (command == Command::Gue) {
    GueParams p;
    if (doc.contains("dim")) p.dim = get_int(doc["dim"], "dim");
    if (doc.contains("sigma")) p.sigma = get_number(doc["sigma"], "sigma");
    c.model = p;
    c.betas = doc.contains("betas") ? get_numbers(doc["betas"], "betas") : std::vector<double>{0.0};
    c.gammas = {0.0};
  } else {
    SykParams p;
    if (doc.contains("n_majorana")) p.n_majorana = get_int(doc["n_majorana"], "n_majorana");
    if (doc.contains("coupling")) p.coupling = get_number(doc["coupling"], "coupling");
    if (doc.contains("normalization")) {
      try {
        p.normalization = parse_majorana_norm(get_string(doc["normalization"], "normalization"));
      } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("normalization: ") + e.what());
      }
    }
    if (doc.contains("parity_blocks")) p.parity_blocks = get_bool(doc["parity_blocks"], "parity_blocks");
    c.model = p;
    c.betas = {doc.contains("beta") ? get_number(doc["beta"], "beta") : 1.0};
    c.gammas = doc.contains("gammas") ? get_numbers(doc["gammas"], "gammas") : std::vector<double>{0.0};
    if (command == Command::Times) {
      if (!doc.contains("n_values")) throw ConfigError("times: 'n_values' is required");
      const auto& nv = doc["n_values"];
      if (!nv.is_array()) throw ConfigError("n_values: expected an array of integers");
      for (std::size_t i = 0; i < nv.size(); ++i) {
        c.n_values.push_back(get_int(nv[i], "n_values[" + std::to_string(i) + "]"));
      }
    }
    if (doc.contains("observables")) {
      const auto& obs = doc["observables"];
      if (!obs.is_array()) throw ConfigError("observables: expected an array of names");
      c.observables.clear();
      for (const auto& o : obs) {
        try {
          c.observables.push_back(parse_observable(get_string(o, "observables")));
        } catch (const InvalidArgument& e) {
          throw ConfigError(std::string("observables: ") + e.what());
        }
      }
    }
  }
  if (doc.contains("n_samples")) c.n_samples = get_int(doc["n_samples"], "n_samples");
  if (doc.contains("master_seed")) {
    const auto& s = doc["master_seed"];
    if (!s.is_number_unsigned()) throw ConfigError("master_seed: expected a non-negative integer");
    c.master_seed = s.get<std::uint64_t>();
  }
  if (doc.contains("grid")) c.grid = parse_grid(doc["grid"]);
  if (doc.contains("threads")) c.threads = get_int(doc["threads"], "threads");
  if (doc.contains("cache_dir")) c.cache_dir = get_string(doc["cache_dir"], "cache_dir");
  if (doc.contains("output_dir")) c.output_dir = get_string(doc["output_dir"], "output_dir");
  if (doc.contains("plot")) c.plot = get_bool(doc["plot"], "plot");
  if (doc.contains("detector")) c.detector = parse_detector(doc["detector"]);
  return c;
}

RunConfig load_config(Command command, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(command, text.str());
}

void RunConfig::validate() const {
  try {
    std::visit([](const auto& m) { m.validate(); }, model);
    if (command != Command::Gue) {
      const int n = syk_template(*this).n_majorana;
      const std::vector<int> sizes = command == Command::Times ? n_values : std::vector<int>{n};
      if (sizes.empty()) throw ConfigError("n_values must not be empty");
      for (int size : sizes) {
        if (size < 8 || size > kMaxSykMajoranas || size % 2 != 0) {
          throw ConfigError("SYK size must be even and in [8, " + std::to_string(kMaxSykMajoranas) +
                            "], got " + std::to_string(size));
        }
      }
      if (betas.size() != 1) throw ConfigError("beta must be a single number");
    }
    if (betas.empty()) throw ConfigError("betas must not be empty");
    if (gammas.empty()) throw ConfigError("gammas must not be empty");
    for (double b : betas) DephasingParams{b, 0.0}.validate();
    for (double g : gammas) DephasingParams{0.0, g}.validate();
    std::set<std::string> names;
    for (double g : gammas) {
      if (!names.insert(slug(g)).second) throw ConfigError("gammas must be distinct, repeated " + slug(g));
    }
    names.clear();
    for (double b : betas) {
      if (!names.insert(slug(b)).second) throw ConfigError("betas must be distinct, repeated " + slug(b));
    }
    if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (observables.empty()) throw ConfigError("observables must not be empty");
    std::set<Observable> seen(observables.begin(), observables.end());
    if (seen.size() != observables.size()) throw ConfigError("observables must be distinct");
    if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
    detector.validate();
    if (grid.t_max) {
      grid.resolve(0.0).validate();
    } else {
      grid.resolve(std::max(1.0, 2.0 * grid.t_min)).validate();
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

EnsembleSpec RunConfig::ensemble_spec(std::optional<int> n_majorana) const {
  EnsembleSpec spec;
  spec.model = model;
  if (n_majorana) std::get<SykParams>(spec.model).n_majorana = *n_majorana;
  for (double b : betas) {
    for (double g : gammas) spec.dephasing.push_back({b, g});
  }
  spec.n_samples = n_samples;
  spec.master_seed = master_seed;
  spec.grid = grid.resolve(plateau_estimate(spec.model, betas.front()));
  spec.threads = threads;
  spec.cache_dir = cache_dir;
  return spec;
}

void apply_overrides(RunConfig& config, const Overrides& overrides, const char* env_threads) {
  if (overrides.output_dir) config.output_dir = *overrides.output_dir;
  if (overrides.plot) config.plot = true;
  if (env_threads && *env_threads) {
    const std::string text(env_threads);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || value < 1) {
      throw ConfigError("TFDLAB_THREADS must be a positive integer, got '" + text + "'");
    }
    config.threads = value;
  }
  if (overrides.threads) config.threads = *overrides.threads;
}

void check_output_dir(const std::string& dir) {
  std::error_code ec;
  fs::path p(dir);
  if (fs::exists(p, ec)) {
    if (!fs::is_directory(p, ec)) throw ConfigError("output path " + dir + " is not a directory");
    if (::access(p.c_str(), W_OK) != 0) throw ConfigError("output directory " + dir + " is not writable");
    return;
  }
  fs::path parent = fs::absolute(p, ec).parent_path();
  while (!parent.empty() && !fs::exists(parent, ec)) parent = parent.parent_path();
  if (parent.empty() || !fs::is_directory(parent, ec) || ::access(parent.c_str(), W_OK) != 0) {
    throw ConfigError("cannot create output directory " + dir);
  }
}

int cmd_syk(const RunConfig& config) {
  return guarded("syk", [&] {
    const EnsembleSpec spec = config.ensemble_spec();
    std::vector<Observable> wanted = config.observables;
    if (std::find(wanted.begin(), wanted.end(), Observable::Fidelity) == wanted.end()) {
      wanted.push_back(Observable::Fidelity);
    }
    const EnsembleResult result = run_ensemble(spec, wanted);
    const fs::path out(config.output_dir);
    fs::create_directories(out);

    const auto& syk = std::get<SykParams>(spec.model);
    const double beta = config.betas.front();
    CsvWriter times(out / "times.csv", {"gamma", "beta", "plateau_value", "plateau_value_est", "tau_D",
                                        "tau_D_est", "t_dip_est", "t_dip", "t_plateau_est", "t_plateau"});
    for (std::size_t g = 0; g < spec.dephasing.size(); ++g) {
      const double gamma = spec.dephasing[g].gamma;
      for (Observable obs : config.observables) {
        const auto& curve = result.curve(g, obs);
        CsvWriter csv(out / observable_csv_name(obs, gamma), {"t", "mean", "sem", "n"});
        for (std::size_t k = 0; k < curve.series.times.size(); ++k) {
          csv.row({format_double(curve.series.times[k]), format_double(curve.series.values[k]),
                   curve.series.sem ? format_double((*curve.series.sem)[k]) : "nan",
                   std::to_string(curve.n_samples)});
        }
        csv.close();
      }
      const auto& fid = result.curve(g, Observable::Fidelity).series;
      const double plateau = result.mean_plateau_value(g);
      const auto est = estimate_times_syk(syk.n_majorana, beta, gamma);
      const auto dip = detect_dip(fid, plateau, config.detector);
      const auto onset = detect_plateau(fid, plateau, config.detector);
      times.row({format_double(gamma), format_double(beta), format_double(plateau),
                 format_double(est.plateau_value), time_value(result.mean_tau_D(g)), time_value(est.tau_D),
                 format_double(est.t_dip_est), optional_number(dip ? std::optional(dip->time) : std::nullopt),
                 format_double(est.t_plateau_est), optional_number(onset)});
    }
    times.close();

    if (config.plot) {
      for (Observable obs : config.observables) {
        Plot plot{std::string("SYK N=") + std::to_string(syk.n_majorana) + ", beta=" + slug(beta), "t",
                  to_string(obs), {}};
        for (std::size_t g = 0; g < spec.dephasing.size(); ++g) {
          const auto& s = result.curve(g, obs).series;
          plot.series.push_back({"gamma=" + slug(spec.dephasing[g].gamma), s.times, s.values, false});
        }
        write_svg((out / (std::string(to_string(obs)) + ".svg")).string(), plot);
      }
    }
  });
}

int cmd_gue(const RunConfig& config) {
  return guarded("gue", [&] {
    const EnsembleSpec spec = config.ensemble_spec();
    const EnsembleResult result = run_ensemble(spec, {Observable::Fidelity});
    const fs::path out(config.output_dir);
    fs::create_directories(out);
    const auto& gue = std::get<GueParams>(spec.model);
    Plot plot{"GUE d=" + std::to_string(gue.dim) + ", sigma=" + slug(gue.sigma), "t", "sff(2t)", {}};
    for (std::size_t g = 0; g < spec.dephasing.size(); ++g) {
      const double beta = spec.dephasing[g].beta;
      const auto& curve = result.curve(g, Observable::Fidelity);
      const auto& s = curve.series;
      std::vector<double> finite(s.times.size()), asym(s.times.size());
      for (std::size_t k = 0; k < s.times.size(); ++k) {
        const double t = s.times[k];
        finite[k] = gue.dim <= kMaxFiniteDim ? sff_gue_finite(gue, beta, 2.0 * t) : std::nan("");
        asym[k] = gue.dim >= kMinAsymptoticDim ? sff_gue_asymptotic(gue, beta, t) : std::nan("");
      }
      CsvWriter csv(out / gue_csv_name(beta), {"t", "tau", "mean", "sem", "n", "finite_d", "asymptotic"});
      for (std::size_t k = 0; k < s.times.size(); ++k) {
        csv.row({format_double(s.times[k]), format_double(2.0 * s.times[k]), format_double(s.values[k]),
                 s.sem ? format_double((*s.sem)[k]) : "nan", std::to_string(curve.n_samples),
                 format_double(finite[k]), format_double(asym[k])});
      }
      csv.close();
      plot.series.push_back({"MC beta=" + slug(beta), s.times, s.values, false});
      plot.series.push_back({"finite-d beta=" + slug(beta), s.times, finite, true});
    }
    if (config.plot) write_svg((out / "sff.svg").string(), plot);
  });
}

int cmd_times(const RunConfig& config) {
  return guarded("times", [&] {
    const double beta = config.betas.front();
    struct Row {
      int n;
      std::vector<std::string> cells;
    };
    std::vector<Row> rows;
    Plot plot{"SYK characteristic times, beta=" + slug(beta), "d", "t", {}};
    std::vector<double> dims, dip_meas, dip_est, pl_meas, pl_est;
    for (int n : config.n_values) {
      const EnsembleSpec spec = config.ensemble_spec(n);
      const EnsembleResult result = run_ensemble(spec, {Observable::Fidelity});
      const double d = std::ldexp(1.0, n / 2);
      for (std::size_t g = 0; g < spec.dephasing.size(); ++g) {
        const double gamma = spec.dephasing[g].gamma;
        const auto& fid = result.curve(g, Observable::Fidelity).series;
        const double plateau = result.mean_plateau_value(g);
        const auto est = estimate_times_syk(n, beta, gamma);
        const auto dip = detect_dip(fid, plateau, config.detector);
        const auto onset = detect_plateau(fid, plateau, config.detector);
        rows.push_back({n,
                        {std::to_string(n), format_double(d), format_double(gamma), time_value(result.mean_tau_D(g)),
                         time_value(est.tau_D), format_double(est.t_dip_est),
                         optional_number(dip ? std::optional(dip->time) : std::nullopt),
                         format_double(est.t_plateau_est), optional_number(onset)}});
        if (g == 0) {
          dims.push_back(d);
          dip_meas.push_back(dip ? dip->time : std::nan(""));
          dip_est.push_back(est.t_dip_est);
          pl_meas.push_back(onset ? *onset : std::nan(""));
          pl_est.push_back(est.t_plateau_est);
        }
      }
    }
    const fs::path out(config.output_dir);
    fs::create_directories(out);
    CsvWriter csv(out / "times.csv", {"N", "d", "gamma", "tau_D", "tau_D_est", "t_dip_est", "t_dip",
                                      "t_plateau_est", "t_plateau"});
    for (const auto& r : rows) csv.row(r.cells);
    csv.close();
    if (config.plot) {
      const std::string g0 = " (gamma=" + slug(config.gammas.front()) + ")";
      plot.series = {{"t_dip" + g0, dims, dip_meas, false},
                     {"t_dip estimate", dims, dip_est, true},
                     {"t_plateau" + g0, dims, pl_meas, false},
                     {"t_plateau estimate", dims, pl_est, true}};
      write_svg((out / "times.svg").string(), plot);
    }
  });
}

int run(int argc, char** argv) {
  CLI::App app{"Thermofield-double fidelity of SYK and GUE spectra under energy dephasing"};
  app.require_subcommand(1);
  std::string config_path;
  Overrides overrides;
  std::optional<int> threads;
  std::string out_dir;
  const std::pair<Command, const char*> commands[] = {
      {Command::Syk, "SYK ensemble: observable curves per gamma and times.csv"},
      {Command::Gue, "GUE ensemble form factor with finite-d and asymptotic overlays"},
      {Command::Times, "Sweep SYK sizes and tabulate decoherence, dip and plateau times"}};
  std::vector<CLI::App*> subs;
  for (const auto& [cmd, help] : commands) {
    auto* sub = app.add_subcommand(to_string(cmd), help);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides output_dir)");
    sub->add_flag("--plot", overrides.plot, "Also write SVG plots");
    sub->add_option("--threads", threads, "Worker threads (overrides TFDLAB_THREADS and config)")
        ->check(CLI::PositiveNumber);
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  Command cmd = Command::Syk;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i]->parsed()) cmd = commands[i].first;
  }
  if (!out_dir.empty()) overrides.output_dir = out_dir;
  overrides.threads = threads;

  RunConfig config;
  try {
    config = load_config(cmd, config_path);
    apply_overrides(config, overrides, std::getenv("TFDLAB_THREADS"));
    config.validate();
    check_output_dir(config.output_dir);
  } catch (const ConfigError& e) {
    std::cerr << "tfdlab " << to_string(cmd) << ": config error: " << e.what() << '\n';
    return kExitConfig;
  }
  switch (cmd) {
    case Command::Syk: return cmd_syk(config);
    case Command::Gue: return cmd_gue(config);
    case Command::Times: return cmd_times(config);
  }
  return kExitRuntime;
}

}  // namespace tfdlab::cli
