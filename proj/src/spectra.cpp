#include "tfdlab/spectra.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "tfdlab/numfmt.hpp"

namespace tfdlab {

Spectrum::Spectrum(std::vector<double> eigenvalues, SpectrumMeta meta,
                   double merge_tolerance)
    : eigenvalues_(std::move(eigenvalues)), meta_(std::move(meta)) {
  if (eigenvalues_.empty()) {
    throw InvalidArgument("spectrum must contain at least one eigenvalue");
  }
  for (double e : eigenvalues_) {
    if (!std::isfinite(e)) throw InvalidArgument("spectrum contains a non-finite eigenvalue");
  }
  std::sort(eigenvalues_.begin(), eigenvalues_.end());

  const double resolution =
      merge_tolerance * (eigenvalues_.back() - eigenvalues_.front());
  levels_.push_back({eigenvalues_.front(), 1});
  double run_sum = eigenvalues_.front();
  for (std::size_t i = 1; i < eigenvalues_.size(); ++i) {
    const double e = eigenvalues_[i];
    if (e - eigenvalues_[i - 1] <= resolution) {
      auto& level = levels_.back();
      ++level.multiplicity;
      run_sum += e;
      level.energy = run_sum / level.multiplicity;
    } else {
      levels_.push_back({e, 1});
      run_sum = e;
    }
  }
}

double Spectrum::min_gap() const noexcept {
  double gap = 0.0;
  for (std::size_t i = 1; i < levels_.size(); ++i) {
    const double g = levels_[i].energy - levels_[i - 1].energy;
    if (i == 1 || g < gap) gap = g;
  }
  return gap;
}

std::uint64_t Spectrum::content_hash() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double e : eigenvalues_) {
    auto bits = std::bit_cast<std::uint64_t>(e);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::vector<double> hermitian_eigenvalues(const Eigen::MatrixXcd& matrix, double tolerance) {
  if (matrix.rows() != matrix.cols()) {
    throw InvalidArgument("hermitian_eigenvalues: matrix is not square");
  }
  const Eigen::Index n = matrix.rows();
  double worst = 0.0;
  Eigen::Index wi = 0, wj = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double dev = std::abs(matrix(i, j) - std::conj(matrix(j, i)));
      if (dev > worst) {
        worst = dev;
        wi = i;
        wj = j;
      }
    }
  }
  if (worst > tolerance) {
    std::ostringstream msg;
    msg << "hermitian_eigenvalues: matrix not Hermitian, |A - A^dagger| = " << worst
        << " at (" << wi << ", " << wj << ")";
    throw InvalidArgument(msg.str());
  }
  if (n == 0) return {};

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(matrix, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("hermitian_eigenvalues: eigensolver did not converge");
  }
  const auto& values = solver.eigenvalues();
  std::vector<double> out(values.data(), values.data() + values.size());
  std::sort(out.begin(), out.end());
  return out;
}

std::complex<double> log_partition(const Spectrum& spectrum, ComplexBeta z) {
  const double e0 = spectrum.min_energy();
  const std::complex<double> zc = z.value();
  std::complex<double> sum{0.0, 0.0};
  for (const auto& level : spectrum.levels()) {
    sum += static_cast<double>(level.multiplicity) * std::exp(-zc * (level.energy - e0));
  }
  std::complex<double> result = std::log(sum) - zc * e0;
  double im = std::remainder(result.imag(), 2.0 * std::numbers::pi);
  if (im <= -std::numbers::pi) im += 2.0 * std::numbers::pi;
  return {result.real(), im};
}

std::vector<double> boltzmann_weights(const Spectrum& spectrum, double beta) {
  const double e0 = spectrum.min_energy();
  std::vector<double> w;
  w.reserve(spectrum.level_count());
  double z = 0.0;
  for (const auto& level : spectrum.levels()) {
    w.push_back(level.multiplicity * std::exp(-beta * (level.energy - e0)));
    z += w.back();
  }
  for (double& x : w) x /= z;
  return w;
}

double sff(const Spectrum& spectrum, double beta, double tau) {
  if (tau == 0.0) return 1.0;
  const auto w = boltzmann_weights(spectrum, beta);
  const double e0 = spectrum.min_energy();
  double re = 0.0, im = 0.0;
  const auto& levels = spectrum.levels();
  for (std::size_t n = 0; n < levels.size(); ++n) {
    const double phase = tau * (levels[n].energy - e0);
    re += w[n] * std::cos(phase);
    im -= w[n] * std::sin(phase);
  }
  return std::min(1.0, re * re + im * im);
}

double plateau_value(const Spectrum& spectrum, double beta) {
  const auto w = boltzmann_weights(spectrum, beta);
  const auto& levels = spectrum.levels();
  double g = 0.0;
  for (std::size_t n = 0; n < levels.size(); ++n) g += w[n] * w[n];
  return g;
}

double energy_variance(const Spectrum& spectrum, double beta) {
  const auto w = boltzmann_weights(spectrum, beta);
  const auto& levels = spectrum.levels();
  double mean = 0.0;
  for (std::size_t n = 0; n < levels.size(); ++n) mean += w[n] * levels[n].energy;
  double var = 0.0;
  for (std::size_t n = 0; n < levels.size(); ++n) {
    const double dev = levels[n].energy - mean;
    var += w[n] * dev * dev;
  }
  return var;
}

void write_spectrum(std::ostream& out, const Spectrum& spectrum) {
  const auto& meta = spectrum.meta();
  out << "# tfdlab-spectrum v" << kSpectrumFormatVersion << '\n';
  out << "# model " << meta.model << '\n';
  for (const auto& [key, value] : meta.params) out << "# param " << key << ' ' << value << '\n';
  out << "# seed " << meta.seed << '\n';
  out << "# count " << spectrum.eigenvalues().size() << '\n';
  for (double e : spectrum.eigenvalues()) out << format_double(e) << '\n';
}

Spectrum read_spectrum(std::istream& in) {
  SpectrumMeta meta;
  std::vector<double> values;
  std::size_t expected = 0;
  bool have_version = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream header(line.substr(1));
      std::string key;
      header >> key;
      if (key == "tfdlab-spectrum") {
        std::string version;
        header >> version;
        if (version != "v" + std::to_string(kSpectrumFormatVersion)) {
          throw InvalidArgument("unsupported spectrum format version: " + version);
        }
        have_version = true;
      } else if (key == "model") {
        header >> meta.model;
      } else if (key == "param") {
        std::string name, value;
        header >> name >> value;
        meta.params[name] = value;
      } else if (key == "seed") {
        header >> meta.seed;
      } else if (key == "count") {
        header >> expected;
      }
      continue;
    }
    char* end = nullptr;
    const double v = std::strtod(line.c_str(), &end);
    if (end == line.c_str()) throw InvalidArgument("malformed eigenvalue line: " + line);
    values.push_back(v);
  }
  if (!have_version) throw InvalidArgument("missing spectrum format header");
  if (expected != values.size()) {
    throw InvalidArgument("spectrum file count mismatch: header says " +
                          std::to_string(expected) + ", found " +
                          std::to_string(values.size()));
  }
  return Spectrum(std::move(values), std::move(meta));
}

void save_spectrum(const std::string& path, const Spectrum& spectrum) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open spectrum file for writing: " + path);
  write_spectrum(out, spectrum);
  if (!out) throw std::runtime_error("failed writing spectrum file: " + path);
}

Spectrum load_spectrum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open spectrum file: " + path);
  return read_spectrum(in);
}

}  // namespace tfdlab
