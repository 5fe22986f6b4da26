#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tfdlab {

/// Raised when an operation receives input that violates its contract.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Eigenvalues closer than this fraction of (E_max - E_min) share one level.
inline constexpr double kDegeneracyTolerance = 1e-9;

struct Level {
  double energy;
  int multiplicity;
};

/// Where a spectrum came from. Parameters are kept as ordered key/value text
/// so the serialized header is stable.
struct SpectrumMeta {
  std::string model = "user";
  std::map<std::string, std::string> params;
  std::uint64_t seed = 0;
};

/// Sorted energy levels with multiplicities. Immutable after construction.
class Spectrum {
 public:
  /// Sorts `eigenvalues`, then merges values closer than
  /// `merge_tolerance * (E_max - E_min)` into degenerate levels.
  explicit Spectrum(std::vector<double> eigenvalues, SpectrumMeta meta = {},
                    double merge_tolerance = kDegeneracyTolerance);

  const std::vector<Level>& levels() const noexcept { return levels_; }
  /// Flat sorted eigenvalues before merging.
  const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }
  const SpectrumMeta& meta() const noexcept { return meta_; }

  int dimension() const noexcept { return static_cast<int>(eigenvalues_.size()); }
  std::size_t level_count() const noexcept { return levels_.size(); }
  double min_energy() const noexcept { return levels_.front().energy; }
  double max_energy() const noexcept { return levels_.back().energy; }
  double width() const noexcept { return max_energy() - min_energy(); }
  /// Smallest gap between distinct levels; 0 for a single level.
  double min_gap() const noexcept;

  /// FNV-1a over the bit patterns of the flat eigenvalues.
  std::uint64_t content_hash() const noexcept;

 private:
  std::vector<double> eigenvalues_;
  std::vector<Level> levels_;
  SpectrumMeta meta_;
};

/// Complex inverse temperature beta + i*tau.
struct ComplexBeta {
  double re = 0.0;
  double im = 0.0;

  std::complex<double> value() const { return {re, im}; }
};

/// Eigenvalues of a dense Hermitian matrix in ascending order.
/// Throws InvalidArgument when max|A - A^dagger| exceeds `tolerance`.
std::vector<double> hermitian_eigenvalues(const Eigen::MatrixXcd& matrix,
                                          double tolerance = 1e-10);

/// log sum_n N_n exp(-z E_n) on the principal branch, shifted by E_min so
/// no intermediate term overflows.
std::complex<double> log_partition(const Spectrum& spectrum, ComplexBeta z);

/// Spectral form factor |Z(beta + i tau)|^2 / Z(beta)^2.
double sff(const Spectrum& spectrum, double beta, double tau);

/// G(beta) / Z(beta)^2 with G(beta) = sum_n N_n^2 exp(-2 beta E_n).
double plateau_value(const Spectrum& spectrum, double beta);

/// Thermal energy variance <E^2> - <E>^2 at inverse temperature beta.
double energy_variance(const Spectrum& spectrum, double beta);

/// Normalized Boltzmann weights N_n exp(-beta (E_n - E_min)) / Z per level.
std::vector<double> boltzmann_weights(const Spectrum& spectrum, double beta);

// Text serialization. Header lines start with '#', followed by one
// eigenvalue per line with 17 significant digits.
inline constexpr int kSpectrumFormatVersion = 1;

void write_spectrum(std::ostream& out, const Spectrum& spectrum);
Spectrum read_spectrum(std::istream& in);
void save_spectrum(const std::string& path, const Spectrum& spectrum);
Spectrum load_spectrum(const std::string& path);

}  // namespace tfdlab
