#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tfdlab/spectra.hpp"

namespace tfdlab {

/// Majorana normalization: HALF means chi^2 = 1/2 ({chi_k, chi_l} = delta_kl),
/// UNIT means chi^2 = 1.
enum class MajoranaNorm { Half, Unit };

enum class SymmetryClass { GOE, GUE, GSE };

const char* to_string(MajoranaNorm norm);
const char* to_string(SymmetryClass cls);
MajoranaNorm parse_majorana_norm(const std::string& text);

struct SykParams {
  int n_majorana = 16;
  double coupling = 1.0;
  MajoranaNorm normalization = MajoranaNorm::Half;
  std::uint64_t seed = 0;
  /// Diagonalize the two fermion-parity blocks separately.
  bool parity_blocks = true;

  int qubits() const { return n_majorana / 2; }
  std::size_t dimension() const { return std::size_t{1} << qubits(); }
  void validate() const;
};

/// All-to-all quartic couplings J_klmn, stored in lexicographic order of
/// 1 <= k < l < m < n <= N.
class CouplingTensor {
 public:
  CouplingTensor(int n_majorana, std::vector<double> values);

  int n_majorana() const noexcept { return n_; }
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<double>& values() const noexcept { return values_; }
  /// 1-based indices, k < l < m < n.
  double at(int k, int l, int m, int n) const;
  /// Lexicographic rank of a 1-based quadruple.
  static std::size_t rank(int n_majorana, int k, int l, int m, int n);
  /// All quadruples in storage order.
  static std::vector<std::array<int, 4>> quadruples(int n_majorana);

 private:
  int n_;
  std::vector<double> values_;
};

/// Variance 6 J^2 / N^3 of each coupling.
double coupling_variance(const SykParams& params);

/// i.i.d. Gaussian couplings; value i depends only on (seed, i).
CouplingTensor sample_couplings(const SykParams& params);

/// Result of a Majorana operator on a computational basis state.
struct BasisImage {
  std::uint64_t state;
  std::complex<double> coeff;
};

/// Jordan-Wigner image of chi_k (1-based) on basis state `state`:
/// chi_{2i-1} -> s Z..Z X_i, chi_{2i} -> s Z..Z Y_i with qubit i on bit i-1.
BasisImage majorana_on_basis(int k, std::uint64_t state, MajoranaNorm norm);

/// chi_k applied to a full state vector of length 2^(N/2).
std::vector<std::complex<double>> majorana_apply(int k, int n_majorana, MajoranaNorm norm,
                                                 std::span<const std::complex<double>> vec);

/// Dense d x d Hamiltonian sum J_klmn chi_k chi_l chi_m chi_n.
Eigen::MatrixXcd build_hamiltonian(const SykParams& params, const CouplingTensor& couplings);

/// Block of the Hamiltonian restricted to fermion parity `parity` (0 even,
/// 1 odd); basis states ordered by increasing integer value.
Eigen::MatrixXcd build_parity_block(const SykParams& params, const CouplingTensor& couplings,
                                    int parity);

/// Couplings, Hamiltonian, eigensolve, degeneracy merge.
Spectrum syk_spectrum(const SykParams& params);

SymmetryClass symmetry_class(int n_majorana);

/// d exp(N z^2 / 8): disorder-averaged partition function for a Gaussian
/// density of states of variance N/4.
std::complex<double> gaussian_dos_partition(int n_majorana, double dimension,
                                            std::complex<double> z);

/// Expected trace(H^2)/d: C(N,4) * var(J) * s^8.
double syk_expected_variance(const SykParams& params);

}  // namespace tfdlab
