#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "tfdlab/spectra.hpp"
#include "tfdlab/times.hpp"

namespace tfdlab {

/// Gaussian unitary ensemble with density proportional to
/// exp(-tr H^2 / (2 sigma^2)).
struct GueParams {
  int dim = 10;
  double sigma = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Diagonal N(0, sigma^2); off-diagonal real and imaginary parts N(0, sigma^2/2).
Eigen::MatrixXcd sample_gue_matrix(const GueParams& params);
Spectrum sample_gue(const GueParams& params);

// --- special functions ---

/// Harmonic-oscillator function exp(-x^2/2) H_l(x) / sqrt(sqrt(pi) 2^l l!),
/// via the normalized recurrence carried with a separate exponent.
double hermite_phi(int l, double x);
/// phi_0(x) ... phi_{count-1}(x).
std::vector<double> hermite_phi_sequence(int count, double x);

/// K_d(x, y) = sum_{l<d} phi_l(x) phi_l(y).
double hermite_kernel(int d, double x, double y);

/// Generalized Laguerre polynomial L_n^(alpha)(z) by the three-term recurrence.
std::complex<double> laguerre(int n, int alpha, std::complex<double> z);

/// Modified Bessel function I_1 (series below |x| = 12, asymptotic above).
double bessel_i1(double x);
/// I_1(x)/x, equal to 1/2 at x = 0.
double bessel_i1_over_x(double x);

// --- ensemble analytics ---

/// <rho(E)> = K_d(E~, E~) / (sqrt(2) sigma), E~ = E / (sqrt(2) sigma).
double kernel_density(const GueParams& params, double energy);

/// <Z(x)> = exp(sigma^2 x^2 / 2) L_{d-1}^(1)(-sigma^2 x^2).
std::complex<double> mean_partition_gue(const GueParams& params, std::complex<double> x);

/// Annealed finite-d form factor <|Z(beta + i tau)|^2> / <Z(beta)>^2. d <= 512.
double sff_gue_finite(const GueParams& params, double beta, double tau);

/// Large-d estimate in fidelity time t (tau = 2t): semicircle Bessel term,
/// oscillatory 1/t^3 decay and linear ramp ending at t = sqrt(d)/sigma. d >= 10.
double sff_gue_asymptotic(const GueParams& params, double beta, double t);

/// Dip and plateau estimates in fidelity time, plus the annealed plateau height.
CharacteristicTimes gue_characteristic_times(const GueParams& params, double beta);

}  // namespace tfdlab
