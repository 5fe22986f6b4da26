#include "tfdlab/gue.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "tfdlab/numfmt.hpp"
#include "tfdlab/rng.hpp"

namespace tfdlab {

namespace {

constexpr std::uint64_t kGueStream = 0x4755456e73656d62ULL;
constexpr double kRescaleAbove = 1e100;
constexpr int kMaxFiniteDim = 512;

// Value = mantissa * exp(log_scale).
struct Scaled {
  std::complex<double> mantissa;
  double log_scale;

  double log_abs() const { return std::log(std::abs(mantissa)) + log_scale; }
};

// L_0^(alpha)(z) ... L_nmax^(alpha)(z) without overflow.
std::vector<Scaled> laguerre_scaled(int nmax, int alpha, std::complex<double> z) {
  std::vector<Scaled> out;
  out.reserve(nmax + 1);
  std::complex<double> prev{1.0, 0.0};
  double scale = 0.0;
  out.push_back({prev, scale});
  if (nmax == 0) return out;
  std::complex<double> cur = 1.0 + static_cast<double>(alpha) - z;
  out.push_back({cur, scale});
  for (int n = 1; n < nmax; ++n) {
    const std::complex<double> next =
        ((2.0 * n + 1.0 + alpha - z) * cur - static_cast<double>(n + alpha) * prev) /
        static_cast<double>(n + 1);
    prev = cur;
    cur = next;
    const double mag = std::abs(cur);
    if (mag > kRescaleAbove) {
      prev /= mag;
      cur /= mag;
      scale += std::log(mag);
    }
    out.push_back({cur, scale});
  }
  return out;
}

// phi_0 ... phi_{count-1} at x sharing a running exponent; calls
// visit(l, mantissa, log_scale) and, on rescale by factor f, rescale(f).
template <class Visit>
void hermite_recurrence(int count, double x, Visit&& visit) {
  if (count <= 0) return;
  double scale = -0.5 * x * x - 0.25 * std::log(std::numbers::pi);
  double prev = 1.0;
  visit(0, prev, scale);
  if (count == 1) return;
  double cur = std::numbers::sqrt2 * x * prev;
  visit(1, cur, scale);
  for (int l = 1; l + 1 < count; ++l) {
    const double next =
        x * std::sqrt(2.0 / (l + 1)) * cur - std::sqrt(static_cast<double>(l) / (l + 1)) * prev;
    prev = cur;
    cur = next;
    const double mag = std::abs(cur);
    if (mag > kRescaleAbove) {
      prev /= mag;
      cur /= mag;
      scale += std::log(mag);
    }
    visit(l + 1, cur, scale);
  }
}

double sinh_over_x(double x) {
  if (std::abs(x) < 1e-4) return 1.0 + x * x / 6.0;
  return std::sinh(x) / x;
}

}  // namespace

void GueParams::validate() const {
  if (dim < 1) throw InvalidArgument("GUE dimension must be >= 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("GUE sigma must be positive and finite");
  }
}

Eigen::MatrixXcd sample_gue_matrix(const GueParams& params) {
  params.validate();
  const int d = params.dim;
  const std::uint64_t key = hash_combine(params.seed, kGueStream);
  const double off = params.sigma / std::numbers::sqrt2;
  Eigen::MatrixXcd h(d, d);
  for (int i = 0; i < d; ++i) {
    // Counter layout: row-major upper triangle, two draws per entry.
    for (int j = i; j < d; ++j) {
      const auto counter = 2 * (static_cast<std::uint64_t>(i) * d + j);
      if (i == j) {
        h(i, i) = params.sigma * standard_normal(key, counter);
      } else {
        const std::complex<double> v{off * standard_normal(key, counter),
                                     off * standard_normal(key, counter + 1)};
        h(i, j) = v;
        h(j, i) = std::conj(v);
      }
    }
  }
  return h;
}

Spectrum sample_gue(const GueParams& params) {
  auto eigenvalues = hermitian_eigenvalues(sample_gue_matrix(params));
  SpectrumMeta meta;
  meta.model = "gue";
  meta.params = {{"dim", std::to_string(params.dim)}, {"sigma", format_double(params.sigma)}};
  meta.seed = params.seed;
  return Spectrum(std::move(eigenvalues), std::move(meta));
}

double hermite_phi(int l, double x) {
  if (l < 0) throw InvalidArgument("hermite_phi: order must be >= 0");
  double value = 0.0;
  hermite_recurrence(l + 1, x, [&](int k, double m, double s) {
    if (k == l) value = m * std::exp(s);
  });
  return value;
}

std::vector<double> hermite_phi_sequence(int count, double x) {
  std::vector<double> out(std::max(count, 0));
  hermite_recurrence(count, x, [&](int k, double m, double s) { out[k] = m * std::exp(s); });
  return out;
}

double hermite_kernel(int d, double x, double y) {
  const auto px = hermite_phi_sequence(d, x);
  const auto py = hermite_phi_sequence(d, y);
  double k = 0.0;
  for (int l = 0; l < d; ++l) k += px[l] * py[l];
  return k;
}

std::complex<double> laguerre(int n, int alpha, std::complex<double> z) {
  if (n < 0 || alpha < 0) throw InvalidArgument("laguerre: n and alpha must be >= 0");
  const Scaled v = laguerre_scaled(n, alpha, z).back();
  return v.mantissa * std::exp(v.log_scale);
}

double bessel_i1(double x) {
  const double ax = std::abs(x);
  double result;
  if (ax <= 12.0) {
    result = ax * bessel_i1_over_x(ax);
  } else {
    // I_1(x) ~ e^x / sqrt(2 pi x) * sum_k t_k, t_k = -t_{k-1} (4 - (2k-1)^2) / (8 k x).
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 40; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double next = -term * (4.0 - odd * odd) / (8.0 * k * ax);
      if (std::abs(next) > std::abs(term)) break;
      term = next;
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    result = std::exp(ax) / std::sqrt(2.0 * std::numbers::pi * ax) * sum;
  }
  return x < 0 ? -result : result;
}

double bessel_i1_over_x(double x) {
  const double ax = std::abs(x);
  if (ax > 12.0) return bessel_i1(ax) / ax;
  // I_1(x)/x = (1/2) sum_k (x/2)^(2k) / (k! (k+1)!)
  const double q = 0.25 * ax * ax;
  double term = 0.5, sum = 0.5;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * (k + 1));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

double kernel_density(const GueParams& params, double energy) {
  params.validate();
  const double scale = std::numbers::sqrt2 * params.sigma;
  const double x = energy / scale;
  double sum = 0.0, sum_scale = 0.0;
  bool first = true;
  hermite_recurrence(params.dim, x, [&](int, double m, double s) {
    if (first) {
      sum_scale = s;
      first = false;
    } else if (s != sum_scale) {
      sum *= std::exp(2.0 * (sum_scale - s));
      sum_scale = s;
    }
    sum += m * m;
  });
  return sum * std::exp(2.0 * sum_scale) / scale;
}

std::complex<double> mean_partition_gue(const GueParams& params, std::complex<double> x) {
  params.validate();
  const double s2 = params.sigma * params.sigma;
  const std::complex<double> x2 = x * x;
  const Scaled l = laguerre_scaled(params.dim - 1, 1, -s2 * x2).back();
  return l.mantissa * std::exp(s2 * x2 / 2.0 + l.log_scale);
}

double sff_gue_finite(const GueParams& params, double beta, double tau) {
  params.validate();
  const int d = params.dim;
  if (d > kMaxFiniteDim) {
    throw InvalidArgument("sff_gue_finite supports d <= " + std::to_string(kMaxFiniteDim));
  }
  const double s2 = params.sigma * params.sigma;
  const std::complex<double> bt{beta, tau};
  const std::complex<double> arg = -s2 * bt * bt;
  const double r = s2 * std::norm(bt);
  const double damp = -s2 * tau * tau;

  const double log_den = 2.0 * laguerre_scaled(d - 1, 1, {-s2 * beta * beta, 0.0}).back().log_abs();
  const double log_a =
      s2 * beta * beta + laguerre_scaled(d - 1, 1, {-4.0 * s2 * beta * beta, 0.0}).back().log_abs();
  const double log_b = damp + 2.0 * laguerre_scaled(d - 1, 1, arg).back().log_abs();

  double connected = 0.0;
  const double log_r = r > 0.0 ? std::log(r) : 0.0;
  for (int alpha = 0; alpha < d; ++alpha) {
    if (alpha > 0 && r == 0.0) break;
    const auto seq = laguerre_scaled(d - 1 - alpha, alpha, arg);
    // log(p!/q!) with q = p + alpha, updated as a running product.
    double log_ratio = -std::lgamma(alpha + 1.0);
    const double mult = alpha == 0 ? 1.0 : 2.0;
    for (int p = 0; p + alpha < d; ++p) {
      if (p > 0) log_ratio += std::log(static_cast<double>(p)) - std::log(static_cast<double>(p + alpha));
      const double mag = std::abs(seq[p].mantissa);
      if (mag == 0.0) continue;
      const double log_term =
          damp + log_ratio + alpha * log_r + 2.0 * (std::log(mag) + seq[p].log_scale);
      connected += mult * std::exp(log_term - log_den);
    }
  }
  return std::exp(log_a - log_den) + std::exp(log_b - log_den) - connected;
}

double sff_gue_asymptotic(const GueParams& params, double beta, double t) {
  params.validate();
  if (params.dim < 10) throw InvalidArgument("sff_gue_asymptotic requires d >= 10");
  const double d = params.dim;
  const double sigma = params.sigma;
  const double a = sigma * std::sqrt(d);
  const double rt_d = std::sqrt(d);

  const double disconnected_2beta = 2.0 * d * bessel_i1_over_x(4.0 * a * beta);
  const double oscillatory =
      rt_d * (1.0 - std::sin(8.0 * a * t)) / (16.0 * std::numbers::pi * t * t * t * sigma * sigma * sigma);
  const double t_plateau = rt_d / sigma;
  const double ramp = t <= t_plateau
                          ? -rt_d * sigma * sinh_over_x(std::numbers::pi * a * beta) * (t_plateau - t)
                          : 0.0;
  const double z_beta = 2.0 * d * bessel_i1_over_x(2.0 * a * beta);
  return (disconnected_2beta + oscillatory + ramp) / (z_beta * z_beta);
}

CharacteristicTimes gue_characteristic_times(const GueParams& params, double beta) {
  params.validate();
  const double d = params.dim;
  const double sigma = params.sigma;
  const double a = sigma * std::sqrt(d);
  CharacteristicTimes times;
  times.tau_D = DecoherenceTime::infinite(true);
  times.t_plateau_est = std::sqrt(d) / sigma;
  times.t_dip_est = 0.5 * std::pow(std::numbers::pi * std::pow(sigma, 4) *
                                       sinh_over_x(std::numbers::pi * a * beta),
                                   -0.25);
  const double s2b2 = sigma * sigma * beta * beta;
  const double num = laguerre_scaled(params.dim - 1, 1, {-4.0 * s2b2, 0.0}).back().log_abs();
  const double den = laguerre_scaled(params.dim - 1, 1, {-s2b2, 0.0}).back().log_abs();
  times.plateau_value = std::exp(s2b2 + num - 2.0 * den);
  return times;
}

}  // namespace tfdlab
