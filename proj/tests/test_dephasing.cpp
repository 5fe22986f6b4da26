#include <cmath>
#include <complex>
#include <random>

#include "approx.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "tfdlab/dephasing.hpp"
#include "tfdlab/spectra.hpp"
#include "tfdlab/syk.hpp"

using namespace tfdlab;

namespace {

DephasingParams channel(double beta, double gamma) {
  DephasingParams p;
  p.beta = beta;
  p.gamma = gamma;
  return p;
}

double log2_ratio(const Spectrum& s, double beta) {
  // log2(Z(beta)^2 / Z(2 beta))
  return (2.0 * log_partition(s, {beta, 0.0}).real() - log_partition(s, {2.0 * beta, 0.0}).real()) / std::log(2.0);
}

Spectrum small_syk(int n, std::uint64_t seed) {
  SykParams p;
  p.n_majorana = n;
  p.seed = seed;
  return syk_spectrum(p);
}

// A spectrum with some exact degeneracies mixed in.
Spectrum random_spectrum(std::mt19937_64& rng, int n) {
  auto e = oracle::random_levels(rng, n, 1.5);
  e.push_back(e[0]);
  e.push_back(e[1]);
  return Spectrum(e);
}

// Full D^2 x D^2 density matrix of the doubled system from the |mm><nn| block.
Eigen::MatrixXcd embed(const Eigen::MatrixXcd& block) {
  const auto d = block.rows();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d * d, d * d);
  for (Eigen::Index m = 0; m < d; ++m)
    for (Eigen::Index n = 0; n < d; ++n) rho(m * d + m, n * d + n) = block(m, n);
  return rho;
}

Eigen::MatrixXcd partial_transpose(const Eigen::MatrixXcd& rho, Eigen::Index d) {
  Eigen::MatrixXcd out(rho.rows(), rho.cols());
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b)
      for (Eigen::Index c = 0; c < d; ++c)
        for (Eigen::Index e = 0; e < d; ++e) out(a * d + b, c * d + e) = rho(a * d + e, c * d + b);
  return out;
}

}  // namespace

TEST_CASE("parameter validation and observable names") {
  CHECK_THROWS_AS(channel(-1.0, 0.0).validate(), InvalidArgument);
  CHECK_THROWS_AS(channel(0.0, -0.1).validate(), InvalidArgument);
  CHECK_THROWS_AS(channel(std::nan(""), 0.0).validate(), InvalidArgument);
  CHECK_NOTHROW(channel(0.0, 0.0).validate());
  for (auto obs : {Observable::Fidelity, Observable::Purity, Observable::Renyi2, Observable::Negativity, Observable::Sff}) {
    CHECK(parse_observable(to_string(obs)) == obs);
  }
  CHECK_THROWS_AS(parse_observable("entropy"), InvalidArgument);

  ObservableSeries s{"x", {0.1, 0.2}, {1.0, 2.0}, std::nullopt};
  CHECK_NOTHROW(s.validate());
  s.times = {0.2, 0.2};
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s.times = {0.1, 0.2};
  s.sem = std::vector<double>{0.1};
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s.sem.reset();
  s.values = {1.0, std::nan("")};
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s.times = {0.0, 0.2};
  s.values = {1.0, 1.0};
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
}

TEST_CASE("fidelity: closed forms") {
  const Spectrum two({-1.0, 1.0});
  for (double gamma : {0.0, 0.3, 2.0}) {
    for (double t : {0.0, 0.1, 0.77, 3.0}) {
      const double want = 0.5 * (1.0 + std::cos(4.0 * t) * std::exp(-4.0 * gamma * t));
      CHECK(std::abs(fidelity(two, channel(0.0, gamma), t) - want) < 1e-15);
    }
  }
  std::mt19937_64 rng(3);
  for (int i = 0; i < 5; ++i) {
    const auto s = random_spectrum(rng, 12);
    CHECK(fidelity(s, channel(0.7, 1.3), 0.0) == 1.0);
  }
  CHECK_THROWS_AS(fidelity(two, channel(0.0, 0.0), -1.0), InvalidArgument);
}

TEST_CASE("fidelity at gamma = 0 is the form factor at 2t") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 6; ++i) {
    const auto s = random_spectrum(rng, 30);
    for (double beta : {0.0, 0.4, 2.0}) {
      const DephasingEvaluator eval(s, channel(beta, 0.0));
      for (double t : {0.0, 0.05, 0.9, 13.0, 400.0}) {
        CHECK(std::abs(fidelity(s, channel(beta, 0.0), t) - sff(s, beta, 2.0 * t)) < 1e-12);
        CHECK(std::abs(eval.evaluate(Observable::Fidelity, t) - eval.fidelity(t)) < 1e-12);
        CHECK(eval.evaluate(Observable::Sff, t) == sff(s, beta, 2.0 * t));
        CHECK(std::abs(eval.fidelity(t) - static_cast<double>(oracle::naive_sff(s.eigenvalues(), beta, 2.0 * t))) < 1e-12);
      }
    }
  }
}

TEST_CASE("fidelity reaches the plateau once gamma t gap^2 is large") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 4; ++i) {
    const auto s = random_spectrum(rng, 20);
    const double gap = s.min_gap();
    const double t = 1.0;
    const double gamma = 40.0 / (gap * gap * t);
    for (double beta : {0.0, 1.0}) {
      CHECK(fidelity(s, channel(beta, gamma), t) == rel(plateau_value(s, beta)).epsilon(1e-8));
    }
  }
}

TEST_CASE("evolve_tfd: structure and limits") {
  std::mt19937_64 rng(6);
  const auto s = random_spectrum(rng, 10);  // D = 12 with two degenerate pairs
  const auto d = s.dimension();
  for (double beta : {0.0, 0.8}) {
    const auto rho0 = evolve_tfd(s, channel(beta, 0.5), 0.0);
    CHECK(std::abs((rho0 * rho0).trace().real() - 1.0) < 1e-12);
    CHECK(std::abs(tfd_overlap(s, beta, rho0) - 1.0) < 1e-12);

    for (double t : {0.3, 2.0}) {
      const auto rho = evolve_tfd(s, channel(beta, 0.5), t);
      CHECK(std::abs(rho.trace() - 1.0) < 1e-12);
      CHECK((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
      CHECK(es.eigenvalues().minCoeff() > -1e-12);
    }

    const auto late = evolve_tfd(s, channel(beta, 1e6), 1e3);
    const auto& e = s.eigenvalues();
    double z = 0.0;
    for (double x : e) z += std::exp(-beta * x);
    for (int m = 0; m < d; ++m) {
      CHECK(std::abs(late(m, m).real() - std::exp(-beta * e[m]) / z) < 1e-14);
      for (int n = 0; n < d; ++n) {
        if (e[m] != e[n]) CHECK(std::abs(late(m, n)) < 1e-300);
      }
    }
  }
  CHECK_THROWS_AS(evolve_tfd(Spectrum(std::vector<double>(257, 0.0)), channel(0, 0), 1.0), InvalidArgument);
}

TEST_CASE("evolve_tfd oracle: fidelity, purity, negativity") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_spectrum(rng, 14);  // D = 16
    const double beta = 2.0 * u(rng), gamma = 3.0 * u(rng), t = 5.0 * u(rng);
    const auto p = channel(beta, gamma);
    const auto rho = evolve_tfd(s, p, t);
    INFO("beta=" << beta << " gamma=" << gamma << " t=" << t);
    CHECK(std::abs(tfd_overlap(s, beta, rho) - fidelity(s, p, t)) < 1e-12);
    CHECK(std::abs((rho * rho).trace().real() - purity(s, p, t)) < 1e-12);
    CHECK(std::abs(renyi2(s, p, t) + std::log2((rho * rho).trace().real())) < 1e-11);
  }
  // partial transpose of the full doubled-system state at D = 6
  for (int trial = 0; trial < 6; ++trial) {
    const auto s = random_spectrum(rng, 4);
    const double beta = 2.0 * u(rng), gamma = 3.0 * u(rng), t = 2.0 * u(rng);
    const auto p = channel(beta, gamma);
    const auto pt = partial_transpose(embed(evolve_tfd(s, p, t)), s.dimension());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(pt);
    const double trace_norm = es.eigenvalues().cwiseAbs().sum();
    CHECK(std::abs(log_negativity(s, p, t) - std::log2(trace_norm)) < 1e-12);
  }
}

TEST_CASE("purity, Renyi-2 and negativity limits") {
  std::mt19937_64 rng(8);
  const auto s = Spectrum(oracle::random_levels(rng, 24, 1.0));
  const auto degenerate = random_spectrum(rng, 20);
  for (double beta : {0.0, 0.6}) {
    const auto p = channel(beta, 2.0);
    CHECK(purity(s, p, 0.0) == rel(1.0).epsilon(1e-14));
    CHECK(std::abs(renyi2(s, p, 0.0)) < 1e-14);
    const double lz_half = log_partition(s, {beta / 2.0, 0.0}).real();
    const double lz = log_partition(s, {beta, 0.0}).real();
    CHECK(log_negativity(s, p, 0.0) == rel((2.0 * lz_half - lz) / std::log(2.0)).epsilon(1e-13));

    const double late = 1e9;
    CHECK(purity(s, p, late) == rel(plateau_value(s, beta)).epsilon(1e-12));
    CHECK(renyi2(s, p, late) == rel(log2_ratio(s, beta)).epsilon(1e-12));
    CHECK(std::abs(log_negativity(s, p, late)) < 1e-12);
    // with degeneracies the surviving blocks keep their N^2 weight
    CHECK(purity(degenerate, p, late) == rel(plateau_value(degenerate, beta)).epsilon(1e-12));
    CHECK(log_negativity(degenerate, p, late) > 0.0);
  }
  CHECK(renyi2(s, channel(0.0, 1.0), 1e9) == rel(std::log2(24.0)).epsilon(1e-12));
}

TEST_CASE("duality between negativity and Renyi-2") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 5; ++i) {
    const auto s = i < 3 ? random_spectrum(rng, 40) : small_syk(10 + 2 * i, i);
    for (double beta : {0.0, 0.3, 1.5}) {
      for (double gamma : {0.05, 1.0}) {
        const double want = log2_ratio(s, beta);
        for (double t : {0.0, 0.01, 0.4, 3.0, 50.0}) {
          const double lhs = log_negativity(s, channel(2.0 * beta, 2.0 * gamma), t) + renyi2(s, channel(beta, gamma), t);
          CHECK(std::abs(lhs - want) < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("monotonicity and ranges") {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 4; ++i) {
    const auto s = i % 2 ? small_syk(12, i) : random_spectrum(rng, 50);
    for (double beta : {0.0, 1.0}) {
      const DephasingEvaluator eval(s, channel(beta, 0.7));
      double prev_p = 2.0, prev_n = 1e9, prev_s = -1.0;
      for (int k = 0; k <= 300; ++k) {
        const double t = k == 0 ? 0.0 : 1e-3 * std::pow(1e6, k / 300.0);
        const double f = eval.fidelity(t), p = eval.purity(t), n = eval.log_negativity(t), r = eval.renyi2(t);
        CHECK(f > 0.0);
        CHECK(f <= 1.0 + 1e-15);
        CHECK(p > 0.0);
        CHECK(p <= 1.0 + 1e-15);
        CHECK(p <= prev_p + 1e-15);
        CHECK(n <= prev_n + 1e-12);
        CHECK(r >= prev_s - 1e-12);
        CHECK(n >= -1e-12);
        prev_p = p;
        prev_n = n;
        prev_s = r;
      }
    }
  }
}

TEST_CASE("early-time slopes set by the decoherence time") {
  for (auto s : {small_syk(12, 1), small_syk(10, 2)}) {
    for (double beta : {0.0, 0.5, 2.0}) {
      const auto p = channel(beta, 1.0);
      const auto td = decoherence_time(s, p);
      REQUIRE(!td.is_infinite());
      const double t = 1e-4 * td.value(), h = 0.5 * t;
      const double purity_slope = (purity(s, p, t + h) - purity(s, p, t - h)) / (2.0 * h);
      const double fidelity_slope = (fidelity(s, p, t + h) - fidelity(s, p, t - h)) / (2.0 * h);
      CHECK(purity_slope == rel(-1.0 / td.value()).epsilon(0.01));
      // the unitary part contributes at second order, t/t_unitary ~ t Var(E)^(1/2)
      CHECK(fidelity_slope == rel(-1.0 / (2.0 * td.value())).epsilon(0.01));
    }
  }
}

TEST_CASE("decoherence_time") {
  CHECK(decoherence_time(Spectrum({0.5}), channel(0.0, 1.0)).is_infinite());
  CHECK_FALSE(decoherence_time(Spectrum({0.5}), channel(0.0, 1.0)).unitary_limit());
  const auto unitary = decoherence_time(Spectrum({-1.0, 1.0}), channel(0.0, 0.0));
  CHECK(unitary.is_infinite());
  CHECK(unitary.unitary_limit());
  CHECK(decoherence_time(Spectrum({-1.0, 1.0}), channel(0.0, 3.0)).value() == rel(1.0 / 12.0).epsilon(1e-15));
  const auto s = small_syk(12, 4);
  for (double beta : {0.0, 1.0}) {
    CHECK(decoherence_time(s, channel(beta, 0.5)).value() == rel(1.0 / (2.0 * energy_variance(s, beta))).epsilon(1e-14));
  }
  // Gaussian density of variance N/4: 1/(4 gamma N/4) = 1/(gamma N)
  const int n = 20;
  const double var = 0.25 * n;
  const double gamma = 0.3;
  CHECK(1.0 / (4.0 * gamma * var) == rel(1.0 / (gamma * n)).epsilon(1e-15));
}

TEST_CASE("Gaussian quadrature rule") {
  QuadratureSpec q64;
  q64.panels = 4;
  REQUIRE(q64.nodes() == 64);
  CHECK(std::abs(gaussian_average([](double) { return 1.0; }, QuadratureSpec{}) - 1.0) < 1e-12);
  CHECK(std::abs(gaussian_average([](double) { return 1.0; }, q64) - 1.0) < 1e-12);
  CHECK(gaussian_average([](double u) { return u * u; }, q64) == rel(0.5).epsilon(1e-12));
  // <cos(a u)> = exp(-a^2/4)
  for (double a : {0.5, 3.0, 10.0}) {
    const double want = std::exp(-a * a / 4.0);
    CHECK(std::abs(gaussian_average([&](double u) { return std::cos(a * u); }, QuadratureSpec::for_bandwidth(a)) - want) < 1e-12);
  }
  CHECK(QuadratureSpec::for_bandwidth(1.0).panels == 8);
  CHECK(QuadratureSpec::for_bandwidth(400.0).panels == 600);
  QuadratureSpec bad;
  bad.panels = 0;
  CHECK_THROWS_AS(gaussian_average([](double) { return 1.0; }, bad), InvalidArgument);
}

TEST_CASE("fidelity by convolution agrees with the pair sum") {
  std::mt19937_64 rng(11);
  QuadratureSpec q64;
  q64.panels = 4;
  const auto s = random_spectrum(rng, 16);
  const double w = s.width();
  for (double beta : {0.0, 0.5}) {
    for (double gt : {0.02, 0.1}) {
      const double gamma = gt / (w * w);
      for (double t : {0.2, 1.0, 4.0}) {
        const auto p = channel(beta, gamma / t);
        CHECK(fidelity_by_convolution(s, p, t, q64) == rel(fidelity(s, p, t)).epsilon(1e-6));
      }
    }
  }
  // default rule across gamma t width^2 in [1e-3, 1e3]
  for (int i = 0; i < 5; ++i) {
    const auto sp = i < 3 ? random_spectrum(rng, 30) : small_syk(10, i);
    const double width = sp.width();
    for (double gtw2 : {1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1e3}) {
      for (double t : {0.5, 3.0, 30.0}) {
        const auto p = channel(0.3, gtw2 / (t * width * width));
        CHECK(fidelity_by_convolution(sp, p, t) == rel(fidelity(sp, p, t)).epsilon(1e-9));
      }
    }
  }
  const Spectrum two({-1.0, 1.0});
  CHECK_THROWS_AS(fidelity_by_convolution(two, channel(0.0, 0.0), 1.0), InvalidArgument);
  CHECK_THROWS_AS(fidelity_by_convolution(two, channel(0.0, 1.0), 0.0), InvalidArgument);
  // heavy smoothing gives the time average of g, the plateau
  const double heavy = 40.0 / (s.min_gap() * s.min_gap());
  CHECK(fidelity_by_convolution(s, channel(0.5, heavy), 1.0) == rel(plateau_value(s, 0.5)).epsilon(1e-6));
}
