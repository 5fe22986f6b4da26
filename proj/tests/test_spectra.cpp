#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>

#include "approx.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "tfdlab/dephasing.hpp"
#include "tfdlab/gue.hpp"
#include "tfdlab/spectra.hpp"
#include "tfdlab/syk.hpp"

using namespace tfdlab;

namespace {

Spectrum syk8(std::uint64_t seed = 3) {
  SykParams p;
  p.n_majorana = 8;
  p.seed = seed;
  return syk_spectrum(p);
}

}  // namespace

TEST_CASE("hermitian_eigenvalues: small closed forms") {
  Eigen::MatrixXcd d(2, 2);
  d << 1, 0, 0, -1;
  auto ev = hermitian_eigenvalues(d);
  REQUIRE(ev.size() == 2);
  CHECK(ev[0] == rel(-1.0));
  CHECK(ev[1] == rel(1.0));

  Eigen::MatrixXcd y(2, 2);
  y << 0, std::complex<double>(0, 1), std::complex<double>(0, -1), 0;
  ev = hermitian_eigenvalues(y);
  CHECK(ev[0] == rel(-1.0).epsilon(1e-14));
  CHECK(ev[1] == rel(1.0).epsilon(1e-14));
}

TEST_CASE("hermitian_eigenvalues: characteristic polynomial oracle on random 8x8") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = oracle::random_hermitian(rng, 8);
    const auto ev = hermitian_eigenvalues(a);
    const auto roots = oracle::charpoly_eigenvalues(a);
    REQUIRE(roots.size() == 8);
    for (int i = 0; i < 8; ++i) CHECK(std::abs(ev[i] - roots[i]) < 1e-8);
    CHECK(std::is_sorted(ev.begin(), ev.end()));

    // residual contract
    const double scale = 1e-8 * 8 * a.cwiseAbs().maxCoeff();
    double s1 = 0.0, s2 = 0.0;
    for (double e : ev) {
      s1 += e;
      s2 += e * e;
    }
    CHECK(std::abs(s1 - a.trace().real()) < scale);
    CHECK(std::abs(s2 - (a * a).trace().real()) < scale * a.cwiseAbs().maxCoeff() * 8);
  }
}

TEST_CASE("hermitian_eigenvalues: rejects non-Hermitian input and names the element") {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(3, 3);
  a(0, 2) = 1e-6;
  try {
    hermitian_eigenvalues(a);
    FAIL("expected rejection");
  } catch (const InvalidArgument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("(0, 2)") != std::string::npos);
  }
  a(0, 2) = 1e-12;  // within tolerance
  CHECK_NOTHROW(hermitian_eigenvalues(a));
  CHECK_THROWS_AS(hermitian_eigenvalues(Eigen::MatrixXcd(2, 3)), InvalidArgument);
}

TEST_CASE("Spectrum: merge, ordering and invariants") {
  const Spectrum s({3.0, -1.0, 1.0, 1.0 + 1e-12, 1.0 - 1e-12, -1.0});
  REQUIRE(s.level_count() == 3);
  CHECK(s.levels()[0].energy == -1.0);
  CHECK(s.levels()[0].multiplicity == 2);
  CHECK(s.levels()[1].multiplicity == 3);
  CHECK(s.levels()[1].energy == rel(1.0).epsilon(1e-15));
  CHECK(s.dimension() == 6);
  CHECK(s.width() == 4.0);
  CHECK(s.min_gap() == rel(2.0));
  for (std::size_t i = 1; i < s.level_count(); ++i) CHECK(s.levels()[i].energy > s.levels()[i - 1].energy);

  CHECK_THROWS_AS(Spectrum({}), InvalidArgument);
  CHECK_THROWS_AS(Spectrum({0.0, std::nan("")}), InvalidArgument);
  CHECK_THROWS_AS(Spectrum({0.0, INFINITY}), InvalidArgument);

  const Spectrum single({2.5});
  CHECK(single.level_count() == 1);
  CHECK(single.min_gap() == 0.0);
  CHECK(single.width() == 0.0);
}

TEST_CASE("Spectrum: degeneracy count is insensitive to the merge tolerance") {
  // Kramers and parity pairs split at ~1e-14 relative; distinct levels are
  // far above 1e-7 relative at these sizes.
  for (int n : {10, 12, 18}) {
    SykParams p;
    p.n_majorana = n;
    p.seed = 5;
    const auto ev = syk_spectrum(p).eigenvalues();
    const std::size_t reference = Spectrum(ev).level_count();
    CHECK(Spectrum(ev, {}, 1e-11).level_count() == reference);
    CHECK(Spectrum(ev, {}, 1e-7).level_count() == reference);
  }
}

TEST_CASE("log_partition: closed forms") {
  const Spectrum single({0.0});
  CHECK(std::abs(log_partition(single, {1.3, -4.0})) < 1e-15);
  const Spectrum s({-0.4, 0.1, 0.1, 0.7, 2.0});
  const auto l0 = log_partition(s, {0.0, 0.0});
  CHECK(l0.real() == rel(std::log(5.0)).epsilon(1e-15));
  CHECK(l0.imag() == 0.0);
}

TEST_CASE("log_partition: naive extended-precision oracle") {
  const Spectrum s = syk8();
  for (double beta : {0.0, 0.3, 1.0, 5.0}) {
    const double got = log_partition(s, {beta, 0.0}).real();
    const long double want = oracle::naive_log_partition(s.eigenvalues(), beta);
    CHECK(std::abs(got - static_cast<double>(want)) <= 1e-12 * std::max(1.0L, std::abs(want)));
  }
  // |beta E| up to 50 with a stretched spectrum
  std::vector<double> wide;
  for (double e : s.eigenvalues()) wide.push_back(e * 50.0 / s.width());
  const Spectrum w(wide);
  for (double beta : {0.5, 1.0}) {
    const double got = log_partition(w, {beta, 0.0}).real();
    const long double want = oracle::naive_log_partition(w.eigenvalues(), beta);
    CHECK(std::abs(got - static_cast<double>(want)) <= 1e-12 * std::abs(want));
  }
}

TEST_CASE("log_partition: no overflow at beta*|E| ~ 700 and principal branch") {
  const Spectrum s({-700.0, -699.0, 0.0});
  const auto l = log_partition(s, {1.0, 0.0});
  CHECK(std::isfinite(l.real()));
  CHECK(l.real() == rel(700.0 + std::log1p(std::exp(-1.0))).epsilon(1e-14));
  std::mt19937_64 rng(2);
  const Spectrum r(oracle::random_levels(rng, 30, 3.0));
  for (double tau : {0.5, 3.0, 40.0, 1e4}) {
    const auto v = log_partition(r, {0.2, tau});
    CHECK(v.imag() > -std::numbers::pi);
    CHECK(v.imag() <= std::numbers::pi);
    std::complex<long double> z = 0.0;
    for (double e : r.eigenvalues()) z += std::exp(std::complex<long double>(-0.2L * e, -tau * e));
    CHECK(std::abs(std::exp(std::complex<long double>(v)) - z) < 1e-11 * std::abs(z) + 1e-13);
  }
}

TEST_CASE("sff: range, evenness, closed forms") {
  const Spectrum two({-1.0, 1.0});
  for (double tau : {0.0, 0.3, 1.7, 12.0}) {
    CHECK(sff(two, 0.0, tau) == rel(std::cos(tau) * std::cos(tau)).epsilon(1e-14));
  }
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Spectrum s(oracle::random_levels(rng, 20));
    const double beta = 0.2 * trial;
    CHECK(sff(s, beta, 0.0) == 1.0);
    for (double tau : {0.1, 1.0, 7.5, 300.0}) {
      const double g = sff(s, beta, tau);
      CHECK(g > 0.0);
      CHECK(g <= 1.0);
      CHECK(g == rel(sff(s, beta, -tau)).epsilon(1e-13));
      CHECK(std::abs(g - static_cast<double>(oracle::naive_sff(s.eigenvalues(), beta, tau))) < 1e-13);
    }
  }
}

TEST_CASE("plateau_value: degeneracy weighting") {
  std::mt19937_64 rng(9);
  const auto e = oracle::random_levels(rng, 16);
  const Spectrum s(e);
  CHECK(plateau_value(s, 0.0) == rel(1.0 / 16).epsilon(1e-14));
  auto doubled = e;
  doubled.insert(doubled.end(), e.begin(), e.end());
  const Spectrum d(doubled);
  CHECK(d.level_count() == 16);
  CHECK(plateau_value(d, 0.0) == rel(2.0 / 32).epsilon(1e-14));
  CHECK(plateau_value(Spectrum({0.7}), 3.0) == rel(1.0));
  // nondegenerate: Z(2 beta) / Z(beta)^2
  for (double beta : {0.3, 1.0, 2.0}) {
    const double want = std::exp(log_partition(s, {2 * beta, 0}).real() - 2 * log_partition(s, {beta, 0}).real());
    CHECK(plateau_value(s, beta) == rel(want).epsilon(1e-13));
  }
}

TEST_CASE("energy_variance: closed forms and finite-difference oracle") {
  CHECK(energy_variance(Spectrum({1.5}), 0.7) == 0.0);
  CHECK(energy_variance(Spectrum({-1.0, 1.0}), 0.0) == rel(1.0).epsilon(1e-15));
  const Spectrum s = syk8(8);
  const double h = 1e-3;
  for (double beta : {0.0, 0.5, 1.0, 2.0}) {
    auto lz = [&](double b) { return log_partition(s, {b, 0.0}).real(); };
    const double fd = (lz(beta + h) - 2 * lz(beta) + lz(beta - h)) / (h * h);
    CHECK(energy_variance(s, beta) == rel(fd).epsilon(1e-6));
    CHECK(energy_variance(s, beta) >= 0.0);
  }
}

TEST_CASE("boltzmann_weights sum to one") {
  const Spectrum s({0.0, 0.0, 1.0, 3.0});
  const auto w = boltzmann_weights(s, 0.8);
  REQUIRE(w.size() == 3);
  CHECK(w[0] + w[1] + w[2] == rel(1.0).epsilon(1e-15));
  CHECK(w[0] == rel(2.0 / (2.0 + std::exp(-0.8) + std::exp(-2.4))));
}

TEST_CASE("plateau identity: long-time dephased fidelity equals plateau_value") {
  for (int n : {8, 10, 12}) {
    SykParams p;
    p.n_majorana = n;
    p.seed = 21;
    const Spectrum s = syk_spectrum(p);
    for (double beta : {0.0, 1.0}) {
      const double gap = s.min_gap();
      const double t = 1.0;
      const DephasingParams dp{beta, 40.0 / (gap * gap * t)};
      CHECK(fidelity(s, dp, t) == rel(plateau_value(s, beta)).epsilon(1e-8));
    }
  }
}

TEST_CASE("serialization round trip") {
  SykParams p;
  p.n_majorana = 10;
  p.seed = 0xfeedULL;
  const Spectrum s = syk_spectrum(p);
  std::stringstream buf;
  write_spectrum(buf, s);
  const std::string text = buf.str();
  CHECK(text.rfind("# tfdlab-spectrum v1\n", 0) == 0);
  CHECK(text.find('\r') == std::string::npos);
  const Spectrum r = read_spectrum(buf);
  CHECK(r.eigenvalues() == s.eigenvalues());
  CHECK(r.content_hash() == s.content_hash());
  CHECK(r.meta().model == "syk");
  CHECK(r.meta().seed == p.seed);
  CHECK(r.meta().params == s.meta().params);
  CHECK(r.level_count() == s.level_count());

  const auto path = std::filesystem::temp_directory_path() / "tfdlab_spectra_roundtrip.spectrum";
  save_spectrum(path.string(), s);
  CHECK(load_spectrum(path.string()).content_hash() == s.content_hash());
  std::filesystem::remove(path);

  const Spectrum g = sample_gue({7, 0.5, 3});
  std::stringstream gbuf;
  write_spectrum(gbuf, g);
  CHECK(read_spectrum(gbuf).eigenvalues() == g.eigenvalues());
}

TEST_CASE("serialization rejects malformed input") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_spectrum(in);
  };
  CHECK_THROWS_AS(parse("# tfdlab-spectrum v2\n# count 1\n0\n"), InvalidArgument);
  CHECK_THROWS_AS(parse("garbage\n"), InvalidArgument);
  CHECK_THROWS_AS(parse("# tfdlab-spectrum v1\n# count 2\n0.5\n"), InvalidArgument);
  CHECK_THROWS_AS(parse("# tfdlab-spectrum v1\n# count 1\nabc\n"), InvalidArgument);
  CHECK_THROWS_AS(load_spectrum("/nonexistent/dir/x.spectrum"), std::exception);
  CHECK(parse("# tfdlab-spectrum v1\n# model user\n# seed 0\n# count 2\n1\n-1\n").dimension() == 2);
}

TEST_CASE("content hash distinguishes spectra") {
  CHECK(Spectrum({1.0, 2.0}).content_hash() != Spectrum({1.0, 2.0000000000000004}).content_hash());
  CHECK(Spectrum({2.0, 1.0}).content_hash() == Spectrum({1.0, 2.0}).content_hash());
}
