#include "tfdlab/syk.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "tfdlab/numfmt.hpp"
#include "tfdlab/rng.hpp"

namespace tfdlab {

namespace {

constexpr int kMaxMajorana = 30;
constexpr std::uint64_t kCouplingStream = 0x53594b4a6b6c6d6eULL;

double majorana_scale(MajoranaNorm norm) {
  return norm == MajoranaNorm::Half ? std::sqrt(0.5) : 1.0;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// chi_k chi_l chi_m chi_n |state>, rightmost factor first.
BasisImage apply_quartic(const std::array<int, 4>& q, std::uint64_t state, MajoranaNorm norm) {
  std::complex<double> coeff{1.0, 0.0};
  for (int j = 3; j >= 0; --j) {
    const BasisImage img = majorana_on_basis(q[j], state, norm);
    state = img.state;
    coeff *= img.coeff;
  }
  return {state, coeff};
}

}  // namespace

const char* to_string(MajoranaNorm norm) { return norm == MajoranaNorm::Half ? "half" : "unit"; }

const char* to_string(SymmetryClass cls) {
  switch (cls) {
    case SymmetryClass::GOE: return "GOE";
    case SymmetryClass::GUE: return "GUE";
    case SymmetryClass::GSE: return "GSE";
  }
  return "?";
}

MajoranaNorm parse_majorana_norm(const std::string& text) {
  if (text == "half") return MajoranaNorm::Half;
  if (text == "unit") return MajoranaNorm::Unit;
  throw InvalidArgument("unknown Majorana normalization '" + text + "' (expected half|unit)");
}

void SykParams::validate() const {
  if (n_majorana < 4 || n_majorana % 2 != 0) {
    throw InvalidArgument("SYK needs an even number of Majoranas >= 4, got " +
                          std::to_string(n_majorana));
  }
  if (!(coupling > 0.0) || !std::isfinite(coupling)) {
    throw InvalidArgument("SYK coupling scale must be positive and finite");
  }
}

CouplingTensor::CouplingTensor(int n_majorana, std::vector<double> values)
    : n_(n_majorana), values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(binomial(n_, 4) + 0.5)) {
    throw InvalidArgument("coupling tensor must hold C(N,4) entries");
  }
}

std::size_t CouplingTensor::rank(int n_majorana, int k, int l, int m, int n) {
  if (!(1 <= k && k < l && l < m && m < n && n <= n_majorana)) {
    throw InvalidArgument("coupling indices must satisfy 1 <= k < l < m < n <= N");
  }
  // Count quadruples preceding (k,l,m,n) in lexicographic order.
  const int big = n_majorana;
  double r = 0.0;
  for (int a = 1; a < k; ++a) r += binomial(big - a, 3);
  for (int b = k + 1; b < l; ++b) r += binomial(big - b, 2);
  for (int c = l + 1; c < m; ++c) r += binomial(big - c, 1);
  r += n - m - 1;
  return static_cast<std::size_t>(r + 0.5);
}

double CouplingTensor::at(int k, int l, int m, int n) const {
  return values_[rank(n_, k, l, m, n)];
}

std::vector<std::array<int, 4>> CouplingTensor::quadruples(int n_majorana) {
  std::vector<std::array<int, 4>> out;
  out.reserve(static_cast<std::size_t>(binomial(n_majorana, 4) + 0.5));
  for (int k = 1; k <= n_majorana; ++k)
    for (int l = k + 1; l <= n_majorana; ++l)
      for (int m = l + 1; m <= n_majorana; ++m)
        for (int n = m + 1; n <= n_majorana; ++n) out.push_back({k, l, m, n});
  return out;
}

double coupling_variance(const SykParams& params) {
  const double n = params.n_majorana;
  return 6.0 * params.coupling * params.coupling / (n * n * n);
}

CouplingTensor sample_couplings(const SykParams& params) {
  params.validate();
  const std::size_t count = static_cast<std::size_t>(binomial(params.n_majorana, 4) + 0.5);
  const double sd = std::sqrt(coupling_variance(params));
  const std::uint64_t key = hash_combine(params.seed, kCouplingStream);
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) values[i] = sd * standard_normal(key, i);
  return CouplingTensor(params.n_majorana, std::move(values));
}

BasisImage majorana_on_basis(int k, std::uint64_t state, MajoranaNorm norm) {
  const int qubit = (k - 1) / 2;
  const std::uint64_t bit = std::uint64_t{1} << qubit;
  const int below = std::popcount(state & (bit - 1));
  double sign = (below & 1) ? -1.0 : 1.0;
  sign *= majorana_scale(norm);
  if (k % 2 == 1) return {state ^ bit, {sign, 0.0}};  // X
  // Y|0> = i|1>, Y|1> = -i|0>
  return {state ^ bit, {0.0, (state & bit) ? -sign : sign}};
}

std::vector<std::complex<double>> majorana_apply(int k, int n_majorana, MajoranaNorm norm,
                                                 std::span<const std::complex<double>> vec) {
  if (k < 1 || k > n_majorana) {
    throw InvalidArgument("Majorana index " + std::to_string(k) + " outside [1, " +
                          std::to_string(n_majorana) + "]");
  }
  const std::size_t dim = std::size_t{1} << (n_majorana / 2);
  if (vec.size() != dim) throw InvalidArgument("state vector length must be 2^(N/2)");
  std::vector<std::complex<double>> out(dim);
  for (std::uint64_t s = 0; s < dim; ++s) {
    const BasisImage img = majorana_on_basis(k, s, norm);
    out[img.state] += img.coeff * vec[s];
  }
  return out;
}

Eigen::MatrixXcd build_hamiltonian(const SykParams& params, const CouplingTensor& couplings) {
  params.validate();
  if (params.n_majorana > kMaxMajorana) {
    throw InvalidArgument("dense SYK Hamiltonian limited to N <= " + std::to_string(kMaxMajorana));
  }
  const auto dim = static_cast<Eigen::Index>(params.dimension());
  const auto quads = CouplingTensor::quadruples(params.n_majorana);
  const auto& j = couplings.values();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    for (std::size_t t = 0; t < quads.size(); ++t) {
      const BasisImage img = apply_quartic(quads[t], static_cast<std::uint64_t>(col),
                                           params.normalization);
      h(static_cast<Eigen::Index>(img.state), col) += j[t] * img.coeff;
    }
  }
  return h;
}

Eigen::MatrixXcd build_parity_block(const SykParams& params, const CouplingTensor& couplings,
                                    int parity) {
  params.validate();
  if (params.n_majorana > kMaxMajorana) {
    throw InvalidArgument("dense SYK Hamiltonian limited to N <= " + std::to_string(kMaxMajorana));
  }
  const std::size_t dim = params.dimension();
  std::vector<std::uint64_t> states;
  std::vector<Eigen::Index> index(dim, -1);
  for (std::uint64_t s = 0; s < dim; ++s) {
    if ((std::popcount(s) & 1) == parity) {
      index[s] = static_cast<Eigen::Index>(states.size());
      states.push_back(s);
    }
  }
  const auto quads = CouplingTensor::quadruples(params.n_majorana);
  const auto& j = couplings.values();
  const auto block = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(block, block);
  for (Eigen::Index col = 0; col < block; ++col) {
    for (std::size_t t = 0; t < quads.size(); ++t) {
      const BasisImage img = apply_quartic(quads[t], states[col], params.normalization);
      h(index[img.state], col) += j[t] * img.coeff;
    }
  }
  return h;
}

Spectrum syk_spectrum(const SykParams& params) {
  params.validate();
  const auto couplings = sample_couplings(params);
  std::vector<double> eigenvalues;
  if (params.parity_blocks) {
    for (int parity = 0; parity < 2; ++parity) {
      auto part = hermitian_eigenvalues(build_parity_block(params, couplings, parity));
      eigenvalues.insert(eigenvalues.end(), part.begin(), part.end());
    }
  } else {
    eigenvalues = hermitian_eigenvalues(build_hamiltonian(params, couplings));
  }
  SpectrumMeta meta;
  meta.model = "syk";
  meta.params = {{"n_majorana", std::to_string(params.n_majorana)},
                 {"coupling", format_double(params.coupling)},
                 {"normalization", to_string(params.normalization)}};
  meta.seed = params.seed;
  return Spectrum(std::move(eigenvalues), std::move(meta));
}

SymmetryClass symmetry_class(int n_majorana) {
  if (n_majorana % 2 != 0) {
    throw InvalidArgument("symmetry class needs an even Majorana count, got " +
                          std::to_string(n_majorana));
  }
  switch (((n_majorana % 8) + 8) % 8) {
    case 0: return SymmetryClass::GOE;
    case 4: return SymmetryClass::GSE;
    default: return SymmetryClass::GUE;
  }
}

std::complex<double> gaussian_dos_partition(int n_majorana, double dimension,
                                            std::complex<double> z) {
  return dimension * std::exp(static_cast<double>(n_majorana) * z * z / 8.0);
}

double syk_expected_variance(const SykParams& params) {
  const double s2 = params.normalization == MajoranaNorm::Half ? 0.5 : 1.0;
  return binomial(params.n_majorana, 4) * coupling_variance(params) * std::pow(s2, 4);
}

}  // namespace tfdlab
