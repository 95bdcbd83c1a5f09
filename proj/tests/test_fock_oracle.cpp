#include <doctest.h>

#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "helpers.hpp"
#include "pekar/error.hpp"
#include "pekar/fock_oracle.hpp"

using namespace pekar;
using testutil::rel;

namespace {

constexpr double kPi = std::numbers::pi;

std::size_t binomial(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Dense chain matrix, built independently of chain_electron.
Eigen::MatrixXd chain_matrix(int sites, double s, double beta, const std::vector<double>& V) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(sites, sites);
  for (int i = 0; i < sites; ++i) {
    h(i, i) += 2 * beta / (s * s) + V[i];
    h(i, (i + 1) % sites) -= beta / (s * s);
    h(i, (i + sites - 1) % sites) -= beta / (s * s);
  }
  return h;
}

// omega a^dag a + g (a + a^dag) on {0..n_max}, densely.
double dense_displaced_oscillator(double omega, double g, int n_max) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n_max + 1, n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    h(n, n) = omega * n;
    if (n < n_max) h(n, n + 1) = h(n + 1, n) = g * std::sqrt(n + 1.0);
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues()(0);
}

std::vector<cplx> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::vector<cplx> v(n);
  for (auto& x : v) x = cplx(nd(rng), nd(rng));
  return v;
}

cplx dot(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  cplx s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

std::vector<FockMode> test_modes(std::size_t n) {
  return modes_from_blocks(build_blocks(1.0, 1.0), n);
}

}  // namespace

TEST_CASE("truncated Fock basis") {
  for (std::size_t m : {1u, 2u, 3u, 5u}) {
    for (int n : {0, 1, 3, 6}) {
      const TruncatedFock f(m, n);
      CHECK(f.size() == binomial(m + n, n));
      CHECK(fock_basis_size(m, n) == binomial(m + n, n));
      std::vector<std::uint8_t> prev;
      for (std::size_t s = 0; s < f.size(); ++s) {
        const auto occ = f.occupation(s);
        int total = 0;
        for (auto o : occ) total += o;
        CHECK(total <= n);
        std::vector<std::uint8_t> cur(occ.begin(), occ.end());
        if (s > 0) CHECK(prev < cur);
        prev = cur;
        CHECK(f.rank(occ) == s);
        for (const auto& l : f.lowerings(s)) {
          auto expect = cur;
          CHECK(expect[l.mode] > 0);
          CHECK(l.amplitude == doctest::Approx(std::sqrt(static_cast<double>(expect[l.mode]))));
          --expect[l.mode];
          const auto t = f.occupation(l.target);
          CHECK(std::vector<std::uint8_t>(t.begin(), t.end()) == expect);
        }
      }
    }
  }
}

TEST_CASE("dimension limits") {
  CHECK_THROWS_AS(TruncatedFock(40, 8), Error);
  try {
    const ElectronSpace e = chain_electron(64, 1.0, 1.0);
    BlockHamiltonianSpec spec;
    spec.electron = &e;
    spec.modes = test_modes(10);
    (void)BlockHamiltonian(spec, 6);  // 64 * C(16, 6) = 512512 fits
    (void)BlockHamiltonian(spec, 7);  // 64 * C(17, 7) > 10^6
    FAIL("expected dimension overflow");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::dimension_overflow);
  }
}

TEST_CASE("electron ground state matches a dense oracle") {
  const std::vector<double> V{0.3, -0.2, 0.5, 0.0, -0.4, 0.1};
  const ElectronSpace e = chain_electron(6, 0.8, 0.7, V);
  const double exact = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(chain_matrix(6, 0.8, 0.7, V)).eigenvalues()(0);
  const EigenResult r = electron_ground_state(e);
  CHECK(std::abs(r.value - exact) < 1e-9);
  CHECK(r.residual <= 1e-10);
}

TEST_CASE("decoupled and vacuum-only truncations give the electron energy") {
  const std::vector<double> V{0.3, -0.2, 0.5, 0.0};
  const ElectronSpace e = chain_electron(4, 1.0, 0.9, V);
  const double exact = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(chain_matrix(4, 1.0, 0.9, V)).eigenvalues()(0);
  BlockHamiltonianSpec spec;
  spec.electron = &e;
  spec.modes = test_modes(3);

  spec.alpha = 0.0;
  CHECK(std::abs(ground_energy(spec, 4, 1e-10).value - exact) < 1e-8);

  spec.alpha = 2.0;
  CHECK(std::abs(ground_energy(spec, 0, 1e-10).value - exact) < 1e-8);
}

TEST_CASE("frozen electron, one mode: displaced oscillator") {
  const ElectronSpace e = frozen_electron();
  BlockHamiltonianSpec spec;
  spec.electron = &e;
  spec.alpha = 1.7;
  spec.delta = 0.1;
  spec.modes = {FockMode{{0.3, 0.0, 0.0}, 2.5}};
  const double omega = 1 - spec.delta;
  const double g = std::sqrt(spec.alpha) * 2.5 / (std::sqrt(2.0) * kPi);
  CHECK(spec.coupling(0) == doctest::Approx(g));
  const double exact = displaced_oscillator_energy(spec.alpha, 2.5, spec.delta);
  CHECK(exact == doctest::Approx(-g * g / omega).epsilon(1e-14));

  double prev = 1e300;
  for (int n = 0; n <= 30; n += 3) {
    const double en = ground_energy(spec, n, 1e-12).value;
    CHECK(en <= prev + 1e-12);
    CHECK(en >= exact - 1e-12);
    CHECK(std::abs(en - dense_displaced_oscillator(omega, g, n)) < 1e-9);
    prev = en;
  }
  CHECK(std::abs(ground_energy(spec, 30, 1e-12).value - exact) < 1e-6);

  const std::vector<cplx> psi{1.0};
  CHECK(coherent_bound(psi, spec) == doctest::Approx(exact).epsilon(1e-14));
}

TEST_CASE("coherent bound without coupling is the electron expectation") {
  const ElectronSpace e = chain_electron(5, 1.0, 1.0, {0.1, 0.2, -0.3, 0.0, 0.4});
  std::mt19937_64 rng(51);
  auto psi = random_vector(5, rng);
  const double n = std::sqrt(dot(psi, psi).real());
  for (auto& x : psi) x /= n;
  std::vector<cplx> hpsi(5);
  e.apply(psi.data(), hpsi.data());
  BlockHamiltonianSpec spec;
  spec.electron = &e;
  spec.modes = test_modes(3);
  spec.alpha = 0.0;
  CHECK(coherent_bound(psi, spec) == doctest::Approx(dot(psi, hpsi).real()).epsilon(1e-14));
}

TEST_CASE("implicit Hamiltonian is Hermitian") {
  const ElectronSpace e = chain_electron(4, 1.0, 1.0, {0.1, 0.2, -0.3, 0.0});
  BlockHamiltonianSpec spec;
  spec.electron = &e;
  spec.modes = test_modes(3);
  spec.alpha = 1.3;
  const BlockHamiltonian H(spec, 3);
  std::mt19937_64 rng(52);
  const std::size_t d = H.dimension();
  for (int t = 0; t < 100; ++t) {
    const auto u = random_vector(d, rng), v = random_vector(d, rng);
    std::vector<cplx> hu(d), hv(d);
    H.apply(u.data(), hu.data());
    H.apply(v.data(), hv.data());
    const cplx a = dot(u, hv), b = std::conj(dot(v, hu));
    CHECK(std::abs(a - b) <= 1e-10 * std::abs(a));
  }
}

TEST_CASE("variational monotonicity and coherent dominance") {
  const ElectronSpace e = chain_electron(4, 1.2, 0.8, {0.0, 0.3, -0.1, 0.2});
  const EigenResult el = electron_ground_state(e);
  std::mt19937_64 rng(53);
  auto rnd = random_vector(4, rng);
  const double nr = std::sqrt(dot(rnd, rnd).real());
  for (auto& x : rnd) x /= nr;

  BlockHamiltonianSpec spec;
  spec.electron = &e;
  spec.alpha = 1.5;
  const double tol = 1e-9;
  double prev_modes = 1e300;
  for (std::size_t m = 1; m <= 3; ++m) {
    spec.modes = test_modes(m);
    double prev = 1e300, last = 0.0;
    for (int n : {0, 2, 4, 8, 16, 24}) {
      const double en = ground_energy(spec, n, tol).value;
      CHECK(en <= prev + tol);
      prev = last = en;
    }
    CHECK(last <= prev_modes + tol);
    prev_modes = last;
    CHECK(coherent_bound(el.vector, spec) >= last - tol);
    CHECK(coherent_bound(rnd, spec) >= last - tol);
  }
}

TEST_CASE("coherent model approaches the PT reference as the mode set grows") {
  // The compressed state has width ~ beta (1 - delta) / alpha in Pekar units, so the
  // electron grid must be finer than the one used for the plain Pekar problem.
  const double alpha = 1.0, delta = 0.1, C11 = -0.108512805228, L = 1.5;
  const Grid3 g({24, 24, 24}, 0.8);
  std::vector<double> gaps;
  for (double P : {0.75, 0.5, 0.3, 0.2}) {
    const BlockModeSet blocks = build_blocks(L, P);
    CutoffParams cp;
    cp.Lambda = L;
    cp.P = P;
    cp.alpha = alpha;
    const double beta = cp.beta();
    const CoherentModel model(beta, alpha, delta, modes_from_blocks(blocks, blocks.entries.size()));
    MinimizerConfig cfg;
    cfg.max_iters = 300;
    const double e = minimize(1, model, g, cfg).energy;
    const double ref = coherent_pt_reference(alpha, beta, delta, C11);
    gaps.push_back(std::abs(e - ref) / std::abs(ref));
  }
  MESSAGE("relative gaps: " << gaps[0] << ", " << gaps[1] << ", " << gaps[2] << ", " << gaps[3]);
  for (std::size_t i = 1; i < gaps.size(); ++i) CHECK(gaps[i] <= gaps[i - 1] * 1.05);
  CHECK(gaps.back() < 0.1);
}
