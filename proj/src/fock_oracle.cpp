#include "pekar/fock_oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "pekar/field_ops.hpp"
#include "pekar/pt_functional.hpp"
#include "pekar/simd/kernels.hpp"

namespace pekar {

namespace {
constexpr double kPi = std::numbers::pi;
}

ElectronSpace::ElectronSpace(std::vector<Vec3> sites, Apply h) : sites_(std::move(sites)), h_(std::move(h)) {
  if (sites_.empty()) throw Error(ErrorCode::invalid_argument, "electron space needs at least one site");
  if (!h_) throw Error(ErrorCode::invalid_argument, "electron space needs a one-body operator");
}

ElectronSpace grid_electron(const Grid3& grid, double beta, std::optional<RealField> V,
                            std::optional<VectorPotentialField> A) {
  if (V) require_same_grid(V->grid(), grid, "electron potential");
  if (A) require_same_grid(A->grid(), grid, "electron vector potential");
  std::vector<Vec3> sites(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) sites[i] = grid.position(i);
  auto apply = [grid, beta, V = std::move(V), A = std::move(A)](const cplx* in, cplx* out) {
    ComplexField c(grid, std::vector<cplx>(in, in + grid.size()));
    const ComplexField k = kinetic_action(c, A ? &*A : nullptr);
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = beta * k[i] + (V ? (*V)[i] * in[i] : cplx(0.0));
  };
  return ElectronSpace(std::move(sites), std::move(apply));
}

ElectronSpace chain_electron(int sites, double spacing, double beta, std::vector<double> V) {
  if (sites < 1) throw Error(ErrorCode::invalid_argument, "chain needs at least one site");
  if (!(spacing > 0.0)) throw Error(ErrorCode::invalid_argument, "chain spacing must be > 0");
  if (!V.empty() && V.size() != static_cast<std::size_t>(sites))
    throw Error(ErrorCode::invalid_argument, "chain potential needs one value per site");
  std::vector<Vec3> pos(sites);
  for (int i = 0; i < sites; ++i) pos[i] = {(i - sites / 2) * spacing, 0.0, 0.0};
  const double t = beta / (spacing * spacing);
  auto apply = [sites, t, V = std::move(V)](const cplx* in, cplx* out) {
    for (int i = 0; i < sites; ++i) {
      cplx v = V.empty() ? cplx(0.0) : V[i] * in[i];
      if (sites > 1) {
        const int l = (i + sites - 1) % sites, r = (i + 1) % sites;
        v += t * (2.0 * in[i] - in[l] - in[r]);
      }
      out[i] = v;
    }
  };
  return ElectronSpace(std::move(pos), std::move(apply));
}

ElectronSpace frozen_electron(double e0) {
  return ElectronSpace({Vec3{0.0, 0.0, 0.0}}, [e0](const cplx* in, cplx* out) { out[0] = e0 * in[0]; });
}

std::vector<FockMode> modes_from_blocks(const BlockModeSet& blocks, std::size_t max_modes) {
  std::vector<std::size_t> order(blocks.entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return blocks.entries[a].M > blocks.entries[b].M; });
  std::vector<FockMode> out;
  for (std::size_t i = 0; i < std::min(max_modes, order.size()); ++i)
    out.push_back({blocks.entries[order[i]].k, blocks.entries[order[i]].M});
  return out;
}

std::size_t fock_basis_size(std::size_t modes, int n_max) {
  if (n_max < 0) throw Error(ErrorCode::invalid_argument, "n_max must be >= 0");
  // C(modes + n_max, n_max) built incrementally; every partial product is itself a binomial.
  unsigned __int128 c = 1;
  for (int b = 1; b <= n_max; ++b) {
    c = c * (modes + static_cast<std::size_t>(b)) / static_cast<unsigned>(b);
    if (c > (static_cast<unsigned __int128>(1) << 63))
      throw Error(ErrorCode::dimension_overflow, "Fock basis size overflows");
  }
  return static_cast<std::size_t>(c);
}

TruncatedFock::TruncatedFock(std::size_t modes, int n_max) : modes_(modes), n_max_(n_max) {
  if (modes == 0) throw Error(ErrorCode::invalid_argument, "need at least one mode");
  if (n_max < 0 || n_max > 255) throw Error(ErrorCode::invalid_argument, "n_max must lie in [0, 255]");
  size_ = fock_basis_size(modes, n_max);
  if (size_ > kMaxOracleDimension)
    throw Error(ErrorCode::dimension_overflow, "Fock basis of size " + std::to_string(size_) + " exceeds 10^6");
  binom_.assign(modes + 1, std::vector<std::size_t>(n_max + 1));
  for (std::size_t r = 0; r <= modes; ++r)
    for (int b = 0; b <= n_max; ++b)
      binom_[r][b] = (r == 0 || b == 0) ? 1 : binom_[r - 1][b] + binom_[r][b - 1];

  occ_.assign(size_ * modes, 0);
  std::vector<std::uint8_t> cur(modes, 0);
  int sum = 0;
  for (std::size_t idx = 0;; ++idx) {
    std::copy(cur.begin(), cur.end(), occ_.begin() + static_cast<std::ptrdiff_t>(idx * modes));
    if (idx + 1 == size_) break;
    // Lexicographic successor among vectors with sum <= n_max.
    if (sum < n_max) {
      ++cur[modes - 1];
      ++sum;
      continue;
    }
    std::size_t j = modes - 1;
    while (cur[j] == 0) --j;
    sum -= cur[j];
    cur[j] = 0;
    ++cur[j - 1];
    ++sum;
  }

  lower_offset_.assign(size_ + 1, 0);
  std::vector<std::uint8_t> tmp(modes);
  for (std::size_t s = 0; s < size_; ++s) {
    const auto o = occupation(s);
    for (std::size_t m = 0; m < modes; ++m)
      if (o[m] > 0) {
        std::copy(o.begin(), o.end(), tmp.begin());
        --tmp[m];
        lower_.push_back({static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(rank(tmp)),
                          std::sqrt(static_cast<double>(o[m]))});
      }
    lower_offset_[s + 1] = lower_.size();
  }
}

std::size_t TruncatedFock::count(std::size_t remaining_modes, int budget) const noexcept {
  return binom_[remaining_modes][budget];
}

std::size_t TruncatedFock::rank(std::span<const std::uint8_t> occupation) const {
  if (occupation.size() != modes_) throw Error(ErrorCode::invalid_argument, "occupation length mismatch");
  std::size_t r = 0;
  int budget = n_max_;
  for (std::size_t i = 0; i < modes_; ++i) {
    const int n = occupation[i];
    if (n > budget) throw Error(ErrorCode::invalid_argument, "occupation exceeds n_max");
    // Vectors that agree so far and have a smaller i-th entry come first.
    for (int v = 0; v < n; ++v) r += count(modes_ - i - 1, budget - v);
    budget -= n;
  }
  return r;
}

void BlockHamiltonianSpec::validate() const {
  if (electron == nullptr) throw Error(ErrorCode::invalid_argument, "missing electron space");
  if (!(alpha >= 0.0)) throw Error(ErrorCode::invalid_argument, "alpha must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::invalid_argument, "delta must lie in (0, 1)");
  if (modes.empty()) throw Error(ErrorCode::invalid_argument, "need at least one phonon mode");
}

double BlockHamiltonianSpec::coupling(std::size_t m) const {
  return std::sqrt(alpha) * modes[m].M / (std::sqrt(2.0) * kPi);
}

BlockHamiltonian::BlockHamiltonian(const BlockHamiltonianSpec& spec, int n_max)
    : electron_(spec.electron), fock_((spec.validate(), spec.modes.size()), n_max), omega_(1.0 - spec.delta) {
  if (electron_->size() > kMaxOracleDimension / fock_.size())
    throw Error(ErrorCode::dimension_overflow, "electron sites x Fock basis exceeds 10^6");
  const std::size_t ne = electron_->size();
  g_.resize(spec.modes.size());
  phase_.assign(spec.modes.size(), std::vector<cplx>(ne));
  for (std::size_t m = 0; m < spec.modes.size(); ++m) {
    g_[m] = spec.coupling(m);
    const Vec3& k = spec.modes[m].k;
    for (std::size_t e = 0; e < ne; ++e) {
      const Vec3& x = electron_->site(e);
      phase_[m][e] = std::exp(cplx(0.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]));
    }
  }
}

void BlockHamiltonian::apply(const cplx* in, cplx* out) const {
  const std::size_t ne = electron_->size();
  const std::size_t nf = fock_.size();
  for (std::size_t s = 0; s < nf; ++s) {
    const cplx* src = in + s * ne;
    cplx* dst = out + s * ne;
    electron_->apply(src, dst);
    int total = 0;
    for (auto v : fock_.occupation(s)) total += v;
    const double diag = omega_ * total;
    for (std::size_t e = 0; e < ne; ++e) dst[e] += diag * src[e];
  }
  for (std::size_t s = 0; s < nf; ++s)
    for (const auto& l : fock_.lowerings(s)) {
      const double g = g_[l.mode] * l.amplitude;
      const std::vector<cplx>& ph = phase_[l.mode];
      const cplx* from_s = in + s * ne;
      const cplx* from_t = in + static_cast<std::size_t>(l.target) * ne;
      cplx* to_t = out + static_cast<std::size_t>(l.target) * ne;
      cplx* to_s = out + s * ne;
      for (std::size_t e = 0; e < ne; ++e) {
        to_t[e] += g * ph[e] * from_s[e];             // e^{ikx} a
        to_s[e] += g * std::conj(ph[e]) * from_t[e];  // e^{-ikx} a^dag
      }
    }
}

namespace {

double vec_norm(const std::vector<cplx>& v) {
  return std::sqrt(simd::active().dot(v.data(), v.data(), v.size()).real());
}

}  // namespace

EigenResult lowest_eigenpair(std::size_t dim, const std::function<void(const cplx*, cplx*)>& apply, double tol,
                             int max_restarts, std::uint64_t seed) {
  if (dim == 0) throw Error(ErrorCode::invalid_argument, "empty operator");
  if (!(tol > 0.0)) throw Error(ErrorCode::invalid_argument, "tol must be > 0");
  const auto& k = simd::active();
  // Krylov depth limited by a ~400 MB basis budget.
  const std::size_t budget = std::max<std::size_t>(8, 400'000'000 / (16 * dim));
  const std::size_t depth = std::min<std::size_t>({dim, 80, budget});

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<cplx> x(dim);
  for (auto& v : x) {
    const double re = nd(rng);
    v = {re, nd(rng)};
  }
  {
    const double n = vec_norm(x);
    for (auto& v : x) v /= n;
  }

  std::vector<std::vector<cplx>> basis;
  std::vector<cplx> w(dim), hx(dim);
  EigenResult res;
  res.dimension = dim;
  for (int restart = 0; restart <= max_restarts; ++restart) {
    basis.clear();
    basis.push_back(x);
    std::vector<double> a, b;
    for (std::size_t j = 0; j < depth; ++j) {
      apply(basis[j].data(), w.data());
      const double aj = k.dot(basis[j].data(), w.data(), dim).real();
      a.push_back(aj);
      // Full reorthogonalization, applied twice.
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& v : basis) k.axpy(-k.dot(v.data(), w.data(), dim), v.data(), w.data(), dim);
      const double bj = vec_norm(w);
      if (j + 1 == depth || bj <= 1e-13 * std::max(1.0, std::abs(aj))) break;
      b.push_back(bj);
      basis.emplace_back(dim);
      for (std::size_t i = 0; i < dim; ++i) basis.back()[i] = w[i] / bj;
    }
    const auto m = static_cast<Eigen::Index>(a.size());
    Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(a.data(), m);
    Eigen::VectorXd sub = m > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(b.data(), m - 1)) : Eigen::VectorXd();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const Eigen::VectorXd s = tri.eigenvectors().col(0);

    std::fill(x.begin(), x.end(), cplx(0.0));
    for (Eigen::Index i = 0; i < m; ++i) k.axpy(cplx(s(i)), basis[i].data(), x.data(), dim);
    const double n = vec_norm(x);
    for (auto& v : x) v /= n;
    apply(x.data(), hx.data());
    const double rq = k.dot(x.data(), hx.data(), dim).real();
    k.axpy(cplx(-rq), x.data(), hx.data(), dim);
    res.value = rq;
    res.residual = vec_norm(hx);
    res.restarts = restart;
    if (res.residual <= tol) {
      res.vector = x;
      return res;
    }
  }
  throw Error(ErrorCode::non_convergence, "Lanczos residual " + std::to_string(res.residual) + " after " +
                                              std::to_string(max_restarts) + " restarts");
}

EigenResult electron_ground_state(const ElectronSpace& e, double tol) {
  return lowest_eigenpair(e.size(), [&](const cplx* in, cplx* out) { e.apply(in, out); }, tol);
}

EigenResult ground_energy(const BlockHamiltonianSpec& spec, int n_max, double tol) {
  const BlockHamiltonian h(spec, n_max);
  return lowest_eigenpair(h.dimension(), [&](const cplx* in, cplx* out) { h.apply(in, out); }, tol);
}

double coherent_bound(std::span<const cplx> psi, const BlockHamiltonianSpec& spec) {
  spec.validate();
  const ElectronSpace& e = *spec.electron;
  if (psi.size() != e.size()) throw Error(ErrorCode::invalid_argument, "psi length does not match the electron space");
  double nrm = 0.0;
  for (const auto& v : psi) nrm += std::norm(v);
  if (std::abs(nrm - 1.0) > 1e-8) throw Error(ErrorCode::invalid_argument, "psi must be normalized");
  std::vector<cplx> hpsi(psi.size());
  e.apply(psi.data(), hpsi.data());
  double energy = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) energy += (std::conj(psi[i]) * hpsi[i]).real();
  const double lambda = spec.alpha / (2.0 * kPi * kPi * (1.0 - spec.delta));
  for (const auto& mode : spec.modes) {
    cplx c = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
      const Vec3& x = e.site(i);
      c += std::norm(psi[i]) * std::exp(cplx(0.0, -(mode.k[0] * x[0] + mode.k[1] * x[1] + mode.k[2] * x[2])));
    }
    energy -= lambda * mode.M * mode.M * std::norm(c);
  }
  return energy;
}

double displaced_oscillator_energy(double alpha, double M, double delta) {
  return -alpha * M * M / (2.0 * kPi * kPi * (1.0 - delta));
}

CoherentModel::CoherentModel(double beta, double alpha, double delta, std::vector<FockMode> modes,
                             std::optional<RealField> V, std::optional<VectorPotentialField> A)
    : beta_(beta), alpha_(alpha), delta_(delta), modes_(std::move(modes)), V_(std::move(V)), A_(std::move(A)) {
  if (!(beta > 0.0)) throw Error(ErrorCode::invalid_argument, "beta must be > 0");
  if (!(alpha >= 0.0)) throw Error(ErrorCode::invalid_argument, "alpha must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::invalid_argument, "delta must lie in (0, 1)");
}

double CoherentModel::energy(std::span<const SpinOrbital> orbitals) const { return evaluate(orbitals, nullptr); }

double CoherentModel::energy_and_fock(std::span<const SpinOrbital> orbitals, std::vector<SpinOrbital>& fock) const {
  return evaluate(orbitals, &fock);
}

double CoherentModel::evaluate(std::span<const SpinOrbital> orbitals, std::vector<SpinOrbital>* fock) const {
  if (orbitals.size() != 1) throw Error(ErrorCode::invalid_argument, "the coherent model is single-electron");
  const SpinOrbital& phi = orbitals.front();
  const Grid3& g = phi.grid();
  if (V_) require_same_grid(V_->grid(), g, "coherent model potential");
  if (A_) require_same_grid(A_->grid(), g, "coherent model vector potential");
  const VectorPotentialField* A = A_ ? &*A_ : nullptr;
  const std::size_t n = g.size();
  const double vol = g.cell_volume();
  const RealField rho = orbital_density(orbitals);

  double energy = 0.0;
  if (fock) {
    fock->clear();
    fock->emplace_back(g);
  }
  for (int s = 0; s < 2; ++s) {
    if (fock) {
      const ComplexField act = kinetic_action(phi.component(s), A);
      ComplexField& f = (*fock)[0].component(s);
      for (std::size_t i = 0; i < n; ++i) f[i] = beta_ * act[i];
    }
    energy += beta_ * kinetic_energy(phi.component(s), A);
  }
  RealField w(g);
  if (V_) {
    energy += inner(*V_, rho);
    w = *V_;
  }

  // Separable phases e^{-i k x} = prod_a e^{-i k_a x_a}.
  const double lambda = alpha_ / (2.0 * kPi * kPi * (1.0 - delta_));
  std::array<std::vector<cplx>, 3> ph;
  for (const auto& mode : modes_) {
    for (int a = 0; a < 3; ++a) {
      ph[a].resize(g.dim(a));
      for (int i = 0; i < g.dim(a); ++i) ph[a][i] = std::exp(cplx(0.0, -mode.k[a] * g.coord(a, i)));
    }
    cplx c = 0.0;
    for (int i = 0; i < g.dim(0); ++i)
      for (int j = 0; j < g.dim(1); ++j) {
        const cplx pij = ph[0][i] * ph[1][j];
        const std::size_t base = g.flat(i, j, 0);
        cplx row = 0.0;
        for (int l = 0; l < g.dim(2); ++l) row += rho[base + l] * ph[2][l];
        c += pij * row;
      }
    c *= vol;
    const double w2 = mode.M * mode.M;
    energy -= lambda * w2 * std::norm(c);
    if (fock) {
      // d|c|^2 contributes the real potential 2 Re(conj(c) e^{-ikx}).
      for (int i = 0; i < g.dim(0); ++i)
        for (int j = 0; j < g.dim(1); ++j) {
          const cplx pij = std::conj(c) * ph[0][i] * ph[1][j];
          const std::size_t base = g.flat(i, j, 0);
          for (int l = 0; l < g.dim(2); ++l) w[base + l] -= lambda * w2 * 2.0 * (pij * ph[2][l]).real();
        }
    }
  }
  if (fock)
    for (int s = 0; s < 2; ++s)
      simd::active().real_times_acc(w.data(), phi.component(s).data(), (*fock)[0].component(s).data(), n);
  return energy;
}

double coherent_pt_reference(double alpha, double beta, double delta, double C11) {
  const double a = alpha / ((1.0 - delta) * beta);
  return beta * a * a * C11;
}

}  // namespace pekar
