#include "pekar/pt_functional.hpp"

#include <cmath>
#include <numbers>

#include "pekar/field_ops.hpp"
#include "pekar/simd/kernels.hpp"

namespace pekar {

void PTParams::validate(const Grid3& grid) const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error(ErrorCode::invalid_argument, "alpha must be >= 0");
  if (!(U >= 0.0) || !std::isfinite(U)) throw Error(ErrorCode::invalid_argument, "U must be >= 0");
  if (A) require_same_grid(A->grid(), grid, "vector potential grid");
  if (V) require_same_grid(V->grid(), grid, "potential grid");
}

namespace {

// Kinetic energy of one spinor component and, optionally, D_A^dag D_A c.
double kinetic_component(const SpectralContext& ctx, const ComplexField& c, const VectorPotentialField* A,
                         ComplexField* action) {
  const Grid3& g = c.grid();
  const std::size_t n = g.size();
  const double vol = g.cell_volume();
  std::vector<cplx> ch(n);
  ctx.fft().forward(c.data(), ch.data());

  if (A == nullptr) {
    const auto lap = ctx.laplacian_symbol();
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) e += lap[i] * std::norm(ch[i]);
    if (action != nullptr) {
      simd::active().real_times(lap.data(), ch.data(), action->data(), n);
      ctx.fft().inverse(action->data(), action->data());
    }
    return e * vol / static_cast<double>(n);
  }

  // w_a = -i d_a c + A_a c, kinetic = sum_a |w_a|^2, action = sum_a (-i d_a + A_a) w_a.
  const auto& k = simd::active();
  double e = 0.0;
  std::vector<cplx> acc_hat;
  if (action != nullptr) {
    acc_hat.assign(n, cplx(0.0));
    std::fill(action->values().begin(), action->values().end(), cplx(0.0));
  }
  std::vector<cplx> w(n);
  for (int a = 0; a < 3; ++a) {
    const auto ka = ctx.axis_wavenumbers(a);
    for (int i = 0; i < g.dim(0); ++i)
      for (int j = 0; j < g.dim(1); ++j)
        for (int l = 0; l < g.dim(2); ++l) {
          const std::size_t idx = g.flat(i, j, l);
          const double kk = a == 0 ? ka[i] : (a == 1 ? ka[j] : ka[l]);
          w[idx] = kk * ch[idx];
        }
    ctx.fft().inverse(w.data(), w.data());
    k.real_times_acc((*A)[a].data(), c.data(), w.data(), n);
    e += k.dot(w.data(), w.data(), n).real();
    if (action != nullptr) {
      k.real_times_acc((*A)[a].data(), w.data(), action->data(), n);
      ctx.fft().forward(w.data(), w.data());
      for (int i = 0; i < g.dim(0); ++i)
        for (int j = 0; j < g.dim(1); ++j)
          for (int l = 0; l < g.dim(2); ++l) {
            const std::size_t idx = g.flat(i, j, l);
            const double kk = a == 0 ? ka[i] : (a == 1 ? ka[j] : ka[l]);
            acc_hat[idx] += kk * w[idx];
          }
    }
  }
  if (action != nullptr) {
    ctx.fft().inverse(acc_hat.data(), acc_hat.data());
    for (std::size_t i = 0; i < n; ++i) (*action)[i] += acc_hat[i];
  }
  return e * vol;
}

// p_ij(x) = sum_s conj(phi_i,s(x)) phi_j,s(x)
ComplexField pair_density(const SpinOrbital& a, const SpinOrbital& b) {
  ComplexField out(a.grid());
  ComplexField tmp(a.grid());
  const auto& k = simd::active();
  k.conj_times(a.up.data(), b.up.data(), out.data(), out.size());
  k.conj_times(a.down.data(), b.down.data(), tmp.data(), tmp.size());
  out += tmp;
  return out;
}

EnergyAndGradient evaluate(std::span<const SpinOrbital> orbitals, const PTParams& p, bool want_fock) {
  if (orbitals.empty()) throw Error(ErrorCode::invalid_argument, "empty orbital list");
  const Grid3& g = orbitals.front().grid();
  for (const auto& o : orbitals) require_same_grid(o.grid(), g, "orbital grid");
  p.validate(g);
  const auto ctx = SpectralContext::get(g);
  const std::size_t n_orb = orbitals.size();
  const std::size_t n = g.size();
  const double vol = g.cell_volume();
  const auto& k = simd::active();

  EnergyAndGradient out;
  if (want_fock) {
    out.fock.reserve(n_orb);
    for (std::size_t i = 0; i < n_orb; ++i) out.fock.emplace_back(g);
  }
  EnergyBreakdown& e = out.energy;

  for (std::size_t i = 0; i < n_orb; ++i)
    for (int s = 0; s < 2; ++s)
      e.kinetic += kinetic_component(*ctx, orbitals[i].component(s), p.A ? &*p.A : nullptr,
                                     want_fock ? &out.fock[i].component(s) : nullptr);

  const RealField rho = orbital_density(orbitals);
  if (p.V) e.external = k.dot_real(p.V->data(), rho.data(), n) * vol;

  const bool need_hartree = p.alpha != 0.0 || p.U != 0.0;
  RealField hartree(g);
  if (need_hartree) hartree = real_part(coulomb_convolve(to_complex(rho)));
  const double d_rho = need_hartree ? k.dot_real(rho.data(), hartree.data(), n) * vol : 0.0;
  e.self_interaction = -p.alpha * d_rho;

  // Exchange convolutions K * p_ij for i <= j; K * p_ji = conj(K * p_ij).
  std::vector<ComplexField> xconv;
  if (p.U != 0.0) {
    double sum_diag = 0.0, sum_offdiag = 0.0;
    xconv.reserve(n_orb * (n_orb + 1) / 2);
    for (std::size_t i = 0; i < n_orb; ++i)
      for (std::size_t j = i; j < n_orb; ++j) {
        ComplexField pij = pair_density(orbitals[i], orbitals[j]);
        ComplexField cij = coulomb_convolve(pij);
        const double x = k.dot(pij.data(), cij.data(), n).real() * vol;
        if (i == j) sum_diag += x;
        else sum_offdiag += x;
        if (want_fock) xconv.push_back(std::move(cij));
      }
    // sum_{i<j} direct(i,j) = (D(rho) - sum_i D(rho_i)) / 2, and D(rho_i) = exchange(i,i).
    e.coulomb_direct = p.U * 0.5 * (d_rho - sum_diag);
    e.coulomb_exchange = p.U * sum_offdiag;
  }

  e.total = e.kinetic + e.external + e.coulomb_direct - e.coulomb_exchange + e.self_interaction;

  if (!want_fock) return out;

  RealField w(g);
  if (p.V) w = *p.V;
  if (need_hartree) {
    const double c = p.U - 2.0 * p.alpha;
    for (std::size_t i = 0; i < n; ++i) w[i] += c * hartree[i];
  }
  const bool have_w = p.V.has_value() || need_hartree;
  auto conv_index = [n_orb](std::size_t i, std::size_t j) {
    // position of (i, j), i <= j, in row-major upper-triangular order
    return i * n_orb - (i * (i - 1)) / 2 + (j - i);
  };
  for (std::size_t i = 0; i < n_orb; ++i) {
    for (int s = 0; s < 2; ++s) {
      ComplexField& f = out.fock[i].component(s);
      if (have_w) k.real_times_acc(w.data(), orbitals[i].component(s).data(), f.data(), n);
      if (p.U == 0.0) continue;
      for (std::size_t j = 0; j < n_orb; ++j) {
        // K phi_i = sum_j (K * p_ji) phi_j
        const bool upper = j <= i;
        const ComplexField& c = xconv[upper ? conv_index(j, i) : conv_index(i, j)];
        const ComplexField& phj = orbitals[j].component(s);
        for (std::size_t x = 0; x < n; ++x) {
          const cplx cv = upper ? c[x] : std::conj(c[x]);
          f[x] -= p.U * cv * phj[x];
        }
      }
    }
  }
  return out;
}

}  // namespace

ComplexField kinetic_action(const ComplexField& c, const VectorPotentialField* A) {
  if (A) require_same_grid(A->grid(), c.grid(), "vector potential grid");
  ComplexField out(c.grid());
  kinetic_component(*SpectralContext::get(c.grid()), c, A, &out);
  return out;
}

double kinetic_energy(const ComplexField& c, const VectorPotentialField* A) {
  if (A) require_same_grid(A->grid(), c.grid(), "vector potential grid");
  return kinetic_component(*SpectralContext::get(c.grid()), c, A, nullptr);
}

EnergyBreakdown evaluate_energy(std::span<const SpinOrbital> orbitals, const PTParams& p) {
  return evaluate(orbitals, p, false).energy;
}

EnergyAndGradient evaluate_energy_and_fock(std::span<const SpinOrbital> orbitals, const PTParams& p) {
  return evaluate(orbitals, p, true);
}

EnergyBreakdown pt_energy(const SlaterState& state, const PTParams& p) {
  return evaluate_energy(state.orbitals(), p);
}

std::vector<SpinOrbital> project_tangent(std::span<const SpinOrbital> orbitals, std::vector<SpinOrbital> g) {
  const std::size_t n = orbitals.size();
  std::vector<std::vector<cplx>> overlaps(n, std::vector<cplx>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) overlaps[i][j] = inner(orbitals[j], g[i]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) axpy(-overlaps[i][j], orbitals[j], g[i]);
  return g;
}

std::vector<SpinOrbital> pt_gradient(const SlaterState& state, const PTParams& p) {
  auto eg = evaluate_energy_and_fock(state.orbitals(), p);
  return project_tangent(state.orbitals(), std::move(eg.fock));
}

SlaterState rescale_state(const SlaterState& state, double lambda) {
  const Grid3 g = state.grid().dilated(lambda);
  const double s = std::pow(lambda, 1.5);
  std::vector<SpinOrbital> out;
  out.reserve(state.size());
  for (const auto& o : state.orbitals()) {
    SpinOrbital r(o.up.with_grid(g), o.down.with_grid(g));
    r.up *= s;
    r.down *= s;
    out.push_back(std::move(r));
  }
  return SlaterState(std::move(out));
}

PTParams rescale_params(const PTParams& p, const Grid3& grid, double lambda) {
  p.validate(grid);
  const Grid3 g = grid.dilated(lambda);
  PTParams out;
  out.alpha = lambda * p.alpha;
  out.U = lambda * p.U;
  if (p.A) {
    VectorPotentialField a(g);
    for (int ax = 0; ax < 3; ++ax) {
      a[ax] = (*p.A)[ax].with_grid(g);
      a[ax] *= lambda;
    }
    out.A = std::move(a);
  }
  if (p.V) {
    RealField v = p.V->with_grid(g);
    v *= lambda * lambda;
    out.V = std::move(v);
  }
  return out;
}

VectorPotentialField linear_vector_potential(const Grid3& grid, const Vec3& B) {
  VectorPotentialField a(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3 x = grid.position(i);
    a[0][i] = 0.5 * (B[1] * x[2] - B[2] * x[1]);
    a[1][i] = 0.5 * (B[2] * x[0] - B[0] * x[2]);
    a[2][i] = 0.5 * (B[0] * x[1] - B[1] * x[0]);
  }
  return a;
}

RealField periodic_potential(const Grid3& grid, double amplitude, const Vec3& period) {
  return sample_real(grid, [&](const Vec3& x) {
    double v = 0.0;
    for (int a = 0; a < 3; ++a)
      if (period[a] > 0.0) v += std::cos(2.0 * std::numbers::pi * x[a] / period[a]);
    return amplitude * v;
  });
}

}  // namespace pekar
