#include "pekar/minimizer.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <thread>

#include "pekar/field_ops.hpp"

namespace pekar {

double PTModel::energy(std::span<const SpinOrbital> orbitals) const {
  return evaluate_energy(orbitals, params_).total;
}

double PTModel::energy_and_fock(std::span<const SpinOrbital> orbitals, std::vector<SpinOrbital>& fock) const {
  auto eg = evaluate_energy_and_fock(orbitals, params_);
  fock = std::move(eg.fock);
  return eg.energy.total;
}

void MinimizerConfig::validate() const {
  if (max_iters < 0) throw Error(ErrorCode::invalid_argument, "max_iters must be >= 0");
  if (!(grad_tol > 0.0)) throw Error(ErrorCode::invalid_argument, "grad_tol must be > 0");
  if (restarts < 1) throw Error(ErrorCode::invalid_argument, "restarts must be >= 1");
  if (!(initial_step > 0.0) || !(max_step >= initial_step))
    throw Error(ErrorCode::invalid_argument, "need 0 < initial_step <= max_step");
  if (!(shrink > 0.0 && shrink < 1.0)) throw Error(ErrorCode::invalid_argument, "shrink must lie in (0, 1)");
  if (!(grow >= 1.0)) throw Error(ErrorCode::invalid_argument, "grow must be >= 1");
  if (!(armijo >= 0.0 && armijo < 0.5)) throw Error(ErrorCode::invalid_argument, "armijo must lie in [0, 0.5)");
  if (precondition && !(precondition_shift > 0.0))
    throw Error(ErrorCode::invalid_argument, "precondition_shift must be > 0");
  if (threads < 1) throw Error(ErrorCode::invalid_argument, "threads must be >= 1");
}

namespace {

using Orbitals = std::vector<SpinOrbital>;

cplx complex_normal(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double re = n(rng);
  return {re, n(rng)};
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

ComplexField gaussian_blob(const Grid3& g, const Vec3& c, double sigma) {
  return sample_complex(g, [&](const Vec3& x) {
    double r2 = 0.0;
    for (int a = 0; a < 3; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
    return cplx(std::exp(-r2 / (2.0 * sigma * sigma)));
  });
}

SpinOrbital random_orbital(const Grid3& g, std::mt19937_64& rng) {
  const double L = g.min_box_length();
  Vec3 c;
  for (auto& v : c) v = uniform(rng, -L / 10.0, L / 10.0);
  const double sigma = uniform(rng, L / 16.0, L / 8.0);
  const ComplexField blob = gaussian_blob(g, c, sigma);
  SpinOrbital o(blob, blob);
  o.up *= complex_normal(rng);
  o.down *= complex_normal(rng);
  return o;
}

// Low-order Cartesian harmonics times a centered Gaussian.
double stacked_shape(int m, const Vec3& x) {
  const double X = x[0], Y = x[1], Z = x[2];
  switch (m) {
    case 0: return 1.0;
    case 1: return X;
    case 2: return Y;
    case 3: return Z;
    case 4: return X * Y;
    case 5: return Y * Z;
    case 6: return X * Z;
    case 7: return X * X - Y * Y;
    case 8: return 2.0 * Z * Z - X * X - Y * Y;
    case 9: return X * Y * Z;
    default: return 0.0;
  }
}
constexpr int kStackedShapes = 10;

}  // namespace

SlaterState initial_state(int n, const Grid3& grid, std::uint64_t seed, InitStrategy strategy,
                          const SlaterState* previous, double perturbation) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "N must be >= 1");
  std::mt19937_64 rng(seed);
  Orbitals orbs;
  orbs.reserve(n);
  switch (strategy) {
    case InitStrategy::random_gaussians:
      for (int i = 0; i < n; ++i) orbs.push_back(random_orbital(grid, rng));
      break;
    case InitStrategy::stacked_center: {
      if (n > 2 * kStackedShapes)
        throw Error(ErrorCode::invalid_argument, "stacked-center supports N <= " + std::to_string(2 * kStackedShapes));
      const double sigma = grid.min_box_length() / 10.0;
      for (int i = 0; i < n; ++i) {
        const int m = i / 2;
        const ComplexField f = sample_complex(grid, [&](const Vec3& x) {
          const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
          return cplx(stacked_shape(m, x) * std::exp(-r2 / (2.0 * sigma * sigma)));
        });
        SpinOrbital o(f, f);
        const cplx minor = 0.05 * complex_normal(rng);
        o.component(1 - i % 2) *= minor;
        orbs.push_back(std::move(o));
      }
      break;
    }
    case InitStrategy::perturbed_previous: {
      if (previous == nullptr) throw Error(ErrorCode::invalid_argument, "perturbed-previous needs a previous state");
      require_same_grid(previous->grid(), grid, "previous state");
      const double L = grid.min_box_length();
      for (int i = 0; i < n; ++i) {
        if (static_cast<std::size_t>(i) < previous->size()) {
          SpinOrbital o = (*previous)[i];
          for (int s = 0; s < 2; ++s) {
            Vec3 c;
            for (auto& v : c) v = uniform(rng, -L / 10.0, L / 10.0);
            const ComplexField blob = gaussian_blob(grid, c, L / 12.0);
            const double scale = std::sqrt(std::max(norm2(blob), 1e-300));
            const cplx coeff = perturbation * complex_normal(rng) / scale;
            for (std::size_t x = 0; x < grid.size(); ++x) o.component(s)[x] += coeff * blob[x];
          }
          orbs.push_back(std::move(o));
        } else {
          orbs.push_back(random_orbital(grid, rng));
        }
      }
      break;
    }
  }
  return orthonormalize(std::move(orbs));
}

double outer_shell_mass(const RealField& rho) {
  const Grid3& g = rho.grid();
  double total = 0.0, outer = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 x = g.position(i);
    double r = 0.0;
    for (int a = 0; a < 3; ++a) r = std::max(r, std::abs(x[a]) / (0.5 * g.box_length(a)));
    total += std::abs(rho[i]);
    if (r > 0.9) outer += std::abs(rho[i]);
  }
  return total > 0.0 ? outer / total : 0.0;
}

namespace {

void precondition(const SpectralContext& ctx, double shift, Orbitals& dirs) {
  const auto lap = ctx.laplacian_symbol();
  const std::size_t n = lap.size();
  std::vector<cplx> buf(n);
  for (auto& d : dirs)
    for (int s = 0; s < 2; ++s) {
      ComplexField& c = d.component(s);
      ctx.fft().forward(c.data(), buf.data());
      for (std::size_t i = 0; i < n; ++i) buf[i] /= shift + lap[i];
      ctx.fft().inverse(buf.data(), c.data());
    }
}

double total_norm2(const Orbitals& v) {
  double s = 0.0;
  for (const auto& o : v) s += norm2(o);
  return s;
}

double real_pairing(const Orbitals& a, const Orbitals& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += inner(a[i], b[i]).real();
  return s;
}

std::optional<SlaterState> retract(std::span<const SpinOrbital> base, const Orbitals& dir, double t) {
  Orbitals trial(base.begin(), base.end());
  for (std::size_t i = 0; i < trial.size(); ++i) axpy(t, dir[i], trial[i]);
  try {
    return orthonormalize(std::move(trial));
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

MinimizeResult descend(const EnergyModel& model, SlaterState start, const MinimizerConfig& cfg) {
  cfg.validate();
  const auto ctx = SpectralContext::get(start.grid());
  SlaterState state = std::move(start);
  Orbitals fock;
  double energy = model.energy_and_fock(state.orbitals(), fock);
  Orbitals grad = project_tangent(state.orbitals(), std::move(fock));
  double gnorm = std::sqrt(total_norm2(grad));

  MinimizeResult res(state);
  const bool backtracking = cfg.step_rule == StepRule::backtracking;
  const double c1 = backtracking ? cfg.armijo : 0.0;
  double t = cfg.initial_step;
  int iter = 0;
  if (cfg.record_trace) res.trace.push_back({0, energy, gnorm, 0.0});

  while (gnorm > cfg.grad_tol && iter < cfg.max_iters) {
    Orbitals dir = grad;
    if (cfg.precondition) {
      precondition(*ctx, cfg.precondition_shift, dir);
      dir = project_tangent(state.orbitals(), std::move(dir));
    }
    for (auto& d : dir) {
      d.up *= -1.0;
      d.down *= -1.0;
    }
    // dE/dt at t = 0 along the retraction curve.
    const double slope = 2.0 * real_pairing(grad, dir);
    if (!(slope < 0.0)) break;

    if (!backtracking) t = cfg.initial_step;
    std::optional<SlaterState> accepted;
    bool first_try = true;
    while (t > 1e-14) {
      auto trial = retract(state.orbitals(), dir, t);
      if (trial) {
        const double e = model.energy(trial->orbitals());
        if (std::isfinite(e) && e <= energy + c1 * t * slope) {
          accepted = std::move(trial);
          break;
        }
      }
      t *= cfg.shrink;
      first_try = false;
    }
    if (!accepted) break;  // no decrease available at this resolution

    ++iter;
    const double step = t;
    state = std::move(*accepted);
    energy = model.energy_and_fock(state.orbitals(), fock);
    grad = project_tangent(state.orbitals(), std::move(fock));
    gnorm = std::sqrt(total_norm2(grad));
    if (cfg.record_trace) res.trace.push_back({iter, energy, gnorm, step});
    if (backtracking && first_try) t = std::min(t * cfg.grow, cfg.max_step);
  }

  res.energy = energy;
  res.state = std::move(state);
  res.iterations = iter;
  res.final_grad_norm = gnorm;
  res.converged = gnorm <= cfg.grad_tol;
  res.shell_mass = outer_shell_mass(density(res.state));
  if (!res.converged)
    res.warnings.push_back("not converged after " + std::to_string(iter) + " iterations (grad norm " +
                           std::to_string(gnorm) + ")");
  if (res.shell_mass >= cfg.leak_tolerance)
    res.warnings.push_back("box too small: outer-shell mass fraction " + std::to_string(res.shell_mass));
  return res;
}

MinimizeResult minimize(int n, const EnergyModel& model, const Grid3& grid, const MinimizerConfig& cfg) {
  cfg.validate();
  if (n < 1) throw Error(ErrorCode::invalid_argument, "N must be >= 1");
  std::vector<std::optional<MinimizeResult>> runs(cfg.restarts);
  std::vector<std::exception_ptr> errors(cfg.restarts);

  auto run_one = [&](int r) {
    try {
      const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(r);
      SlaterState s0 = initial_state(n, grid, seed, cfg.init, cfg.previous.get(), cfg.perturbation);
      MinimizeResult res = descend(model, std::move(s0), cfg);
      res.seed = seed;
      runs[r] = std::move(res);
    } catch (...) {
      errors[r] = std::current_exception();
    }
  };

  const int workers = std::min(cfg.threads, cfg.restarts);
  if (workers <= 1) {
    for (int r = 0; r < cfg.restarts; ++r) run_one(r);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (int r = w; r < cfg.restarts; r += workers) run_one(r);
      });
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    const double eb = runs[best]->energy, er = runs[r]->energy;
    if (er < eb - 1e-12 || (std::abs(er - eb) <= 1e-12 && runs[r]->seed < runs[best]->seed)) best = r;
  }
  return std::move(*runs[best]);
}

MinimizeResult minimize_pt(int n, const PTParams& p, const Grid3& grid, const MinimizerConfig& cfg) {
  p.validate(grid);
  const PTModel model(p);
  MinimizeResult res = minimize(n, model, grid, cfg);
  res.breakdown = pt_energy(res.state, p);
  return res;
}

}  // namespace pekar
