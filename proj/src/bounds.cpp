#include "pekar/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pekar/fft.hpp"
#include "pekar/field_ops.hpp"

namespace pekar {

namespace {

constexpr double kPi = std::numbers::pi;

double rpow(double base, const Rational& e) {
  return std::pow(base, static_cast<double>(e.numerator()) / static_cast<double>(e.denominator()));
}

}  // namespace

ErrorBudget error_budget(int N, double alpha, double R, std::span<const int> occupancies, double c_tilde, double nu) {
  if (N < 1) throw Error(ErrorCode::invalid_argument, "N must be >= 1");
  if (!(alpha > 0.0)) throw Error(ErrorCode::invalid_argument, "alpha must be > 0");
  if (!(R > 0.0)) throw Error(ErrorCode::invalid_argument, "R must be > 0");
  if (!(c_tilde >= 0.0)) throw Error(ErrorCode::invalid_argument, "c_tilde must be >= 0");
  if (!(nu >= 2.0))
    throw Error(ErrorCode::repulsion_dominance,
                "repulsion dominance violated: nu = " + std::to_string(nu) + " < 2 makes (U - 2 alpha) negative");
  int total = 0;
  double sum3 = 0.0, sum5 = 0.0;
  for (int n : occupancies) {
    if (n < 1) throw Error(ErrorCode::invalid_argument, "occupancies must be >= 1");
    total += n;
    sum3 += std::pow(n, 3);
    sum5 += std::pow(n, 5);
  }
  if (total != N) throw Error(ErrorCode::invalid_argument, "occupancies must sum to N");

  ErrorBudget b;
  b.N = N;
  b.alpha = alpha;
  b.R = R;
  b.c_tilde = c_tilde;
  const double N2 = static_cast<double>(N) * N;
  b.terms = {
      {"splitting", 8.0 / (kPi * kPi), Rational(1), Rational(-1), "N^2", N2},
      {"localization", 2.0 * kPi * kPi, Rational(0), Rational(-2), "N^2", N2},
      {"ball", 3.0, Rational(80, 23), Rational(2), "sum n_i^5", sum5},
      {"ball_constant", c_tilde, Rational(42, 23), Rational(0), "sum n_i^3", sum3},
  };
  for (auto& t : b.terms) {
    t.value = t.coefficient * rpow(alpha, t.alpha_exponent) * rpow(R, t.R_exponent) * t.n_factor;
    b.total += t.value;
  }
  return b;
}

double optimal_R(int N, double alpha) {
  if (N < 1 || !(alpha > 0.0)) throw Error(ErrorCode::invalid_argument, "need N >= 1 and alpha > 0");
  return rpow(alpha, kOptimalRExponent) / N;
}

ErrorBudget error_budget_at_optimal_R(int N, double alpha, std::span<const int> occupancies, double c_tilde,
                                      double nu) {
  return error_budget(N, alpha, optimal_R(N, alpha), occupancies, c_tilde, nu);
}

double composed_constant(double c_tilde) { return 8.0 / (kPi * kPi) + 3.0 + c_tilde; }

double three_term_bound(int N, double alpha, double c_tilde) {
  const double n = N;
  return composed_constant(c_tilde) * rpow(alpha, Rational(42, 23)) * n * n * n +
         2.0 * kPi * kPi * rpow(alpha, Rational(38, 23)) * n * n * n * n;
}

Sandwich lower_bound(int N, double alpha, double C_N1, double c) {
  if (N < 1) throw Error(ErrorCode::invalid_argument, "N must be >= 1");
  if (!(alpha > 0.0)) throw Error(ErrorCode::invalid_argument, "alpha must be > 0");
  if (!(c >= 0.0)) throw Error(ErrorCode::invalid_argument, "c must be >= 0");
  const double n4 = std::pow(static_cast<double>(N), 4);
  Sandwich s;
  s.upper = alpha * alpha * C_N1;
  s.lower = s.upper - c * rpow(alpha, Rational(42, 23)) * n4;
  s.relative_width = C_N1 != 0.0 ? c * rpow(alpha, Rational(-4, 23)) * n4 / std::abs(C_N1)
                                 : std::numeric_limits<double>::infinity();
  return s;
}

double binding_gap(std::span<const std::optional<double>> C_values) {
  if (C_values.size() < 3) throw Error(ErrorCode::missing_entries, "binding gap needs C_0..C_N with N >= 2");
  for (std::size_t k = 0; k < C_values.size(); ++k)
    if (!C_values[k] || !std::isfinite(*C_values[k]))
      throw Error(ErrorCode::missing_entries, "missing C_" + std::to_string(k));
  if (*C_values[0] != 0.0) throw Error(ErrorCode::invalid_argument, "C_0 must be 0");
  const std::size_t N = C_values.size() - 1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 <= N; ++k) best = std::min(best, *C_values[k] + *C_values[N - k]);
  return best - *C_values[N];
}

double binding_gap(std::span<const double> C_values) {
  std::vector<std::optional<double>> v(C_values.begin(), C_values.end());
  return binding_gap(std::span<const std::optional<double>>(v));
}

BindingReport binding_scan(int N, std::span<const double> nus, const PTParams& base, const Grid3& grid,
                           const MinimizerConfig& cfg) {
  if (N < 2) throw Error(ErrorCode::invalid_argument, "binding scan needs N >= 2");
  BindingReport rep;
  rep.N = N;
  rep.alpha = base.alpha;
  for (double nu : nus) {
    BindingRow row;
    row.nu = nu;
    row.C.assign(N + 1, std::nullopt);
    row.C[0] = 0.0;
    PTParams p = base;
    p.U = nu * base.alpha;
    std::shared_ptr<const SlaterState> prev;
    for (int k = 1; k <= N; ++k) {
      MinimizerConfig c = cfg;
      if (prev) {
        c.init = InitStrategy::perturbed_previous;
        c.previous = prev;
      } else if (c.init == InitStrategy::perturbed_previous) {
        c.init = InitStrategy::random_gaussians;
      }
      try {
        MinimizeResult r = minimize_pt(k, p, grid, c);
        row.C[k] = r.energy;
        for (const auto& w : r.warnings) row.notes.push_back("k=" + std::to_string(k) + ": " + w);
        prev = std::make_shared<const SlaterState>(std::move(r.state));
      } catch (const Error& e) {
        row.notes.push_back("k=" + std::to_string(k) + ": " + e.what());
        prev.reset();
      }
    }
    try {
      row.gap = binding_gap(std::span<const std::optional<double>>(row.C));
    } catch (const Error& e) {
      row.notes.push_back(e.what());
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

namespace {

double cutoff_step(double r, double radius) {
  const double inner = 0.8 * radius;
  if (r <= inner) return 1.0;
  if (r >= radius) return 0.0;
  const double t = (radius - r) / (radius - inner);
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double radius_of(const Vec3& x) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }

// Fraction of mass farther than r from the grid origin.
double mass_outside_origin_ball(const RealField& rho, double r) {
  double total = 0.0, out = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    total += std::abs(rho[i]);
    if (radius_of(rho.grid().position(i)) > r) out += std::abs(rho[i]);
  }
  return total > 0.0 ? out / total : 0.0;
}

}  // namespace

SlaterState truncate_support(const SlaterState& s, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::invalid_argument, "support radius must be > 0");
  const Grid3& g = s.grid();
  std::vector<double> w(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) w[i] = cutoff_step(radius_of(g.position(i)), radius);
  std::vector<SpinOrbital> out(s.orbitals().begin(), s.orbitals().end());
  for (auto& o : out)
    for (int c = 0; c < 2; ++c)
      for (std::size_t i = 0; i < g.size(); ++i) o.component(c)[i] *= w[i];
  return orthonormalize(std::move(out));
}

SlaterState embed_state(const SlaterState& s, const Grid3& big, const Index3& offset) {
  const Grid3& g = s.grid();
  if (g.spacing() != big.spacing()) throw Error(ErrorCode::grid_mismatch, "embedding needs equal spacing");
  std::vector<SpinOrbital> out;
  for (const auto& o : s.orbitals()) {
    SpinOrbital e(big);
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      const Index3 ijk = g.unflat(idx);
      Index3 t;
      for (int a = 0; a < 3; ++a) {
        t[a] = ijk[a] - g.dim(a) / 2 + big.dim(a) / 2 + offset[a];
        if (t[a] < 0 || t[a] >= big.dim(a)) {
          if (o.up[idx] != cplx(0.0) || o.down[idx] != cplx(0.0))
            throw Error(ErrorCode::support_overflow, "embedded state leaves the target box");
          t[a] = -1;
        }
      }
      if (t[0] < 0 || t[1] < 0 || t[2] < 0) continue;
      const std::size_t to = big.flat(t[0], t[1], t[2]);
      e.up[to] = o.up[idx];
      e.down[to] = o.down[idx];
    }
    out.push_back(std::move(e));
  }
  return SlaterState(std::move(out));
}

CrossCoulomb::CrossCoulomb(const RealField& rho_m, const RealField& rho_n) : spacing_(rho_m.grid().spacing()) {
  require_same_grid(rho_m.grid(), rho_n.grid(), "cross Coulomb densities");
  const Grid3& g = rho_m.grid();
  // Lags beyond the span of the two supports carry only FFT roundoff.
  auto support_radius = [&](const RealField& rho) {
    double r = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (rho[i] != 0.0) r = std::max(r, radius_of(g.position(i)));
    return r;
  };
  const double span = support_radius(rho_m) + support_radius(rho_n) + std::sqrt(3.0) * g.spacing();
  const Index3 pd{2 * g.dim(0), 2 * g.dim(1), 2 * g.dim(2)};
  const Grid3 pg(pd, g.spacing());
  std::vector<cplx> a(pg.size()), b(pg.size());
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const Index3 ijk = g.unflat(idx);
    const std::size_t to = pg.flat(ijk[0], ijk[1], ijk[2]);
    a[to] = rho_m[idx];
    b[to] = rho_n[idx];
  }
  const Fft3& fft = Fft3::for_dims(pd);
  fft.forward(a.data(), a.data());
  fft.forward(b.data(), b.data());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= std::conj(b[i]);
  fft.inverse(a.data(), a.data());
  // a[L] = sum_u rho_m(u) rho_n(u - L) for lags |L_a| < n_a.
  const double vol = g.cell_volume();
  for (std::size_t idx = 0; idx < pg.size(); ++idx) {
    const Index3 l = pg.unflat(idx);
    Vec3 w;
    bool in_range = true;
    for (int ax = 0; ax < 3; ++ax) {
      int lag = l[ax] >= pd[ax] / 2 ? l[ax] - pd[ax] : l[ax];
      if (std::abs(lag) >= g.dim(ax)) in_range = false;
      w[ax] = lag * g.spacing();
    }
    if (!in_range || radius_of(w) > span) continue;
    const double c = a[idx].real() * vol * vol;
    if (c == 0.0) continue;
    points_.push_back(w);
    weights_.push_back(c);
    total_ += std::abs(c);
  }
}

double CrossCoulomb::operator()(const Vec3& d) const {
  double s = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const Vec3& w = points_[i];
    const double r = std::sqrt((w[0] + d[0]) * (w[0] + d[0]) + (w[1] + d[1]) * (w[1] + d[1]) +
                               (w[2] + d[2]) * (w[2] + d[2]));
    if (r < 1e-12 * spacing_) {
      if (std::abs(weights_[i]) <= 1e-12 * total_) continue;
      throw Error(ErrorCode::support_overlap, "shift puts the two densities on top of each other");
    }
    s += weights_[i] / r;
  }
  return s;
}

SubadditivityPoint subadditivity_demo(const SlaterState& state_m, const SlaterState& state_n, int shift_points,
                                      const Grid3& big, const PTParams& p, const SubadditivityConfig& cfg) {
  require_same_grid(state_m.grid(), state_n.grid(), "subadditivity states");
  p.validate(big);
  const Grid3& g = state_m.grid();
  const double r = cfg.support_radius;
  if (!(r > 0.0)) throw Error(ErrorCode::invalid_argument, "support_radius must be > 0");
  const RealField rho_m = density(state_m), rho_n = density(state_n);
  for (const RealField* rho : {&rho_m, &rho_n})
    if (mass_outside_origin_ball(*rho, r) > cfg.leak_tolerance)
      throw Error(ErrorCode::support_overflow, "state is not supported in the ball of radius " + std::to_string(r));
  const double d = shift_points * g.spacing();
  if (!(d >= 2.0 * r))
    throw Error(ErrorCode::support_overlap, "shift " + std::to_string(d) + " < sum of support radii " +
                                                std::to_string(2.0 * r));
  const double extent = d + 2.0 * r;
  if (extent > 0.5 * big.min_box_length())
    throw Error(ErrorCode::support_overflow, "combined support does not fit the Coulomb truncation of the box");

  const int half = shift_points / 2;
  const SlaterState em = embed_state(state_m, big, {shift_points - half, 0, 0});
  const SlaterState en = embed_state(state_n, big, {-half, 0, 0});
  std::vector<SpinOrbital> wedge(em.orbitals().begin(), em.orbitals().end());
  wedge.insert(wedge.end(), en.orbitals().begin(), en.orbitals().end());
  const SlaterState combined(std::move(wedge));

  SubadditivityPoint pt;
  pt.d = d;
  pt.lhs = pt_energy(combined, p).total;
  pt.C_m = pt_energy(em, p).total;
  pt.C_n = pt_energy(en, p).total;
  pt.cross_term = (p.U - 2.0 * p.alpha) * CrossCoulomb(rho_m, rho_n)({d, 0.0, 0.0});
  const double rhs = pt.C_m + pt.C_n + pt.cross_term;
  pt.holds = pt.lhs <= rhs + cfg.tolerance * std::max(1.0, std::abs(pt.C_m + pt.C_n));
  return pt;
}

SlaterState recenter_state(const SlaterState& s) {
  const Grid3& g = s.grid();
  const RealField rho = density(s);
  Vec3 c{0.0, 0.0, 0.0};
  double m = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 x = g.position(i);
    for (int a = 0; a < 3; ++a) c[a] += rho[i] * x[a];
    m += rho[i];
  }
  Index3 shift;
  for (int a = 0; a < 3; ++a) shift[a] = static_cast<int>(std::lround(c[a] / m / g.spacing()));
  std::vector<SpinOrbital> out;
  for (const auto& o : s.orbitals()) {
    SpinOrbital r(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Index3 ijk = g.unflat(i);
      Index3 t;
      for (int a = 0; a < 3; ++a) t[a] = ((ijk[a] - shift[a]) % g.dim(a) + g.dim(a)) % g.dim(a);
      const std::size_t to = g.flat(t[0], t[1], t[2]);
      r.up[to] = o.up[i];
      r.down[to] = o.down[i];
    }
    out.push_back(std::move(r));
  }
  return SlaterState(std::move(out));
}

SubadditivityStudy subadditivity_study(const SlaterState& state_m, const SlaterState& state_n, double reference,
                                       std::span<const int> shift_points, std::span<const double> cross_distances,
                                       const Grid3& big, const PTParams& p, const SubadditivityConfig& cfg) {
  if (shift_points.size() < 2) throw Error(ErrorCode::invalid_argument, "need at least two shifts");
  if (cross_distances.size() < 2) throw Error(ErrorCode::invalid_argument, "need at least two cross distances");
  SubadditivityStudy st;
  st.reference = reference;
  st.all_hold = true;
  std::vector<double> d, e;
  for (int s : shift_points) {
    st.points.push_back(subadditivity_demo(state_m, state_n, s, big, p, cfg));
    st.all_hold = st.all_hold && st.points.back().holds;
    d.push_back(st.points.back().d);
    e.push_back(st.points.back().lhs);
  }
  st.fit = fit_inverse_distance(d, e);
  st.limit_gap = std::abs(st.fit.limit - reference) / std::abs(reference);

  const CrossCoulomb cross(density(state_m), density(state_n));
  for (double dist : cross_distances) {
    if (!(dist >= 2.0 * cfg.support_radius))
      throw Error(ErrorCode::support_overlap, "cross distance below the sum of support radii");
    st.cross_distances.push_back(dist);
    st.cross_values.push_back((p.U - 2.0 * p.alpha) * cross({dist, 0.0, 0.0}));
  }
  st.cross_slope = loglog_slope(st.cross_distances, st.cross_values);
  return st;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::invalid_argument, "need >= 2 paired samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(std::abs(y[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

InverseFit fit_inverse_distance(std::span<const double> d, std::span<const double> e) {
  if (d.size() != e.size() || d.size() < 2) throw Error(ErrorCode::invalid_argument, "need >= 2 paired samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double x = 1.0 / d[i];
    sx += x;
    sy += e[i];
    sxx += x * x;
    sxy += x * e[i];
  }
  InverseFit f;
  f.a = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.limit = (sy - f.a * sx) / n;
  return f;
}

}  // namespace pekar
