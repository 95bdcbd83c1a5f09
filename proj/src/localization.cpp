#include "pekar/localization.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace pekar {

namespace {

constexpr double kPi = std::numbers::pi;

// C-infinity transition: 0 at t <= 0, 1 at t >= 1.
double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double smooth_step_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  const double da = a / (t * t), db = -b / ((1.0 - t) * (1.0 - t));
  return (da * b - a * db) / ((a + b) * (a + b));
}

// Composite Simpson on a uniform grid with an even number of intervals.
double simpson(std::span<const double> f, double h) {
  const std::size_t n = f.size() - 1;
  double s = f[0] + f[n];
  for (std::size_t i = 1; i < n; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * f[i];
  return s * h / 3.0;
}

std::vector<double> cumulative_trapezoid(std::span<const double> f, double h) {
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t i = 1; i < f.size(); ++i) out[i] = out[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
  return out;
}

double interp(std::span<const double> table, double h, double x) {
  const double pos = x / h;
  if (pos <= 0.0) return table.front();
  const auto last = static_cast<double>(table.size() - 1);
  if (pos >= last) return table.back();
  const auto i = static_cast<std::size_t>(pos);
  const double t = pos - static_cast<double>(i);
  return table[i] * (1.0 - t) + table[i + 1] * t;
}

double inverse_cdf(std::span<const double> cdf, double h, double u) {
  const double target = u * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
  if (it == cdf.begin()) return 0.0;
  if (it == cdf.end()) return h * static_cast<double>(cdf.size() - 1);
  const std::size_t i = static_cast<std::size_t>(it - cdf.begin()) - 1;
  const double span = cdf[i + 1] - cdf[i];
  const double t = span > 0.0 ? (target - cdf[i]) / span : 0.0;
  return h * (static_cast<double>(i) + t);
}

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

}  // namespace

CutoffProfile::CutoffProfile(double R, int resolution) : R_(R) {
  if (!(R > 0.0) || !std::isfinite(R)) throw Error(ErrorCode::invalid_argument, "cutoff radius must be > 0");
  if (resolution < 2) throw Error(ErrorCode::invalid_argument, "cutoff resolution must be >= 2");
  if (resolution % 2 != 0) ++resolution;
  const double h = R / resolution;
  r_.resize(resolution + 1);
  std::vector<double> w2(resolution + 1), g2(resolution + 1);
  for (int i = 0; i <= resolution; ++i) {
    const double r = i * h;
    r_[i] = r;
    w2[i] = 4.0 * kPi * r * r * raw(r) * raw(r);
    g2[i] = 4.0 * kPi * r * r * raw_derivative(r) * raw_derivative(r);
  }
  const double mass = simpson(w2, h);
  c_ = 1.0 / std::sqrt(mass);
  dirichlet_energy_ = simpson(g2, h) / mass;

  chi_.resize(resolution + 1);
  std::vector<double> rchi(resolution + 1);
  for (int i = 0; i <= resolution; ++i) {
    chi_[i] = value(r_[i]);
    rchi[i] = r_[i] * chi_[i];
  }
  q_ = cumulative_trapezoid(rchi, h);
  cdf_chi2_ = cumulative_trapezoid(w2, h);
  cdf_grad_ = cumulative_trapezoid(g2, h);
}

double CutoffProfile::raw(double r) const noexcept {
  if (r >= R_) return 0.0;
  const double k = kPi / R_;
  const double mode = r < 1e-6 * R_ ? k * (1.0 - (k * r) * (k * r) / 6.0) : std::sin(k * r) / r;
  return mode * smooth_step((R_ - r) / ((1.0 - kStepStart) * R_));
}

double CutoffProfile::raw_derivative(double r) const noexcept {
  if (r >= R_) return 0.0;
  const double k = kPi / R_;
  double mode, dmode;
  if (r < 1e-6 * R_) {
    mode = k * (1.0 - (k * r) * (k * r) / 6.0);
    dmode = -k * k * k * r / 3.0;
  } else {
    mode = std::sin(k * r) / r;
    dmode = (k * r * std::cos(k * r) - std::sin(k * r)) / (r * r);
  }
  const double w = (1.0 - kStepStart) * R_;
  const double t = (R_ - r) / w;
  return dmode * smooth_step(t) - mode * smooth_step_derivative(t) / w;
}

double CutoffProfile::value(double r) const noexcept { return c_ * raw(std::abs(r)); }

double CutoffProfile::derivative(double r) const noexcept { return c_ * raw_derivative(std::abs(r)); }

double CutoffProfile::q_at(double s) const noexcept { return interp(q_, r_[1], s); }

double CutoffProfile::overlap(double d) const {
  d = std::abs(d);
  if (d >= 2.0 * R_) return 0.0;
  if (d < 1e-4 * R_) return 1.0 - d * d * dirichlet_energy_ / 6.0;
  const std::size_t n = r_.size();
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = r_[i];
    f[i] = r * chi_[i] * (q_at(std::min(r + d, R_)) - q_at(std::abs(r - d)));
  }
  return 2.0 * kPi / d * simpson(f, r_[1]);
}

double CutoffProfile::overlap_derivative(double d) const {
  const double h = 1e-3 * R_;
  if (d < h) return -d * dirichlet_energy_ / 3.0;
  return (overlap(d + h) - overlap(d - h)) / (2.0 * h);
}

double CutoffProfile::sample_radius(double u, bool gradient_density) const {
  return inverse_cdf(gradient_density ? cdf_grad_ : cdf_chi2_, r_[1], u);
}

double dirichlet_ground_energy(double R) { return kPi * kPi / (R * R); }

CutoffProfile make_cutoff(double R, int resolution) {
  if (resolution < 16)
    throw Error(ErrorCode::profile_budget, "resolution " + std::to_string(resolution) + " too coarse for the cutoff");
  CutoffProfile fine(R, resolution);
  const CutoffProfile coarse(R, std::max(2, resolution / 2));
  const double e = fine.dirichlet_energy();
  const double budget = 1.5 * dirichlet_ground_energy(R);
  const double err = std::abs(e - coarse.dirichlet_energy());
  if (!(err <= 1e-4 * e) || !(e + err <= budget))
    throw Error(ErrorCode::profile_budget, "Dirichlet energy " + std::to_string(e) + " (+/- " + std::to_string(err) +
                                               ") not certified below " + std::to_string(budget));
  return fine;
}

double permanent(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n) throw Error(ErrorCode::invalid_argument, "permanent needs a square matrix");
  if (n > kMaxPermanentSize) throw Error(ErrorCode::size_limit, "permanent limited to n <= 20");
  if (n == 0) return 1.0;
  // Ryser: Per = (-1)^n sum_S (-1)^{|S|} prod_i sum_{j in S} m_ij, columns toggled in Gray order.
  std::vector<double> row_sum(n, 0.0);
  double total = 0.0;
  std::uint64_t gray = 0;
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < count; ++k) {
    const int col = std::countr_zero(k);
    const std::uint64_t bit = std::uint64_t{1} << col;
    const double sign = (gray & bit) ? -1.0 : 1.0;
    gray ^= bit;
    for (Eigen::Index i = 0; i < n; ++i) row_sum[i] += sign * m(i, col);
    double prod = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) prod *= row_sum[i];
    total += (std::popcount(gray) % 2 == 0) ? prod : -prod;
  }
  return n % 2 == 0 ? total : -total;
}

Eigen::MatrixXd permanent_minors(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd out(n, n);
  Eigen::MatrixXd minor(n - 1, n - 1);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index a = 0, ra = 0; a < n; ++a) {
        if (a == i) continue;
        for (Eigen::Index b = 0, cb = 0; b < n; ++b) {
          if (b == j) continue;
          minor(ra, cb++) = m(a, b);
        }
        ++ra;
      }
      out(i, j) = permanent(minor);
    }
  return out;
}

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

void check_positions(std::span<const Vec3> X, std::span<const Vec3> Y, int limit) {
  if (X.empty()) throw Error(ErrorCode::invalid_argument, "need at least one position");
  if (X.size() != Y.size()) throw Error(ErrorCode::invalid_argument, "X and Y must have the same length");
  if (X.size() > static_cast<std::size_t>(limit))
    throw Error(ErrorCode::size_limit, "at most " + std::to_string(limit) + " electrons supported");
}

Eigen::MatrixXd chi_matrix(std::span<const Vec3> X, std::span<const Vec3> Y, const CutoffProfile& chi, bool squared) {
  const auto n = static_cast<Eigen::Index>(X.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = chi.value(norm(sub(X[i], Y[j])));
      m(i, j) = squared ? v * v : v;
    }
  return m;
}

Vec3 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    Vec3 v{g(rng), g(rng), g(rng)};
    const double n = norm(v);
    if (n > 1e-12) return {v[0] / n, v[1] / n, v[2] / n};
  }
}

Vec3 offset(const Vec3& x, double r, const Vec3& dir) {
  return {x[0] + r * dir[0], x[1] + r * dir[1], x[2] + r * dir[2]};
}

struct Welford {
  std::uint64_t n = 0;
  double mean = 0.0, m2 = 0.0;
  void add(double v) {
    ++n;
    const double d = v - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (v - mean);
  }
  MCEstimate result() const {
    MCEstimate e;
    e.mean = mean;
    e.samples = n;
    e.std_error = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
    e.flagged = !(e.std_error <= 0.1 * std::abs(mean));
    return e;
  }
};

}  // namespace

Eigen::MatrixXd overlap_matrix(std::span<const Vec3> X, const CutoffProfile& chi) {
  const auto n = static_cast<Eigen::Index>(X.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) m(i, j) = m(j, i) = chi.overlap(norm(sub(X[i], X[j])));
  }
  return m;
}

WeightParts localization_weight(std::span<const Vec3> X, std::span<const Vec3> Y, const CutoffProfile& chi) {
  check_positions(X, Y, kMaxWeightElectrons);
  WeightParts w;
  w.G = permanent(chi_matrix(X, Y, chi, false));
  w.P = factorial(static_cast<int>(X.size())) * permanent(overlap_matrix(X, chi));
  w.W = w.G / std::sqrt(w.P);
  return w;
}

namespace {

// Uniform sampling of the lens B_R(a) and B_R(b), by rejection from its
// bounding cylinder (acceptance >= 1/3 for every separation).
class Lens {
 public:
  Lens(const Vec3& a, const Vec3& b, double R) : a_(a), b_(b), R_(R) {
    const Vec3 ab = sub(b, a);
    d_ = norm(ab);
    volume_ = kPi * (4.0 * R + d_) * (2.0 * R - d_) * (2.0 * R - d_) / 12.0;
    mid_ = {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])};
    e_ = d_ > 0.0 ? Vec3{ab[0] / d_, ab[1] / d_, ab[2] / d_} : Vec3{0.0, 0.0, 1.0};
    const Vec3 t = std::abs(e_[0]) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
    const double te = t[0] * e_[0] + t[1] * e_[1] + t[2] * e_[2];
    u_ = {t[0] - te * e_[0], t[1] - te * e_[1], t[2] - te * e_[2]};
    const double un = norm(u_);
    u_ = {u_[0] / un, u_[1] / un, u_[2] / un};
    v_ = {e_[1] * u_[2] - e_[2] * u_[1], e_[2] * u_[0] - e_[0] * u_[2], e_[0] * u_[1] - e_[1] * u_[0]};
  }

  double density(const Vec3& y) const { return contains(y) ? 1.0 / volume_ : 0.0; }

  Vec3 sample(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double half = R_ - 0.5 * d_, rmax = std::sqrt(R_ * R_ - 0.25 * d_ * d_);
    for (;;) {
      const double t = (2.0 * unif(rng) - 1.0) * half;
      const double r = rmax * std::sqrt(unif(rng)), phi = 2.0 * kPi * unif(rng);
      const double cu = r * std::cos(phi), cv = r * std::sin(phi);
      const Vec3 y{mid_[0] + t * e_[0] + cu * u_[0] + cv * v_[0], mid_[1] + t * e_[1] + cu * u_[1] + cv * v_[1],
                   mid_[2] + t * e_[2] + cu * u_[2] + cv * v_[2]};
      if (contains(y)) return y;
    }
  }

 private:
  bool contains(const Vec3& y) const { return norm(sub(y, a_)) < R_ && norm(sub(y, b_)) < R_; }

  Vec3 a_, b_, mid_, e_, u_, v_;
  double R_, d_ = 0.0, volume_ = 0.0;
};

}  // namespace

MCEstimate weight_norm_mc(std::span<const Vec3> X, const CutoffProfile& chi, std::uint64_t samples,
                          std::uint64_t seed) {
  check_positions(X, X, kMaxWeightElectrons);
  const int n = static_cast<int>(X.size());
  const double nfact = factorial(n);
  const double P = nfact * permanent(overlap_matrix(X, chi));
  const double R = chi.radius();

  struct Pair {
    int a, b;
    Lens lens;
  };
  std::vector<Pair> pairs;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (norm(sub(X[a], X[b])) < 2.0 * R) pairs.push_back({a, b, Lens(X[a], X[b], R)});
  const double pair_share = pairs.empty() ? 0.0 : kPairProposalShare;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<int> perm(n);
  std::vector<Vec3> Y(n);
  Welford acc;
  for (std::uint64_t s = 0; s < samples; ++s) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const Pair* pick = nullptr;
    if (unif(rng) < pair_share)
      pick = &pairs[std::min(pairs.size() - 1, static_cast<std::size_t>(unif(rng) * pairs.size()))];
    for (int i = 0; i < n; ++i) {
      if (pick && (i == pick->a || i == pick->b))
        Y[perm[i]] = pick->lens.sample(rng);
      else
        Y[perm[i]] = offset(X[i], chi.sample_radius(unif(rng), false), random_direction(rng));
    }
    const double G = permanent(chi_matrix(X, Y, chi, false));
    const Eigen::MatrixXd sq = chi_matrix(X, Y, chi, true);
    double q = (1.0 - pair_share) * permanent(sq) / nfact;
    for (const auto& pr : pairs) {
      Eigen::MatrixXd B = sq;
      for (int j = 0; j < n; ++j) B(pr.a, j) = B(pr.b, j) = pr.lens.density(Y[j]);
      q += pair_share / static_cast<double>(pairs.size()) * permanent(B) / nfact;
    }
    acc.add(q > 0.0 ? G * G / (P * q) : 0.0);
  }
  return acc.result();
}

std::vector<LeakageEstimate> estimate_Fj(std::span<const Vec3> X, const CutoffProfile& chi, std::uint64_t samples,
                                         std::uint64_t seed) {
  check_positions(X, X, kMaxLeakageElectrons);
  const int n = static_cast<int>(X.size());
  const double nfact = factorial(n);
  const Eigen::MatrixXd M = overlap_matrix(X, chi);
  const double P = nfact * permanent(M);
  const Eigen::MatrixXd Mminor = n > 1 ? permanent_minors(M) : Eigen::MatrixXd::Ones(1, 1);
  const double E = chi.dirichlet_energy();

  // Proposal density for electron j's partner: (chi^2 + |chi'|^2 / E) / 2.
  auto mixed = [&](double r) {
    const double v = chi.value(r), d = chi.derivative(r);
    return 0.5 * v * v + 0.5 * d * d / E;
  };

  std::vector<LeakageEstimate> out(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<int> perm(n);
  std::vector<Vec3> Y(n);
  for (int j = 0; j < n; ++j) {
    Welford acc;
    for (std::uint64_t s = 0; s < samples; ++s) {
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      for (int i = 0; i < n; ++i) {
        const bool grad_component = i == j && unif(rng) < 0.5;
        Y[perm[i]] = offset(X[i], chi.sample_radius(unif(rng), grad_component), random_direction(rng));
      }
      Eigen::MatrixXd Q = chi_matrix(X, Y, chi, true);
      for (int k = 0; k < n; ++k) Q(j, k) = mixed(norm(sub(X[j], Y[k])));
      const double q = permanent(Q) / nfact;

      const Eigen::MatrixXd Gm = chi_matrix(X, Y, chi, false);
      Vec3 grad{0.0, 0.0, 0.0};
      for (int k = 0; k < n; ++k) {
        const Vec3 v = sub(X[j], Y[k]);
        const double r = norm(v);
        if (r < 1e-300) continue;
        const double dchi = chi.derivative(r);
        if (dchi == 0.0) continue;
        double minor = 1.0;
        if (n > 1) {
          Eigen::MatrixXd sub_m(n - 1, n - 1);
          for (int a = 0, ra = 0; a < n; ++a) {
            if (a == j) continue;
            for (int b = 0, cb = 0; b < n; ++b)
              if (b != k) sub_m(ra, cb++) = Gm(a, b);
            ++ra;
          }
          minor = permanent(sub_m);
        }
        for (int a = 0; a < 3; ++a) grad[a] += dchi * v[a] / r * minor;
      }
      const double g2 = grad[0] * grad[0] + grad[1] * grad[1] + grad[2] * grad[2];
      acc.add(q > 0.0 ? g2 / (P * q) : 0.0);
    }
    out[j].upper = acc.result();

    Vec3 gp{0.0, 0.0, 0.0};
    for (int k = 0; k < n; ++k) {
      if (k == j) continue;
      const Vec3 v = sub(X[j], X[k]);
      const double d = norm(v);
      if (d < 1e-300) continue;
      const double dO = chi.overlap_derivative(d);
      for (int a = 0; a < 3; ++a) gp[a] += nfact * 2.0 * Mminor(j, k) * dO * v[a] / d;
    }
    out[j].grad_P_term = (gp[0] * gp[0] + gp[1] * gp[1] + gp[2] * gp[2]) / (4.0 * P * P);
  }
  return out;
}

int BallCluster::total_occupancy() const noexcept {
  int s = 0;
  for (const auto& b : balls) s += b.occupancy;
  return s;
}

double ball_distance(const Ball& a, const Ball& b) { return norm(sub(a.center, b.center)) - a.radius - b.radius; }

bool BallCluster::satisfies_invariants() const {
  const double tol = 1e-12 * R;
  for (const auto& b : balls)
    if (std::abs(b.radius - 0.5 * (3 * b.occupancy - 1) * R) > tol) return false;
  for (std::size_t i = 0; i < balls.size(); ++i)
    for (std::size_t j = i + 1; j < balls.size(); ++j)
      if (ball_distance(balls[i], balls[j]) < R - tol) return false;
  return true;
}

namespace {

// Ball of the merged occupancy containing both inputs; its center is the
// center of the smallest ball enclosing a and b.
Ball merge_pair(const Ball& a, const Ball& b, double R) {
  Ball m;
  m.occupancy = a.occupancy + b.occupancy;
  m.radius = 0.5 * (3 * m.occupancy - 1) * R;
  m.members = a.members;
  m.members.insert(m.members.end(), b.members.begin(), b.members.end());
  std::sort(m.members.begin(), m.members.end());
  const Vec3 ab = sub(b.center, a.center);
  const double D = norm(ab);
  if (D + b.radius <= a.radius) {
    m.center = a.center;
  } else if (D + a.radius <= b.radius) {
    m.center = b.center;
  } else {
    const double enclosing = 0.5 * (D + a.radius + b.radius);
    const double t = (enclosing - a.radius) / D;
    m.center = {a.center[0] + t * ab[0], a.center[1] + t * ab[1], a.center[2] + t * ab[2]};
  }
  return m;
}

}  // namespace

BallCluster merge_balls(std::span<const Vec3> Y, double R) {
  if (!(R > 0.0)) throw Error(ErrorCode::invalid_argument, "R must be > 0");
  BallCluster c;
  c.R = R;
  const double tol = 1e-12 * R;
  int step = 0;
  for (std::size_t j = 0; j < Y.size(); ++j) {
    c.balls.push_back(Ball{Y[j], 1, R, {static_cast<int>(j)}});
    for (;;) {
      double best = R - tol;
      std::size_t bi = 0, bj = 0;
      bool found = false;
      for (std::size_t a = 0; a < c.balls.size(); ++a)
        for (std::size_t b = a + 1; b < c.balls.size(); ++b) {
          const double d = ball_distance(c.balls[a], c.balls[b]);
          if (d < best) {
            best = d;
            bi = a;
            bj = b;
            found = true;
          }
        }
      if (!found) break;
      const Ball merged = merge_pair(c.balls[bi], c.balls[bj], R);
      c.trace.push_back(MergeEvent{++step, c.balls[bi].center, c.balls[bj].center, c.balls[bi].occupancy,
                                   c.balls[bj].occupancy, merged.center, merged.radius});
      c.balls.erase(c.balls.begin() + static_cast<std::ptrdiff_t>(bj));
      c.balls[bi] = merged;
    }
  }
  return c;
}

double localization_error(int N, double R) {
  if (N < 1 || !(R > 0.0)) throw Error(ErrorCode::invalid_argument, "need N >= 1 and R > 0");
  return 2.0 * kPi * kPi * N * N / (R * R);
}

}  // namespace pekar
