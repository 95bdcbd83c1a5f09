#include "pekar/phonon_blocks.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <string>

namespace pekar {

namespace {

constexpr double kPi = std::numbers::pi;
using boost::math::quadrature::tanh_sinh;

void check_cutoff(double Lambda, double P) {
  if (!(Lambda > 0.0) || !std::isfinite(Lambda)) throw Error(ErrorCode::invalid_argument, "Lambda must be > 0");
  if (!(P > 0.0) || !std::isfinite(P)) throw Error(ErrorCode::invalid_argument, "P must be > 0");
}

double nearest_coordinate(double lo, double hi) { return std::clamp(0.0, lo, hi); }

// int_{z0}^{z1} dz / (a^2 + z^2) for 0 <= z0 <= z1, without cancellation.
double z_integral_positive(double a, double z0, double z1) {
  if (z1 <= z0) return 0.0;
  if (a < 1e-300) return z0 > 0.0 ? (z1 - z0) / (z0 * z1) : std::numeric_limits<double>::infinity();
  return std::atan(a * (z1 - z0) / (a * a + z0 * z1)) / a;
}

double z_integral(double a, double z0, double z1) {
  if (z1 <= z0) return 0.0;
  if (z0 >= 0.0) return z_integral_positive(a, z0, z1);
  if (z1 <= 0.0) return z_integral_positive(a, -z1, -z0);
  return z_integral_positive(a, 0.0, -z0) + z_integral_positive(a, 0.0, z1);
}

struct Box {
  double lo[3], hi[3];
};

Box block_box(const BlockIndex& m, double P) {
  Box b;
  for (int a = 0; a < 3; ++a) {
    b.lo[a] = (m[a] - 0.5) * P;
    b.hi[a] = (m[a] + 0.5) * P;
  }
  return b;
}

// Double-exponential quadrature over [a, b] split at the given interior
// breakpoints; the pieces only carry endpoint (square-root) singularities.
template <typename F>
double integrate_pieces(F&& f, double a, double b, std::vector<double> breaks, double tol) {
  thread_local tanh_sinh<double> rule(12);
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double lo = std::max(a, breaks[i]), hi = std::min(b, breaks[i + 1]);
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(b - a))) continue;
    sum += rule.integrate(f, lo, hi, tol);
  }
  return sum;
}

// int over box intersected with {r_in <= |k| <= Lambda} of |k|^-2.
double shell_box_integral(const Box& box, double Lambda, double r_in, double tol) {
  std::vector<double> circles{Lambda};
  for (double z : {box.lo[2], box.hi[2]})
    if (std::abs(z) < Lambda) circles.push_back(std::sqrt(Lambda * Lambda - z * z));
  if (r_in > 0.0) circles.push_back(r_in);

  auto column = [&](double kx, double ky) {
    const double a2 = kx * kx + ky * ky;
    if (a2 >= Lambda * Lambda) return 0.0;
    const double a = std::sqrt(a2);
    const double zmax = std::sqrt(Lambda * Lambda - a2);
    const double z0 = std::max(box.lo[2], -zmax), z1 = std::min(box.hi[2], zmax);
    if (z1 <= z0) return 0.0;
    if (r_in <= 0.0 || a2 >= r_in * r_in) return z_integral(a, z0, z1);
    const double s = std::sqrt(r_in * r_in - a2);
    return z_integral(a, z0, std::min(z1, -s)) + z_integral(a, std::max(z0, s), z1);
  };

  auto row = [&](double kx) {
    std::vector<double> breaks{0.0};
    for (double c : circles)
      if (std::abs(kx) < c) {
        const double y = std::sqrt(c * c - kx * kx);
        breaks.push_back(y);
        breaks.push_back(-y);
      }
    return integrate_pieces([&](double ky) { return column(kx, ky); }, box.lo[1], box.hi[1], breaks, tol * 1e-2);
  };

  std::vector<double> xbreaks{0.0};
  for (double c : circles) {
    xbreaks.push_back(c);
    xbreaks.push_back(-c);
  }
  return integrate_pieces(row, box.lo[0], box.hi[0], xbreaks, tol);
}

}  // namespace

double head_constant_MLambda(int n, double Lambda) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "n must be >= 1");
  check_cutoff(Lambda, 1.0);
  return n * std::sqrt(2.0 * Lambda / kPi);
}

double tail_constant_KLambda(int n, double Lambda) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "n must be >= 1");
  check_cutoff(Lambda, 1.0);
  return std::sqrt(2.0 * n / (kPi * Lambda));
}

double CutoffParams::beta() const noexcept { return 1.0 - 2.0 * alpha * n / (kPi * Lambda); }

void CutoffParams::validate() const {
  check_cutoff(Lambda, P);
  if (n < 1) throw Error(ErrorCode::invalid_argument, "n must be >= 1");
  if (!(alpha > 0.0)) throw Error(ErrorCode::invalid_argument, "alpha must be > 0");
  if (!(beta() > 0.0))
    throw Error(ErrorCode::invalid_argument,
                "beta = " + std::to_string(beta()) + " <= 0; need Lambda > 2 alpha n / pi");
}

double BlockModeSet::total_weight() const noexcept {
  double s = 0.0;
  for (const auto& e : entries) s += e.M * e.M;
  return s;
}

bool block_nonempty(const BlockIndex& m, double Lambda, double P) {
  double r2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double c = nearest_coordinate((m[a] - 0.5) * P, (m[a] + 0.5) * P);
    r2 += c * c;
  }
  return r2 <= Lambda * Lambda;
}

double block_count_bound(double Lambda, double P) { return std::pow(2.0 * Lambda / P + 1.0, 3); }

namespace {

Vec3 nearest_to_center(const BlockIndex& m, double Lambda, double P) {
  const Box b = block_box(m, P);
  Vec3 c{m[0] * P, m[1] * P, m[2] * P};
  auto point = [&](double mu) {
    Vec3 k;
    for (int a = 0; a < 3; ++a) k[a] = std::clamp(c[a] / (1.0 + mu), b.lo[a], b.hi[a]);
    return k;
  };
  auto norm2 = [](const Vec3& k) { return k[0] * k[0] + k[1] * k[1] + k[2] * k[2]; };
  if (norm2(c) <= Lambda * Lambda) return c;
  // Projection onto cube intersect ball: k = clamp(c / (1 + mu)) with |k| = Lambda.
  double lo = 0.0, hi = 1.0;
  while (norm2(point(hi)) > Lambda * Lambda && hi < 1e300) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (norm2(point(mid)) > Lambda * Lambda ? lo : hi) = mid;
  }
  Vec3 k = point(hi);
  const double n2 = norm2(k);
  if (n2 > Lambda * Lambda) {
    // Tangential contact: the block touches the ball at its nearest point.
    for (int a = 0; a < 3; ++a) k[a] = nearest_coordinate(b.lo[a], b.hi[a]);
  }
  return k;
}

bool in_box(const Vec3& k, const Box& b) {
  for (int a = 0; a < 3; ++a)
    if (k[a] < b.lo[a] || k[a] > b.hi[a]) return false;
  return true;
}

}  // namespace

Vec3 representative_momentum(const BlockIndex& m, double Lambda, double P, RepresentativeRule rule) {
  check_cutoff(Lambda, P);
  if (!block_nonempty(m, Lambda, P)) throw Error(ErrorCode::empty_block, "block does not meet the ball");
  if (rule == RepresentativeRule::clipped_center) {
    Vec3 c{m[0] * P, m[1] * P, m[2] * P};
    const double r = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
    if (r > Lambda)
      for (auto& v : c) v *= Lambda / r;
    if (in_box(c, block_box(m, P))) return c;
  }
  return nearest_to_center(m, Lambda, P);
}

double mode_weight(const BlockIndex& m, double Lambda, double P, double rel_tol) {
  check_cutoff(Lambda, P);
  if (!block_nonempty(m, Lambda, P)) throw Error(ErrorCode::empty_block, "block does not meet the ball");
  const Box b = block_box(m, P);
  const double tol = std::min(rel_tol, 1e-6) * 1e-2;
  if (m[0] == 0 && m[1] == 0 && m[2] == 0) {
    // The ball of radius r0 sits inside B(0); its share is 4 pi r0.
    const double r0 = std::min(P / 4.0, Lambda);
    const double rest = r0 < Lambda ? shell_box_integral(b, Lambda, r0, tol) : 0.0;
    return std::sqrt(4.0 * kPi * r0 + rest);
  }
  return std::sqrt(shell_box_integral(b, Lambda, 0.0, tol));
}

BlockModeSet build_blocks(double Lambda, double P, RepresentativeRule rule, double rel_tol) {
  check_cutoff(Lambda, P);
  BlockModeSet set;
  set.Lambda = Lambda;
  set.P = P;
  const int reach = static_cast<int>(std::ceil(Lambda / P + 0.5));
  for (int i = -reach; i <= reach; ++i)
    for (int j = -reach; j <= reach; ++j)
      for (int l = -reach; l <= reach; ++l) {
        const BlockIndex m{i, j, l};
        if (!block_nonempty(m, Lambda, P)) continue;
        set.entries.push_back({m, representative_momentum(m, Lambda, P, rule), mode_weight(m, Lambda, P, rel_tol)});
      }
  return set;
}

}  // namespace pekar
