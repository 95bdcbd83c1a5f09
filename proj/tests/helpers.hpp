#pragma once
// Small builders shared by the test binaries.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "pekar/grid.hpp"
#include "pekar/slater.hpp"

namespace testutil {

using pekar::cplx;
using pekar::Vec3;

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// (pi s^2)^{-3/4} exp(-|x - c|^2 / (2 s^2)), normalized in the continuum.
inline pekar::ComplexField gaussian(const pekar::Grid3& g, double s, const Vec3& c = {0, 0, 0}) {
  const double norm = std::pow(std::numbers::pi * s * s, -0.75);
  return pekar::sample_complex(g, [&](const Vec3& x) {
    const double r2 = (x[0] - c[0]) * (x[0] - c[0]) + (x[1] - c[1]) * (x[1] - c[1]) + (x[2] - c[2]) * (x[2] - c[2]);
    return cplx(norm * std::exp(-r2 / (2 * s * s)), 0.0);
  });
}

// Random smooth orbitals: Gaussian envelopes times low-order complex polynomials,
// with both spin components populated.
inline std::vector<pekar::SpinOrbital> random_orbitals(const pekar::Grid3& g, int n, std::mt19937_64& rng,
                                                       double width_frac = 0.1) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  const double L = g.min_box_length();
  std::vector<pekar::SpinOrbital> out;
  for (int i = 0; i < n; ++i) {
    pekar::SpinOrbital o(g);
    for (int s = 0; s < 2; ++s) {
      const Vec3 c{ud(rng) * L / 12, ud(rng) * L / 12, ud(rng) * L / 12};
      const double w = width_frac * L * (0.8 + 0.4 * (ud(rng) + 1) / 2);
      const cplx a0(nd(rng), nd(rng)), ax(nd(rng), nd(rng)), ay(nd(rng), nd(rng)), az(nd(rng), nd(rng));
      o.component(s) = pekar::sample_complex(g, [&](const Vec3& x) {
        const double dx = x[0] - c[0], dy = x[1] - c[1], dz = x[2] - c[2];
        const double env = std::exp(-(dx * dx + dy * dy + dz * dz) / (2 * w * w));
        return env * (a0 + (ax * dx + ay * dy + az * dz) / w);
      });
    }
    out.push_back(std::move(o));
  }
  return out;
}

inline pekar::SlaterState random_state(const pekar::Grid3& g, int n, std::mt19937_64& rng, double width_frac = 0.1) {
  return pekar::orthonormalize(random_orbitals(g, n, rng, width_frac));
}

inline Eigen::MatrixXcd random_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cplx(nd(rng), nd(rng));
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
}

}  // namespace testutil
