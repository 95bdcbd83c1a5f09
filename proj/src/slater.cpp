#include "pekar/slater.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pekar/fft.hpp"
#include "pekar/field_ops.hpp"
#include "pekar/simd/kernels.hpp"

namespace pekar {

SpinOrbital::SpinOrbital(ComplexField u, ComplexField d) : up(std::move(u)), down(std::move(d)) {
  require_same_grid(up.grid(), down.grid(), "spin orbital components");
}

cplx inner(const SpinOrbital& a, const SpinOrbital& b) { return inner(a.up, b.up) + inner(a.down, b.down); }

double norm2(const SpinOrbital& a) { return norm2(a.up) + norm2(a.down); }

void axpy(cplx s, const SpinOrbital& x, SpinOrbital& y) {
  require_same_grid(x.grid(), y.grid(), "spin orbital axpy");
  const auto& k = simd::active();
  k.axpy(s, x.up.data(), y.up.data(), y.up.size());
  k.axpy(s, x.down.data(), y.down.data(), y.down.size());
}

Eigen::MatrixXcd gram_matrix(std::span<const SpinOrbital> orbitals) {
  const auto n = static_cast<Eigen::Index>(orbitals.size());
  Eigen::MatrixXcd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g(i, i) = norm2(orbitals[i]);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      g(i, j) = inner(orbitals[i], orbitals[j]);
      g(j, i) = std::conj(g(i, j));
    }
  }
  return g;
}

double gram_deviation(std::span<const SpinOrbital> orbitals) {
  const Eigen::MatrixXcd g = gram_matrix(orbitals);
  const auto n = g.rows();
  return (g - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
}

SlaterState::SlaterState(std::vector<SpinOrbital> orbitals, double tol) : orbitals_(std::move(orbitals)) {
  if (orbitals_.empty()) throw Error(ErrorCode::invalid_argument, "a Slater state needs N >= 1 orbitals");
  for (const auto& o : orbitals_) require_same_grid(o.grid(), orbitals_.front().grid(), "Slater state");
  const double dev = gram_deviation(orbitals_);
  if (!(dev <= tol)) throw Error(ErrorCode::gram_violation, "Gram deviation " + std::to_string(dev));
}

std::vector<SpinOrbital> mix(std::span<const SpinOrbital> orbitals, const Eigen::MatrixXcd& m) {
  const Grid3& g = orbitals.front().grid();
  std::vector<SpinOrbital> out;
  out.reserve(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    SpinOrbital o(g);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (m(i, j) != cplx(0.0)) axpy(m(i, j), orbitals[i], o);
    out.push_back(std::move(o));
  }
  return out;
}

SlaterState orthonormalize(std::vector<SpinOrbital> orbitals) {
  if (orbitals.empty()) throw Error(ErrorCode::invalid_argument, "no orbitals to orthonormalize");
  const Eigen::MatrixXcd s = gram_matrix(orbitals);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(s);
  const Eigen::VectorXd ev = eig.eigenvalues();
  const double lo = ev.minCoeff(), hi = ev.maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12)
    throw Error(ErrorCode::dependent_orbitals, "Gram eigenvalues span [" + std::to_string(lo) + ", " +
                                                   std::to_string(hi) + "]");
  const Eigen::VectorXd inv_sqrt = ev.array().rsqrt();
  const Eigen::MatrixXcd x = eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().adjoint();
  return SlaterState(mix(orbitals, x));
}

RealField orbital_density(std::span<const SpinOrbital> orbitals) {
  RealField rho(orbitals.front().grid());
  const auto& k = simd::active();
  for (const auto& o : orbitals) {
    k.norm2_acc(o.up.data(), rho.data(), rho.size());
    k.norm2_acc(o.down.data(), rho.data(), rho.size());
  }
  return rho;
}

RealField density(const SlaterState& state) { return orbital_density(state.orbitals()); }

namespace {

double factorial(std::size_t n) {
  double f = 1.0;
  for (std::size_t i = 2; i <= n; ++i) f *= static_cast<double>(i);
  return f;
}

// values[i][j][s] = phi_j^s(x_i)
template <typename Sampler>
std::vector<cplx> determinant_amplitudes(std::size_t n, Sampler&& sample) {
  if (n > kOracleMaxElectrons)
    throw Error(ErrorCode::oracle_size_limit, "explicit determinants limited to N <= 6");
  std::vector<cplx> vals(n * n * 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (int s = 0; s < 2; ++s) vals[(i * n + j) * 2 + s] = sample(i, j, s);

  const std::size_t configs = std::size_t{1} << n;
  const double norm = 1.0 / std::sqrt(factorial(n));
  std::vector<cplx> out(configs);
  Eigen::MatrixXcd m(n, n);
  for (std::size_t c = 0; c < configs; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      const int s = static_cast<int>((c >> (n - 1 - i)) & 1u);
      for (std::size_t j = 0; j < n; ++j) m(i, j) = vals[(i * n + j) * 2 + s];
    }
    out[c] = m.determinant() * norm;
  }
  return out;
}

}  // namespace

std::vector<cplx> evaluate_determinant(const SlaterState& state, std::span<const std::size_t> points) {
  const std::size_t n = state.size();
  if (points.size() != n) throw Error(ErrorCode::invalid_argument, "need one position per electron");
  return determinant_amplitudes(n, [&](std::size_t i, std::size_t j, int s) {
    return state[j].component(s)[points[i]];
  });
}

std::vector<cplx> evaluate_determinant(const SlaterState& state, std::span<const Vec3> positions) {
  const std::size_t n = state.size();
  if (positions.size() != n) throw Error(ErrorCode::invalid_argument, "need one position per electron");
  if (n > kOracleMaxElectrons)
    throw Error(ErrorCode::oracle_size_limit, "explicit determinants limited to N <= 6");
  return determinant_amplitudes(n, [&](std::size_t i, std::size_t j, int s) {
    return interpolate(state[j].component(s), positions[i]);
  });
}

cplx interpolate(const ComplexField& f, const Vec3& x) {
  const Grid3& g = f.grid();
  std::vector<cplx> fh(f.size());
  Fft3::for_dims(g.dims()).forward(f.data(), fh.data());
  std::array<std::vector<cplx>, 3> phase;
  for (int a = 0; a < 3; ++a) {
    const int n = g.dim(a);
    const double shift = x[a] - g.coord(a, 0);
    phase[a].resize(n);
    for (int i = 0; i < n; ++i) {
      const double k = g.wavenumber(a, i);
      // Split the Nyquist bin symmetrically so real fields interpolate to real values.
      phase[a][i] = (n % 2 == 0 && i == n / 2) ? cplx(std::cos(k * shift), 0.0)
                                               : std::exp(cplx(0.0, k * shift));
    }
  }
  cplx sum = 0.0;
  for (int i = 0; i < g.dim(0); ++i)
    for (int j = 0; j < g.dim(1); ++j) {
      const cplx pij = phase[0][i] * phase[1][j];
      const std::size_t base = g.flat(i, j, 0);
      for (int l = 0; l < g.dim(2); ++l) sum += fh[base + l] * pij * phase[2][l];
    }
  return sum / static_cast<double>(f.size());
}

}  // namespace pekar
