#pragma once
// Exact diagonalization of the single-electron block-mode Hamiltonian
//
//   H = h (x) 1 + (1 - delta) N + sum_m g_m (e^{i k_m x} a_m + e^{-i k_m x} a_m^dag),
//   g_m = sqrt(alpha) M_m / (sqrt(2) pi),
//
// on (finite electron space) (x) (bosonic Fock space truncated at total
// phonon number n_max). Electron states are plain l2 coefficient vectors.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pekar/grid.hpp"
#include "pekar/minimizer.hpp"
#include "pekar/phonon_blocks.hpp"

namespace pekar {

class ElectronSpace {
 public:
  using Apply = std::function<void(const cplx* in, cplx* out)>;

  ElectronSpace(std::vector<Vec3> sites, Apply h);

  std::size_t size() const noexcept { return sites_.size(); }
  const Vec3& site(std::size_t i) const noexcept { return sites_[i]; }
  std::span<const Vec3> sites() const noexcept { return sites_; }
  void apply(const cplx* in, cplx* out) const { h_(in, out); }

 private:
  std::vector<Vec3> sites_;
  Apply h_;
};

// h = beta D_A^dag D_A + V on a periodic grid (spectral derivatives).
ElectronSpace grid_electron(const Grid3& grid, double beta, std::optional<RealField> V = std::nullopt,
                            std::optional<VectorPotentialField> A = std::nullopt);
// Periodic 1-D chain along x: h = beta (2 psi_i - psi_{i-1} - psi_{i+1}) / s^2 + V_i.
ElectronSpace chain_electron(int sites, double spacing, double beta, std::vector<double> V = {});
// A single site at the origin with on-site energy e0.
ElectronSpace frozen_electron(double e0 = 0.0);

struct FockMode {
  Vec3 k{};
  double M = 0.0;
};

// The first max_modes blocks by decreasing weight (ties keep enumeration order).
std::vector<FockMode> modes_from_blocks(const BlockModeSet& blocks, std::size_t max_modes);

// Occupation vectors with sum <= n_max in lexicographic order.
class TruncatedFock {
 public:
  TruncatedFock(std::size_t modes, int n_max);

  std::size_t modes() const noexcept { return modes_; }
  int n_max() const noexcept { return n_max_; }
  std::size_t size() const noexcept { return size_; }
  std::span<const std::uint8_t> occupation(std::size_t state) const noexcept {
    return {occ_.data() + state * modes_, modes_};
  }
  std::size_t rank(std::span<const std::uint8_t> occupation) const;

  struct Lowering {
    std::uint32_t mode;
    std::uint32_t target;
    double amplitude;  // sqrt(n_mode)
  };
  std::span<const Lowering> lowerings(std::size_t state) const noexcept {
    return {lower_.data() + lower_offset_[state], lower_offset_[state + 1] - lower_offset_[state]};
  }

 private:
  std::size_t count(std::size_t remaining_modes, int budget) const noexcept;

  std::size_t modes_;
  int n_max_;
  std::size_t size_ = 0;
  std::vector<std::vector<std::size_t>> binom_;  // binom_[r][b] = C(r + b, b)
  std::vector<std::uint8_t> occ_;
  std::vector<Lowering> lower_;
  std::vector<std::size_t> lower_offset_;
};

// C(modes + n_max, n_max); throws dimension_overflow past 2^63.
std::size_t fock_basis_size(std::size_t modes, int n_max);

struct BlockHamiltonianSpec {
  const ElectronSpace* electron = nullptr;
  std::vector<FockMode> modes;
  double alpha = 1.0;
  double delta = 0.1;

  void validate() const;
  double coupling(std::size_t m) const;  // g_m
};

inline constexpr std::size_t kMaxOracleDimension = 1'000'000;

class BlockHamiltonian {
 public:
  BlockHamiltonian(const BlockHamiltonianSpec& spec, int n_max);

  std::size_t dimension() const noexcept { return electron_->size() * fock_.size(); }
  const TruncatedFock& fock() const noexcept { return fock_; }
  // Index layout: fock_state * electron_size + site.
  void apply(const cplx* in, cplx* out) const;

 private:
  const ElectronSpace* electron_;
  TruncatedFock fock_;
  double omega_;
  std::vector<double> g_;
  std::vector<std::vector<cplx>> phase_;  // phase_[m][site] = e^{i k_m x}
};

struct EigenResult {
  double value = 0.0;
  std::vector<cplx> vector;
  double residual = 0.0;
  int restarts = 0;
  std::size_t dimension = 0;
};

// Lowest eigenpair of a Hermitian operator by restarted Lanczos with full
// reorthogonalization. Converged when ||H x - theta x|| <= tol.
EigenResult lowest_eigenpair(std::size_t dim, const std::function<void(const cplx*, cplx*)>& apply, double tol,
                             int max_restarts = 200, std::uint64_t seed = 7);

EigenResult electron_ground_state(const ElectronSpace& e, double tol = 1e-10);
EigenResult ground_energy(const BlockHamiltonianSpec& spec, int n_max, double tol = 1e-9);

// <psi|h|psi> - alpha / (2 pi^2 (1 - delta)) sum_m M_m^2 |<psi| e^{-i k_m x} |psi>|^2
double coherent_bound(std::span<const cplx> psi, const BlockHamiltonianSpec& spec);

// -alpha M^2 / (2 pi^2 (1 - delta)) for the frozen electron and one mode.
double displaced_oscillator_energy(double alpha, double M, double delta);

// Coherent-state energy of a one-electron grid orbital, for the minimizer:
//   beta <D_A phi, D_A phi> + <phi, V phi> - alpha/(2 pi^2 (1-delta)) sum_m M_m^2 |int |phi|^2 e^{-i k_m x}|^2.
class CoherentModel final : public EnergyModel {
 public:
  CoherentModel(double beta, double alpha, double delta, std::vector<FockMode> modes,
                std::optional<RealField> V = std::nullopt, std::optional<VectorPotentialField> A = std::nullopt);
  double energy(std::span<const SpinOrbital> orbitals) const override;
  double energy_and_fock(std::span<const SpinOrbital> orbitals, std::vector<SpinOrbital>& fock) const override;

 private:
  double evaluate(std::span<const SpinOrbital> orbitals, std::vector<SpinOrbital>* fock) const;

  double beta_, alpha_, delta_;
  std::vector<FockMode> modes_;
  std::optional<RealField> V_;
  std::optional<VectorPotentialField> A_;
};

// beta * (alpha / ((1 - delta) beta))^2 * C11, the continuum limit of the
// minimized coherent bound.
double coherent_pt_reference(double alpha, double beta, double delta, double C11);

}  // namespace pekar
