#pragma once
// Pekar-Tomasevich energy of a Slater determinant,
//
//   P(psi) = sum_j <D_A phi_j, D_A phi_j> + sum_j <phi_j, V phi_j>
//            + U * sum_{i<j} [direct(i,j) - exchange(i,j)] - alpha * D(rho),
//
// with D_A = -i grad + A, D(rho) = int int rho(x) rho(y) / |x-y|, kinetic
// energy |grad psi|^2 (2m = 1) and no factor 1/2 on the self-interaction.

#include <optional>
#include <span>
#include <vector>

#include "pekar/grid.hpp"
#include "pekar/slater.hpp"

namespace pekar {

struct PTParams {
  double alpha = 1.0;
  double U = 0.0;
  // Absent fields mean A = 0 and V = 0.
  std::optional<VectorPotentialField> A;
  std::optional<RealField> V;

  void validate(const Grid3& grid) const;
};

struct EnergyBreakdown {
  double kinetic = 0.0;
  double external = 0.0;
  double coulomb_direct = 0.0;    // U * sum_{i<j} direct(i,j)
  double coulomb_exchange = 0.0;  // U * sum_{i<j} exchange(i,j)
  double self_interaction = 0.0;  // -alpha * D(rho)
  double total = 0.0;
};

// Throws grid_mismatch / gram_violation.
EnergyBreakdown pt_energy(const SlaterState& state, const PTParams& p);

// The same formula on an arbitrary orbital list (no orthonormality check).
EnergyBreakdown evaluate_energy(std::span<const SpinOrbital> orbitals, const PTParams& p);

struct EnergyAndGradient {
  EnergyBreakdown energy;
  // F phi_i, not projected.
  std::vector<SpinOrbital> fock;
};

// F phi_i = D_A^dag D_A phi_i + V phi_i + U (J - K) phi_i - 2 alpha (rho * 1/|x|) phi_i.
// For any perturbation h: dE = 2 Re sum_i <F phi_i, h_i>.
EnergyAndGradient evaluate_energy_and_fock(std::span<const SpinOrbital> orbitals, const PTParams& p);

// Project each F phi_i onto the orthogonal complement of span{phi_j}.
std::vector<SpinOrbital> project_tangent(std::span<const SpinOrbital> orbitals, std::vector<SpinOrbital> g);

// Tangent-projected gradient of pt_energy.
std::vector<SpinOrbital> pt_gradient(const SlaterState& state, const PTParams& p);

// psi_lambda(x) = lambda^{3N/2} psi(lambda x), realized on the dilated grid.
SlaterState rescale_state(const SlaterState& state, double lambda);

// (alpha, U, A, V) -> (lambda alpha, lambda U, lambda A(lambda x), lambda^2 V(lambda x)),
// sampled on the dilated grid. pt_energy(rescale_state(psi, l), rescale_params(p, l))
// equals l^2 * pt_energy(psi, p).
PTParams rescale_params(const PTParams& p, const Grid3& grid, double lambda);

// D_A^dag D_A c (A may be null) and <D_A c, D_A c>.
ComplexField kinetic_action(const ComplexField& c, const VectorPotentialField* A);
double kinetic_energy(const ComplexField& c, const VectorPotentialField* A);

// Field generators.
VectorPotentialField linear_vector_potential(const Grid3& grid, const Vec3& B);  // A = B x r / 2
RealField periodic_potential(const Grid3& grid, double amplitude, const Vec3& period);

}  // namespace pekar
