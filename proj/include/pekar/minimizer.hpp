#pragma once
// Orthonormality-constrained descent over Slater determinants.
//
// Each iteration takes a (optionally kinetically preconditioned) step along the
// tangent-projected gradient and retracts onto the Stiefel manifold by Loewdin
// orthonormalization. Backtracking enforces an Armijo decrease, so the energy
// never increases across accepted steps. The result is an upper bound on the
// determinant infimum; for N >= 2 it is only an upper bound on the full
// antisymmetric infimum.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pekar/pt_functional.hpp"
#include "pekar/slater.hpp"

namespace pekar {

// Any smooth energy of an orbital list whose first variation is
// dE = 2 Re sum_i <F_i, h_i>.
class EnergyModel {
 public:
  virtual ~EnergyModel() = default;
  virtual double energy(std::span<const SpinOrbital> orbitals) const = 0;
  virtual double energy_and_fock(std::span<const SpinOrbital> orbitals, std::vector<SpinOrbital>& fock) const = 0;
};

class PTModel final : public EnergyModel {
 public:
  explicit PTModel(PTParams p) : params_(std::move(p)) {}
  const PTParams& params() const noexcept { return params_; }
  double energy(std::span<const SpinOrbital> orbitals) const override;
  double energy_and_fock(std::span<const SpinOrbital> orbitals, std::vector<SpinOrbital>& fock) const override;

 private:
  PTParams params_;
};

enum class StepRule { fixed, backtracking };
enum class InitStrategy { random_gaussians, stacked_center, perturbed_previous };

struct MinimizerConfig {
  int max_iters = 2000;
  double grad_tol = 1e-5;
  StepRule step_rule = StepRule::backtracking;
  double initial_step = 1.0;  // first trial step (fixed rule: the step)
  double max_step = 8.0;
  double armijo = 1e-4;
  double shrink = 0.5;
  double grow = 1.5;
  int restarts = 1;
  std::uint64_t seed = 1;
  InitStrategy init = InitStrategy::random_gaussians;
  std::shared_ptr<const SlaterState> previous;  // for perturbed_previous
  double perturbation = 0.05;
  // Precondition with (shift + |k|^2)^-1; plain projected gradient otherwise.
  bool precondition = true;
  double precondition_shift = 1.0;
  bool record_trace = false;
  int threads = 1;
  // Mass fraction allowed in the outer 10% shell of the box.
  double leak_tolerance = 1e-6;

  void validate() const;
};

struct TraceRow {
  int iter = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

struct MinimizeResult {
  explicit MinimizeResult(SlaterState s) : state(std::move(s)) {}

  double energy = 0.0;
  EnergyBreakdown breakdown;
  SlaterState state;
  int iterations = 0;
  double final_grad_norm = 0.0;
  bool converged = false;
  std::uint64_t seed = 0;  // seed of the winning restart
  double shell_mass = 0.0;
  std::vector<std::string> warnings;
  std::vector<TraceRow> trace;
};

SlaterState initial_state(int n, const Grid3& grid, std::uint64_t seed, InitStrategy strategy,
                          const SlaterState* previous = nullptr, double perturbation = 0.05);

// Fraction of density mass with max_a |x_a| / (L_a / 2) > 0.9.
double outer_shell_mass(const RealField& rho);

// One descent from a given start.
MinimizeResult descend(const EnergyModel& model, SlaterState start, const MinimizerConfig& cfg);

// Best of cfg.restarts descents; ties within 1e-12 go to the lowest seed.
MinimizeResult minimize(int n, const EnergyModel& model, const Grid3& grid, const MinimizerConfig& cfg);

MinimizeResult minimize_pt(int n, const PTParams& p, const Grid3& grid, const MinimizerConfig& cfg);

}  // namespace pekar
