#pragma once
// Localization machinery: a smooth cutoff approximating the Dirichlet ground
// mode of a ball, permanent-based localization weights, the kinetic leakage
// F_j and greedy ball merging.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pekar/grid.hpp"

namespace pekar {

// chi(r) = c * sin(pi r / R) / r * s(r), with s a C-infinity step equal to 1
// on [0, 0.9 R] and 0 at R, normalized so that int chi^2 d^3x = 1.
class CutoffProfile {
 public:
  static constexpr int kDefaultResolution = 4000;
  static constexpr double kStepStart = 0.9;

  CutoffProfile(double R, int resolution = kDefaultResolution);

  double radius() const noexcept { return R_; }
  int resolution() const noexcept { return static_cast<int>(r_.size()) - 1; }
  // int |grad chi|^2 d^3x
  double dirichlet_energy() const noexcept { return dirichlet_energy_; }
  double normalization() const noexcept { return c_; }

  double value(double r) const noexcept;
  double derivative(double r) const noexcept;  // d chi / dr
  // Radial samples on [0, R].
  std::span<const double> radii() const noexcept { return r_; }
  std::span<const double> samples() const noexcept { return chi_; }

  // O(d) = int chi(y) chi(y - e d) dy for a unit vector e.
  double overlap(double d) const;
  double overlap_derivative(double d) const;

  // Radius whose radial mass fraction 4 pi int_0^r chi^2 s^2 ds equals u;
  // g selects the density chi^2 (false) or |chi'|^2 / E (true).
  double sample_radius(double u, bool gradient_density) const;

 private:
  double raw(double r) const noexcept;
  double raw_derivative(double r) const noexcept;
  double q_at(double s) const noexcept;

  double R_;
  double c_ = 1.0;
  double dirichlet_energy_ = 0.0;
  std::vector<double> r_, chi_;
  std::vector<double> q_;         // int_0^r s chi(s) ds
  std::vector<double> cdf_chi2_;  // radial CDF of chi^2
  std::vector<double> cdf_grad_;  // radial CDF of |chi'|^2
};

// Throws profile_budget when the quadrature at this resolution cannot certify
// dirichlet_energy <= 1.5 pi^2 / R^2.
CutoffProfile make_cutoff(double R, int resolution = CutoffProfile::kDefaultResolution);

// pi^2 / R^2, the lowest Dirichlet eigenvalue of the ball of radius R.
double dirichlet_ground_energy(double R);

inline constexpr int kMaxPermanentSize = 20;

// Ryser's formula with Gray-code updates. Throws size_limit for n > 20.
double permanent(const Eigen::MatrixXd& m);

// Permanents of all (i, j) minors: out(i, j) = Per(m without row i, column j).
Eigen::MatrixXd permanent_minors(const Eigen::MatrixXd& m);

inline constexpr int kMaxWeightElectrons = 12;
inline constexpr int kMaxLeakageElectrons = 6;

struct WeightParts {
  double G = 0.0;  // Per[chi(x_i - y_j)]
  double P = 0.0;  // N! Per[M], M_ij = O(|x_i - x_j|)
  double W = 0.0;  // G / sqrt(P)
};

Eigen::MatrixXd overlap_matrix(std::span<const Vec3> X, const CutoffProfile& chi);
WeightParts localization_weight(std::span<const Vec3> X, std::span<const Vec3> Y, const CutoffProfile& chi);

struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  bool flagged = false;  // relative error above 10%
};

// int W(X, Y)^2 dY, importance-sampled from Per[chi^2(x_i - y_j)] / N! mixed
// with one component per overlapping pair (a, b), in which the two partners of
// a and b are uniform on the lens B_R(x_a) and B_R(x_b). Without those the
// exchange terms of nearly tangent pairs, of size O(d)^2, are never sampled.
inline constexpr double kPairProposalShare = 0.02;
MCEstimate weight_norm_mc(std::span<const Vec3> X, const CutoffProfile& chi, std::uint64_t samples,
                          std::uint64_t seed);

struct LeakageEstimate {
  MCEstimate upper;      // int |grad_j G|^2 / P dY
  double grad_P_term = 0.0;  // |grad_j P|^2 / (4 P^2)
  double exact() const noexcept { return upper.mean - grad_P_term; }
};

// F_j(X) = int |grad_{x_j}[G(X, Y) P(X)^{-1/2}]|^2 dY for j = 0..N-1.
std::vector<LeakageEstimate> estimate_Fj(std::span<const Vec3> X, const CutoffProfile& chi,
                                         std::uint64_t samples, std::uint64_t seed);

struct Ball {
  Vec3 center{};
  int occupancy = 0;
  double radius = 0.0;
  std::vector<int> members;  // indices of the input centers
};

struct MergeEvent {
  int step = 0;
  Vec3 center_a{}, center_b{};
  int occupancy_a = 0, occupancy_b = 0;
  Vec3 merged_center{};
  double merged_radius = 0.0;
};

struct BallCluster {
  double R = 0.0;
  std::vector<Ball> balls;
  std::vector<MergeEvent> trace;

  int total_occupancy() const noexcept;
  // Checks R_i = (3 n_i - 1) R / 2 and pairwise gaps >= R at tolerance 1e-12 R.
  bool satisfies_invariants() const;
};

double ball_distance(const Ball& a, const Ball& b);

// Insert B_R(y_j) one at a time; merge the closest violating pair first.
BallCluster merge_balls(std::span<const Vec3> Y, double R);

// 2 pi^2 N^2 / R^2
double localization_error(int N, double R);

}  // namespace pekar
