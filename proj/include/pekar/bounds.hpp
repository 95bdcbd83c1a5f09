#pragma once
// Strong-coupling error budget with exact exponent arithmetic, the E <= C
// sandwich, binding gaps and the shifted-wedge subadditivity construction.

#include <boost/rational.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pekar/minimizer.hpp"
#include "pekar/pt_functional.hpp"

namespace pekar {

using Rational = boost::rational<long long>;

// R = N^-1 alpha^{-19/23}
inline const Rational kOptimalRExponent{-19, 23};

struct BudgetTerm {
  std::string label;
  double coefficient = 0.0;
  Rational alpha_exponent;    // explicit power of alpha
  Rational R_exponent;        // power of R
  std::string n_dependence;   // "N^2", "sum n_i^5", ...
  double n_factor = 0.0;      // numeric value of n_dependence
  double value = 0.0;         // coefficient * alpha^a * R^r * n_factor
  // alpha exponent once R = N^-1 alpha^{-19/23} is substituted
  Rational optimal_alpha_exponent() const { return alpha_exponent + R_exponent * kOptimalRExponent; }
};

struct ErrorBudget {
  int N = 0;
  double alpha = 0.0;
  double R = 0.0;
  double c_tilde = 1.0;
  std::vector<BudgetTerm> terms;
  double total = 0.0;
};

// Terms: splitting 8 alpha N^2 / (pi^2 R), localization 2 pi^2 N^2 / R^2,
// ball 3 R^2 alpha^{80/23} sum n_i^5, ball constant c~ alpha^{42/23} sum n_i^3.
// Throws repulsion_dominance for nu < 2.
ErrorBudget error_budget(int N, double alpha, double R, std::span<const int> occupancies, double c_tilde, double nu);
double optimal_R(int N, double alpha);
ErrorBudget error_budget_at_optimal_R(int N, double alpha, std::span<const int> occupancies, double c_tilde,
                                      double nu);

// c^ = 8/pi^2 + 3 + c~
double composed_constant(double c_tilde);
// c^ alpha^{42/23} N^3 + 2 pi^2 alpha^{38/23} N^4
double three_term_bound(int N, double alpha, double c_tilde);

struct Sandwich {
  double lower = 0.0;
  double upper = 0.0;           // alpha^2 C
  double relative_width = 0.0;  // c alpha^{-4/23} N^4 / |C|
};

// alpha^2 C - c alpha^{42/23} N^4
Sandwich lower_bound(int N, double alpha, double C_N1, double c);

// min_{1 <= k <= N-1} (C_k + C_{N-k}) - C_N with C_0 = 0.
// Throws missing_entries for absent or non-finite values and N < 2.
double binding_gap(std::span<const std::optional<double>> C_values);
double binding_gap(std::span<const double> C_values);

struct BindingRow {
  double nu = 0.0;
  std::vector<std::optional<double>> C;  // index k = 0..N
  std::optional<double> gap;
  std::vector<std::string> notes;
};

struct BindingReport {
  int N = 0;
  double alpha = 1.0;
  std::vector<BindingRow> rows;
  static constexpr const char* kLabel = "upper-bound binding evidence";
};

// For each nu: C_k = determinant minimum of the unit-coupling functional with U = nu
// for k = 1..N, each k warm-started from the k-1 state. Failures are recorded per row.
BindingReport binding_scan(int N, std::span<const double> nus, const PTParams& base, const Grid3& grid,
                           const MinimizerConfig& cfg);

// ---- shifted-wedge subadditivity ----

// Multiply every orbital by a smooth radial cutoff (1 below 0.8 r, 0 beyond r)
// around the grid origin and re-orthonormalize.
SlaterState truncate_support(const SlaterState& s, double radius);

// Copy a state onto a larger grid with the same spacing, moving the source
// origin to big-grid offset (in points).
SlaterState embed_state(const SlaterState& s, const Grid3& big, const Index3& offset);

// int int rho_m(x - d) rho_n(y) / |x - y| for densities on the same grid with
// disjoint shifted supports (|d| larger than both support radii combined).
class CrossCoulomb {
 public:
  CrossCoulomb(const RealField& rho_m, const RealField& rho_n);
  double operator()(const Vec3& d) const;

 private:
  double spacing_;
  double total_ = 0.0;
  std::vector<Vec3> points_;
  std::vector<double> weights_;
};

struct SubadditivityPoint {
  double d = 0.0;
  double lhs = 0.0;         // energy of the combined (m+n)-orbital determinant
  double C_m = 0.0;
  double C_n = 0.0;
  double cross_term = 0.0;  // (U - 2 alpha) int int rho_m rho_n / |x - y|
  bool holds = false;       // lhs <= C_m + C_n + cross_term + tolerance
};

struct SubadditivityConfig {
  double support_radius = 0.0;     // both states vanish beyond this radius around their centroids
  double leak_tolerance = 1e-8;    // mass allowed outside the support sphere
  double tolerance = 1e-8;         // relative slack for the inequality
};

// Place state_m shifted by shift_points grid points along x and state_n at
// the origin of the big grid p lives on; evaluate the wedge energy.
SubadditivityPoint subadditivity_demo(const SlaterState& state_m, const SlaterState& state_n, int shift_points,
                                      const Grid3& big, const PTParams& p, const SubadditivityConfig& cfg);

struct InverseFit {
  double limit = 0.0;  // E_inf in E(d) = E_inf + a / d
  double a = 0.0;
};

// Roll the state by whole grid points so its density centroid sits within
// half a spacing of the grid origin.
SlaterState recenter_state(const SlaterState& s);

struct SubadditivityStudy {
  double reference = 0.0;  // C_m + C_n of the untruncated minimizers
  std::vector<SubadditivityPoint> points;
  std::vector<double> cross_distances;
  std::vector<double> cross_values;  // (U - 2 alpha) int int rho_m rho_n / |x - y| at each distance
  double cross_slope = 0.0;          // log-log slope of |cross| against d
  InverseFit fit;                    // lhs(d) = limit + a / d over the wedge points
  double limit_gap = 0.0;            // |fit.limit - reference| / |reference|
  bool all_hold = false;
};

SubadditivityStudy subadditivity_study(const SlaterState& state_m, const SlaterState& state_n, double reference,
                                       std::span<const int> shift_points, std::span<const double> cross_distances,
                                       const Grid3& big, const PTParams& p, const SubadditivityConfig& cfg);

// Least-squares slope of log|y| against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

InverseFit fit_inverse_distance(std::span<const double> d, std::span<const double> e);

}  // namespace pekar
