#pragma once
// UV cutoff constants and the block-mode discretization of the phonon field.

#include <array>
#include <cstddef>
#include <vector>

#include "pekar/grid.hpp"

namespace pekar {

// M_Lambda = (int_{|k| <= Lambda} n^2 / (2 pi^2 |k|^2) dk)^{1/2} = n sqrt(2 Lambda / pi)
double head_constant_MLambda(int n, double Lambda);
// K_Lambda = (int_{|k| > Lambda} n / (2 pi^2 |k|^4) dk)^{1/2} = sqrt(2 n / (pi Lambda))
double tail_constant_KLambda(int n, double Lambda);

struct CutoffParams {
  double Lambda = 1.0;
  double P = 1.0;
  int n = 1;
  double alpha = 1.0;

  // 1 - 2 alpha n / (pi Lambda)
  double beta() const noexcept;
  // Rejects Lambda <= 2 alpha n / pi.
  void validate() const;
};

enum class RepresentativeRule {
  nearest_to_center,  // point of B(m) closest to the cube center m P
  clipped_center,     // m P scaled onto the ball; falls back to nearest_to_center outside the cube
};

using BlockIndex = std::array<int, 3>;

struct BlockMode {
  BlockIndex m{};
  Vec3 k{};
  double M = 0.0;  // (int_{B(m)} |k|^-2 dk)^{1/2}
};

struct BlockModeSet {
  double Lambda = 0.0;
  double P = 0.0;
  std::vector<BlockMode> entries;

  // sum_m M_m^2; equals 4 pi Lambda when the blocks partition the ball.
  double total_weight() const noexcept;
};

// B(m) = {k : |k| <= Lambda, |k_i - m_i P| <= P/2} is nonempty.
bool block_nonempty(const BlockIndex& m, double Lambda, double P);
// (2 Lambda / P + 1)^3
double block_count_bound(double Lambda, double P);

Vec3 representative_momentum(const BlockIndex& m, double Lambda, double P,
                             RepresentativeRule rule = RepresentativeRule::nearest_to_center);

// Throws empty_block when B(m) is empty.
double mode_weight(const BlockIndex& m, double Lambda, double P, double rel_tol = 1e-6);

BlockModeSet build_blocks(double Lambda, double P, RepresentativeRule rule = RepresentativeRule::nearest_to_center,
                          double rel_tol = 1e-6);

}  // namespace pekar
