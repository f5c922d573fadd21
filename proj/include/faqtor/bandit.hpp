#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

namespace faqtor {

// Two-dimensional bandit with arms indexed (a_x, a_y) -> 2 a_x + a_y, i.e.
// rewards = [R00, R01, R10, R11].

// Record of the reduction to the standard form [0, alpha, 1, 1+alpha+beta].
// Swaps relabel sub-actions; shift and scale are value-affine and preserve
// argmax ordering (scale > 0).
struct StandardizeResult {
  bool degenerate = false;  // one axis never changes the reward
  double alpha = 0.0;
  double beta = 0.0;
  bool swapped_x = false;
  bool swapped_y = false;
  double shift = 0.0;  // subtracted from every reward
  double scale = 1.0;  // divided out after the shift

  // Arm index in the standardized problem -> arm index in the original.
  int arm_to_original(int arm) const {
    int ax = arm / 2, ay = arm % 2;
    if (swapped_x) ax ^= 1;
    if (swapped_y) ay ^= 1;
    return 2 * ax + ay;
  }
};

StandardizeResult standardize(const Eigen::Vector4d& rewards);

// Closed-form factored fit of [0, alpha, 1, 1+alpha+beta]:
// [-b/4, a+b/4, 1+b/4, 1+a+3b/4].
Eigen::Vector4d ovb_qhat(double alpha, double beta);

double rmse(const Eigen::Vector4d& q_true, const Eigen::Vector4d& q_hat);

// max_a Q*(a) - Q*(argmax_a Qhat(a)); argmax ties break to the lowest arm.
double suboptimality(const Eigen::Vector4d& q_true,
                     const Eigen::Vector4d& q_hat);

struct HeatmapCell {
  double alpha = 0.0;
  double beta = 0.0;
  double rmse = 0.0;
  double suboptimality = 0.0;
};

struct HeatmapGrid {
  int alpha_steps = 0;
  int beta_steps = 0;
  std::vector<HeatmapCell> cells;  // row-major, alpha outer, beta inner
};

// Grid endpoints are hit exactly: point i is min + (i * (max - min)) / (n-1).
HeatmapGrid heatmap_sweep(double alpha_min, double alpha_max, double beta_min,
                          double beta_max, int steps_per_axis);

}  // namespace faqtor
