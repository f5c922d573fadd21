#include "faqtor/bandit.hpp"

#include <cmath>
#include <stdexcept>

namespace faqtor {

StandardizeResult standardize(const Eigen::Vector4d& rewards) {
  if (!rewards.allFinite())
    throw std::invalid_argument("standardize: non-finite rewards");
  double r00 = rewards[0], r01 = rewards[1], r10 = rewards[2], r11 = rewards[3];
  StandardizeResult out;

  // Degenerate when one sub-action never changes the reward.
  if ((r00 == r10 && r01 == r11) || (r00 == r01 && r10 == r11)) {
    out.degenerate = true;
    return out;
  }
  // Make R00 != R10, swapping down/up if needed.
  if (r00 == r10) {
    out.swapped_y = true;
    std::swap(r00, r01);
    std::swap(r10, r11);
  }
  // Make R00 < R10, swapping left/right if needed.
  if (r00 > r10) {
    out.swapped_x = true;
    std::swap(r00, r10);
    std::swap(r01, r11);
  }
  // Shift R00 to zero, then scale R10 to one.
  out.shift = r00;
  r01 -= r00;
  r10 -= r00;
  r11 -= r00;
  r00 = 0.0;
  out.scale = r10;
  r01 /= out.scale;
  r11 /= out.scale;
  r10 = 1.0;
  out.alpha = r01;
  out.beta = r11 - r10 - r01;
  return out;
}

Eigen::Vector4d ovb_qhat(double alpha, double beta) {
  Eigen::Vector4d q;
  q << -beta / 4.0, alpha + beta / 4.0, 1.0 + beta / 4.0,
      1.0 + alpha + 3.0 * beta / 4.0;
  return q;
}

double rmse(const Eigen::Vector4d& q_true, const Eigen::Vector4d& q_hat) {
  return std::sqrt((q_true - q_hat).squaredNorm() / 4.0);
}

double suboptimality(const Eigen::Vector4d& q_true,
                     const Eigen::Vector4d& q_hat) {
  int pick = 0;
  for (int a = 1; a < 4; ++a)
    if (q_hat[a] > q_hat[pick]) pick = a;
  return q_true.maxCoeff() - q_true[pick];
}

HeatmapGrid heatmap_sweep(double alpha_min, double alpha_max, double beta_min,
                          double beta_max, int steps_per_axis) {
  if (steps_per_axis < 2)
    throw std::invalid_argument("heatmap_sweep: need at least 2 steps per "
                                "axis");
  HeatmapGrid grid;
  grid.alpha_steps = steps_per_axis;
  grid.beta_steps = steps_per_axis;
  grid.cells.reserve(static_cast<std::size_t>(steps_per_axis) *
                     steps_per_axis);
  const double a_range = alpha_max - alpha_min;
  const double b_range = beta_max - beta_min;
  for (int i = 0; i < steps_per_axis; ++i) {
    const double alpha = alpha_min + (i * a_range) / (steps_per_axis - 1);
    for (int j = 0; j < steps_per_axis; ++j) {
      const double beta = beta_min + (j * b_range) / (steps_per_axis - 1);
      Eigen::Vector4d q_true;
      q_true << 0.0, alpha, 1.0, 1.0 + alpha + beta;
      const Eigen::Vector4d q_hat = ovb_qhat(alpha, beta);
      grid.cells.push_back(
          {alpha, beta, rmse(q_true, q_hat), suboptimality(q_true, q_hat)});
    }
  }
  return grid;
}

}  // namespace faqtor
