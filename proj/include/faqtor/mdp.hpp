#pragma once

#include <Eigen/Core>
#include <vector>

#include "faqtor/action_space.hpp"

namespace faqtor {

// One transition distribution p(. | s, a), stored sparsely.
struct SparseRow {
  std::vector<int> idx;
  std::vector<double> p;
};

// Finite MDP over a factored action space.  Transition rows are validated
// to sum to 1 within 1e-12 with no negative mass; immutable once built.
class TabularMdp {
 public:
  TabularMdp(int n_states, FactoredActionSpace actions,
             std::vector<SparseRow> transition_rows, Eigen::MatrixXd reward,
             double gamma, Eigen::VectorXd initial_dist);

  // Dense [s][a][s'] convenience constructor for small MDPs.
  static TabularMdp from_dense(
      const std::vector<std::vector<std::vector<double>>>& transition,
      FactoredActionSpace actions, Eigen::MatrixXd reward, double gamma,
      Eigen::VectorXd initial_dist);

  int n_states() const { return n_states_; }
  int n_actions() const { return actions_.total(); }
  const FactoredActionSpace& actions() const { return actions_; }
  double gamma() const { return gamma_; }
  const Eigen::MatrixXd& reward() const { return reward_; }
  const Eigen::VectorXd& initial_dist() const { return initial_dist_; }

  const SparseRow& row(int s, int a) const {
    return rows_[static_cast<std::size_t>(s) * n_actions() + a];
  }
  double transition_prob(int s, int a, int s_next) const;
  Eigen::VectorXd dense_row(int s, int a) const;

  // States where every action self-loops with probability 1 and zero reward.
  std::vector<bool> absorbing_zero_reward_states() const;

 private:
  int n_states_;
  FactoredActionSpace actions_;
  std::vector<SparseRow> rows_;
  Eigen::MatrixXd reward_;
  double gamma_;
  Eigen::VectorXd initial_dist_;
};

// Stochastic policy table; rows sum to 1 within 1e-12.
class Policy {
 public:
  Policy(Eigen::MatrixXd probs, bool deterministic);

  // One action per state.
  static Policy deterministic_from(const std::vector<int>& actions,
                                   int n_actions);
  static Policy uniform(int n_states, int n_actions);

  const Eigen::MatrixXd& probs() const { return probs_; }
  bool deterministic() const { return deterministic_; }
  int n_states() const { return static_cast<int>(probs_.rows()); }
  int n_actions() const { return static_cast<int>(probs_.cols()); }

  // Lowest-index argmax of the row (the action for deterministic policies).
  int action_at(int s) const;

 private:
  Eigen::MatrixXd probs_;
  bool deterministic_;
};

// Q(s, a) table plus the discount it was produced under.
struct QTable {
  Eigen::MatrixXd values;
  double gamma = 0.0;

  // Policy-weighted row sum V(s) = sum_a pi(a|s) Q(s, a).
  Eigen::VectorXd state_values(const Policy& pi) const;
};

}  // namespace faqtor
