#include "faqtor/mdp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace faqtor {

namespace {
constexpr double kStochasticTol = 1e-12;
}

TabularMdp::TabularMdp(int n_states, FactoredActionSpace actions,
                       std::vector<SparseRow> transition_rows,
                       Eigen::MatrixXd reward, double gamma,
                       Eigen::VectorXd initial_dist)
    : n_states_(n_states),
      actions_(std::move(actions)),
      rows_(std::move(transition_rows)),
      reward_(std::move(reward)),
      gamma_(gamma),
      initial_dist_(std::move(initial_dist)) {
  if (n_states_ <= 0) throw std::invalid_argument("n_states must be positive");
  const int A = actions_.total();
  if (static_cast<int>(rows_.size()) != n_states_ * A)
    throw std::invalid_argument("transition row count mismatch");
  if (reward_.rows() != n_states_ || reward_.cols() != A)
    throw std::invalid_argument("reward table shape mismatch");
  if (!reward_.allFinite())
    throw std::invalid_argument("reward entries must be finite");
  if (gamma_ < 0.0 || gamma_ > 1.0)
    throw std::invalid_argument("gamma must lie in [0, 1]");
  if (initial_dist_.size() != n_states_)
    throw std::invalid_argument("initial distribution length mismatch");
  double mu_sum = 0.0;
  for (int s = 0; s < n_states_; ++s) {
    if (initial_dist_[s] < 0.0)
      throw std::invalid_argument("initial distribution has negative mass");
    mu_sum += initial_dist_[s];
  }
  if (std::abs(mu_sum - 1.0) > kStochasticTol)
    throw std::invalid_argument("initial distribution sums to " +
                                std::to_string(mu_sum));
  for (int s = 0; s < n_states_; ++s) {
    for (int a = 0; a < A; ++a) {
      const SparseRow& r = rows_[static_cast<std::size_t>(s) * A + a];
      if (r.idx.size() != r.p.size())
        throw std::invalid_argument("malformed transition row");
      double sum = 0.0;
      for (std::size_t k = 0; k < r.idx.size(); ++k) {
        if (r.idx[k] < 0 || r.idx[k] >= n_states_)
          throw std::invalid_argument("transition row targets state " +
                                      std::to_string(r.idx[k]));
        if (r.p[k] < 0.0)
          throw std::invalid_argument("negative transition probability at (" +
                                      std::to_string(s) + ", " +
                                      std::to_string(a) + ")");
        sum += r.p[k];
      }
      if (std::abs(sum - 1.0) > kStochasticTol)
        throw std::invalid_argument(
            "transition row (" + std::to_string(s) + ", " + std::to_string(a) +
            ") sums to " + std::to_string(sum));
    }
  }
}

TabularMdp TabularMdp::from_dense(
    const std::vector<std::vector<std::vector<double>>>& transition,
    FactoredActionSpace actions, Eigen::MatrixXd reward, double gamma,
    Eigen::VectorXd initial_dist) {
  const int S = static_cast<int>(transition.size());
  const int A = actions.total();
  std::vector<SparseRow> rows;
  rows.reserve(static_cast<std::size_t>(S) * A);
  for (int s = 0; s < S; ++s) {
    if (static_cast<int>(transition[s].size()) != A)
      throw std::invalid_argument("dense transition: action count mismatch");
    for (int a = 0; a < A; ++a) {
      SparseRow r;
      const auto& dense = transition[s][a];
      for (std::size_t s2 = 0; s2 < dense.size(); ++s2) {
        if (dense[s2] != 0.0) {
          r.idx.push_back(static_cast<int>(s2));
          r.p.push_back(dense[s2]);
        }
      }
      rows.push_back(std::move(r));
    }
  }
  return TabularMdp(S, std::move(actions), std::move(rows), std::move(reward),
                    gamma, std::move(initial_dist));
}

double TabularMdp::transition_prob(int s, int a, int s_next) const {
  const SparseRow& r = row(s, a);
  for (std::size_t k = 0; k < r.idx.size(); ++k)
    if (r.idx[k] == s_next) return r.p[k];
  return 0.0;
}

Eigen::VectorXd TabularMdp::dense_row(int s, int a) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_states_);
  const SparseRow& r = row(s, a);
  for (std::size_t k = 0; k < r.idx.size(); ++k) out[r.idx[k]] += r.p[k];
  return out;
}

std::vector<bool> TabularMdp::absorbing_zero_reward_states() const {
  std::vector<bool> out(n_states_, false);
  const int A = n_actions();
  for (int s = 0; s < n_states_; ++s) {
    bool absorbing = true;
    for (int a = 0; a < A && absorbing; ++a) {
      if (reward_(s, a) != 0.0) absorbing = false;
      const SparseRow& r = row(s, a);
      double self = 0.0;
      for (std::size_t k = 0; k < r.idx.size(); ++k)
        if (r.idx[k] == s) self += r.p[k];
      if (std::abs(self - 1.0) > kStochasticTol) absorbing = false;
    }
    out[s] = absorbing;
  }
  return out;
}

Policy::Policy(Eigen::MatrixXd probs, bool deterministic)
    : probs_(std::move(probs)), deterministic_(deterministic) {
  for (int s = 0; s < probs_.rows(); ++s) {
    double sum = 0.0;
    int ones = 0;
    for (int a = 0; a < probs_.cols(); ++a) {
      double v = probs_(s, a);
      if (v < 0.0 || v > 1.0)
        throw std::invalid_argument("policy probability out of [0, 1]");
      if (v == 1.0) ++ones;
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("policy row " + std::to_string(s) +
                                  " sums to " + std::to_string(sum));
    if (deterministic_ && ones != 1)
      throw std::invalid_argument("deterministic policy row " +
                                  std::to_string(s) + " is not one-hot");
  }
}

Policy Policy::deterministic_from(const std::vector<int>& actions,
                                  int n_actions) {
  Eigen::MatrixXd p =
      Eigen::MatrixXd::Zero(static_cast<int>(actions.size()), n_actions);
  for (std::size_t s = 0; s < actions.size(); ++s) {
    if (actions[s] < 0 || actions[s] >= n_actions)
      throw std::out_of_range("policy action out of range at state " +
                              std::to_string(s));
    p(static_cast<int>(s), actions[s]) = 1.0;
  }
  return Policy(std::move(p), true);
}

Policy Policy::uniform(int n_states, int n_actions) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Constant(n_states, n_actions,
                                                1.0 / n_actions);
  return Policy(std::move(p), false);
}

int Policy::action_at(int s) const {
  int best = 0;
  for (int a = 1; a < probs_.cols(); ++a)
    if (probs_(s, a) > probs_(s, best)) best = a;
  return best;
}

Eigen::VectorXd QTable::state_values(const Policy& pi) const {
  return (values.array() * pi.probs().array()).rowwise().sum();
}

}  // namespace faqtor
