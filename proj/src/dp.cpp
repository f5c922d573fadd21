#include "faqtor/dp.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace faqtor {

namespace {

// V(s) = sum_a pi(a|s) Q(s, a), then one backup
// Q'(s, a) = R(s, a) + gamma * sum_{s'} p(s'|s, a) V(s').
Eigen::MatrixXd backup(const TabularMdp& mdp, const Policy& pi,
                       const Eigen::MatrixXd& q, double gamma) {
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  Eigen::VectorXd v = (q.array() * pi.probs().array()).rowwise().sum();
  Eigen::MatrixXd out(S, A);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const SparseRow& r = mdp.row(s, a);
      double acc = 0.0;
      for (std::size_t k = 0; k < r.idx.size(); ++k) acc += r.p[k] * v[r.idx[k]];
      out(s, a) = mdp.reward()(s, a) + gamma * acc;
    }
  }
  return out;
}

Eigen::MatrixXd greedy_backup(const TabularMdp& mdp, const Eigen::MatrixXd& q) {
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  Eigen::VectorXd v = q.rowwise().maxCoeff();
  Eigen::MatrixXd out(S, A);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const SparseRow& r = mdp.row(s, a);
      double acc = 0.0;
      for (std::size_t k = 0; k < r.idx.size(); ++k) acc += r.p[k] * v[r.idx[k]];
      out(s, a) = mdp.reward()(s, a) + mdp.gamma() * acc;
    }
  }
  return out;
}

}  // namespace

double bellman_residual(const TabularMdp& mdp, const Policy& pi,
                        const QTable& q) {
  Eigen::MatrixXd next = backup(mdp, pi, q.values, q.gamma);
  return (q.values - next).cwiseAbs().maxCoeff();
}

QTable policy_evaluation_exact(const TabularMdp& mdp, const Policy& pi) {
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  if (pi.n_states() != S || pi.n_actions() != A)
    throw std::invalid_argument("policy shape does not match the MDP");
  if (mdp.gamma() >= 1.0)
    throw std::runtime_error(
        "non-convergent evaluation: gamma = 1 has no closed-form fixed "
        "point; use h_step_q with an explicit horizon");

  const int n = S * A;
  // M[(s,a), (s',a')] = gamma p(s'|s,a) pi(a'|s')
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd r(n);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const int i = s * A + a;
      r[i] = mdp.reward()(s, a);
      const SparseRow& row = mdp.row(s, a);
      for (std::size_t k = 0; k < row.idx.size(); ++k) {
        const int s2 = row.idx[k];
        const double p = mdp.gamma() * row.p[k];
        for (int a2 = 0; a2 < A; ++a2)
          m(i, s2 * A + a2) += p * pi.probs()(s2, a2);
      }
    }
  }
  Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(n, n) - m;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys);
  Eigen::VectorXd qv = lu.solve(r);
  // One round of iterative refinement.
  Eigen::VectorXd resid = r - sys * qv;
  qv += lu.solve(resid);

  QTable q;
  q.gamma = mdp.gamma();
  q.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                      Eigen::RowMajor>>(qv.data(), S, A);
  if (!q.values.allFinite() || bellman_residual(mdp, pi, q) > 1e-9)
    throw std::runtime_error("non-convergent evaluation: Bellman residual "
                             "exceeded 1e-9");
  return q;
}

QTable h_step_q(const TabularMdp& mdp, const Policy& pi, int h) {
  if (h < 1) throw std::invalid_argument("h_step_q requires h >= 1");
  QTable q;
  q.gamma = mdp.gamma();
  q.values = mdp.reward();
  for (int step = 1; step < h; ++step)
    q.values = backup(mdp, pi, q.values, mdp.gamma());
  return q;
}

double policy_value(const TabularMdp& mdp, const Policy& pi) {
  QTable q = policy_evaluation_exact(mdp, pi);
  return mdp.initial_dist().dot(q.state_values(pi));
}

Eigen::VectorXd finite_horizon_values(const TabularMdp& mdp, const Policy& pi,
                                      int horizon, double gamma_eval) {
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(S);
  for (int t = 0; t < horizon; ++t) {
    Eigen::VectorXd next(S);
    for (int s = 0; s < S; ++s) {
      double acc = 0.0;
      for (int a = 0; a < A; ++a) {
        const double pa = pi.probs()(s, a);
        if (pa == 0.0) continue;
        const SparseRow& row = mdp.row(s, a);
        double ev = 0.0;
        for (std::size_t k = 0; k < row.idx.size(); ++k)
          ev += row.p[k] * v[row.idx[k]];
        acc += pa * (mdp.reward()(s, a) + gamma_eval * ev);
      }
      next[s] = acc;
    }
    v = next;
  }
  return v;
}

ValueIterationResult value_iteration(const TabularMdp& mdp, double tol) {
  if (mdp.gamma() >= 1.0)
    throw std::runtime_error("value_iteration does not support gamma = 1");
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(S, A);
  const double gamma = mdp.gamma();
  int it = 0;
  for (;; ++it) {
    Eigen::MatrixXd next = greedy_backup(mdp, q);
    const double delta = (next - q).cwiseAbs().maxCoeff();
    q = next;
    if (gamma == 0.0) break;
    if (gamma / (1.0 - gamma) * delta < tol) break;
    if (it > 1000000)
      throw std::runtime_error("value iteration failed to converge");
  }
  std::vector<int> greedy(S);
  for (int s = 0; s < S; ++s) {
    int best = 0;
    for (int a = 1; a < A; ++a)
      if (q(s, a) > q(s, best)) best = a;
    greedy[s] = best;
  }
  ValueIterationResult out{QTable{q, gamma},
                           Policy::deterministic_from(greedy, A), it + 1};
  return out;
}

TabularMdp compose_parallel(const std::vector<TabularMdp>& mdps) {
  if (mdps.empty())
    throw std::invalid_argument("compose_parallel needs at least one MDP");
  const double gamma = mdps[0].gamma();
  for (const auto& m : mdps)
    if (m.gamma() != gamma)
      throw std::invalid_argument("compose_parallel: discounts differ");

  const int D = static_cast<int>(mdps.size());
  std::vector<int> joint_cards;
  long long joint_states = 1;
  for (const auto& m : mdps) {
    for (int c : m.actions().cardinalities()) joint_cards.push_back(c);
    joint_states *= m.n_states();
  }
  FactoredActionSpace joint_space(joint_cards);
  const int S = static_cast<int>(joint_states);
  const int A = joint_space.total();

  // state place values, component 0 most significant
  std::vector<int> splace(D, 1);
  for (int d = D - 2; d >= 0; --d) splace[d] = splace[d + 1] * mdps[d + 1].n_states();
  // per-component action offsets in the concatenated space
  std::vector<int> adim_offset(D, 0);
  for (int d = 1; d < D; ++d)
    adim_offset[d] = adim_offset[d - 1] + mdps[d - 1].actions().dims();

  std::vector<SparseRow> rows(static_cast<std::size_t>(S) * A);
  Eigen::MatrixXd reward = Eigen::MatrixXd::Zero(S, A);
  Eigen::VectorXd mu0 = Eigen::VectorXd::Ones(S);

  std::vector<int> comp_state(D), comp_action(D);
  for (int s = 0; s < S; ++s) {
    for (int d = 0; d < D; ++d)
      comp_state[d] = (s / splace[d]) % mdps[d].n_states();
    double mu = 1.0;
    for (int d = 0; d < D; ++d)
      mu *= mdps[d].initial_dist()[comp_state[d]];
    mu0[s] = mu;
    for (int a = 0; a < A; ++a) {
      std::vector<int> subs = joint_space.decompose_action(a);
      double r = 0.0;
      for (int d = 0; d < D; ++d) {
        const auto& cards = mdps[d].actions().cardinalities();
        std::vector<int> comp_sub(subs.begin() + adim_offset[d],
                                  subs.begin() + adim_offset[d] +
                                      static_cast<int>(cards.size()));
        comp_action[d] = mdps[d].actions().action_index(comp_sub);
        r += mdps[d].reward()(comp_state[d], comp_action[d]);
      }
      reward(s, a) = r;
      // outer product of component rows
      SparseRow acc;
      acc.idx.push_back(0);
      acc.p.push_back(1.0);
      for (int d = 0; d < D; ++d) {
        const SparseRow& cr = mdps[d].row(comp_state[d], comp_action[d]);
        SparseRow next;
        next.idx.reserve(acc.idx.size() * cr.idx.size());
        next.p.reserve(acc.idx.size() * cr.idx.size());
        for (std::size_t i = 0; i < acc.idx.size(); ++i) {
          for (std::size_t k = 0; k < cr.idx.size(); ++k) {
            next.idx.push_back(acc.idx[i] + cr.idx[k] * splace[d]);
            next.p.push_back(acc.p[i] * cr.p[k]);
          }
        }
        acc = std::move(next);
      }
      rows[static_cast<std::size_t>(s) * A + a] = std::move(acc);
    }
  }
  return TabularMdp(S, joint_space, std::move(rows), std::move(reward), gamma,
                    std::move(mu0));
}

Policy compose_factored_policy(const std::vector<Policy>& policies,
                               const std::vector<TabularMdp>& mdps) {
  if (policies.size() != mdps.size() || policies.empty())
    throw std::invalid_argument("compose_factored_policy: size mismatch");
  const int D = static_cast<int>(mdps.size());
  for (int d = 0; d < D; ++d) {
    if (policies[d].n_states() != mdps[d].n_states() ||
        policies[d].n_actions() != mdps[d].n_actions())
      throw std::invalid_argument(
          "compose_factored_policy: policy " + std::to_string(d) +
          " does not match its component MDP");
  }
  if (D == 1) return policies[0];

  std::vector<int> joint_cards;
  long long joint_states = 1;
  for (const auto& m : mdps) {
    for (int c : m.actions().cardinalities()) joint_cards.push_back(c);
    joint_states *= m.n_states();
  }
  FactoredActionSpace joint_space(joint_cards);
  const int S = static_cast<int>(joint_states);
  const int A = joint_space.total();
  std::vector<int> splace(D, 1);
  for (int d = D - 2; d >= 0; --d) splace[d] = splace[d + 1] * mdps[d + 1].n_states();
  std::vector<int> adim_offset(D, 0);
  for (int d = 1; d < D; ++d)
    adim_offset[d] = adim_offset[d - 1] + mdps[d - 1].actions().dims();

  bool deterministic = true;
  for (const auto& p : policies) deterministic &= p.deterministic();

  Eigen::MatrixXd probs(S, A);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      std::vector<int> subs = joint_space.decompose_action(a);
      double p = 1.0;
      for (int d = 0; d < D; ++d) {
        const auto& cards = mdps[d].actions().cardinalities();
        std::vector<int> comp_sub(subs.begin() + adim_offset[d],
                                  subs.begin() + adim_offset[d] +
                                      static_cast<int>(cards.size()));
        const int ca = mdps[d].actions().action_index(comp_sub);
        const int cs = (s / splace[d]) % mdps[d].n_states();
        p *= policies[d].probs()(cs, ca);
      }
      probs(s, a) = p;
    }
  }
  return Policy(std::move(probs), deterministic);
}

}  // namespace faqtor
