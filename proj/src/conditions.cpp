#include "faqtor/conditions.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "faqtor/dp.hpp"

namespace faqtor {

AbstractionSet::AbstractionSet(std::vector<std::vector<int>> maps,
                               std::vector<int> abstract_cards)
    : maps_(std::move(maps)), cards_(std::move(abstract_cards)) {
  if (maps_.empty()) throw std::invalid_argument("abstraction set is empty");
  if (cards_.size() != maps_.size())
    throw std::invalid_argument("abstraction cardinality count mismatch");
  const std::size_t S = maps_[0].size();
  for (std::size_t d = 0; d < maps_.size(); ++d) {
    if (maps_[d].size() != S)
      throw std::invalid_argument("abstraction maps cover different state "
                                  "counts");
    std::vector<bool> hit(cards_[d], false);
    for (int z : maps_[d]) {
      if (z < 0 || z >= cards_[d])
        throw std::invalid_argument("abstraction value out of range");
      hit[z] = true;
    }
    if (!std::all_of(hit.begin(), hit.end(), [](bool b) { return b; }))
      throw std::invalid_argument("abstraction map " + std::to_string(d) +
                                  " is not surjective");
  }
  for (std::size_t d = 0; d < maps_.size(); ++d)
    for (std::size_t d2 = d + 1; d2 < maps_.size(); ++d2)
      if (maps_[d] == maps_[d2])
        throw std::invalid_argument("abstraction maps " + std::to_string(d) +
                                    " and " + std::to_string(d2) +
                                    " coincide; Theorem 1 requires distinct "
                                    "maps");
  place_.assign(maps_.size(), 1);
  for (int d = static_cast<int>(maps_.size()) - 2; d >= 0; --d)
    place_[d] = place_[d + 1] * cards_[d + 1];
  total_ = place_[0] * cards_[0];
}

AbstractionSet AbstractionSet::infer(std::vector<std::vector<int>> maps) {
  std::vector<int> cards;
  for (const auto& m : maps)
    cards.push_back(m.empty() ? 0 : *std::max_element(m.begin(), m.end()) + 1);
  return AbstractionSet(std::move(maps), std::move(cards));
}

int AbstractionSet::abstract_index(int s) const {
  int idx = 0;
  for (int d = 0; d < dims(); ++d) idx += maps_[d][s] * place_[d];
  return idx;
}

std::vector<int> AbstractionSet::abstract_vector_of_index(int z_index) const {
  std::vector<int> out(dims());
  for (int d = 0; d < dims(); ++d) out[d] = (z_index / place_[d]) % cards_[d];
  return out;
}

namespace {

// Group primitive states by their full abstract vector.
std::map<int, std::vector<int>> group_by_abstract(const AbstractionSet& phi) {
  std::map<int, std::vector<int>> groups;
  for (int s = 0; s < phi.n_states(); ++s)
    groups[phi.abstract_index(s)].push_back(s);
  return groups;
}

}  // namespace

ConditionReport check_transition_condition(const TabularMdp& mdp,
                                           const AbstractionSet& phi,
                                           double tol) {
  ConditionReport report;
  report.id = ConditionId::transition;
  const int A = mdp.n_actions();
  const int Z = phi.total_abstract();
  const int D = phi.dims();

  // (i) aggregate T(z'|s,a)
  const int S = mdp.n_states();
  std::vector<Eigen::VectorXd> agg(static_cast<std::size_t>(S) * A);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      Eigen::VectorXd t = Eigen::VectorXd::Zero(Z);
      const SparseRow& row = mdp.row(s, a);
      for (std::size_t k = 0; k < row.idx.size(); ++k)
        t[phi.abstract_index(row.idx[k])] += row.p[k];
      agg[static_cast<std::size_t>(s) * A + a] = std::move(t);
    }
  }

  // (ii) T depends on s only through z(s)
  auto groups = group_by_abstract(phi);
  for (const auto& [z, states] : groups) {
    for (int a = 0; a < A; ++a) {
      const Eigen::VectorXd& ref =
          agg[static_cast<std::size_t>(states[0]) * A + a];
      for (std::size_t i = 1; i < states.size(); ++i) {
        const Eigen::VectorXd& cur =
            agg[static_cast<std::size_t>(states[i]) * A + a];
        const double gap = (ref - cur).cwiseAbs().maxCoeff();
        if (gap > tol) {
          report.violations.push_back(
              {states[i], a, 0.0, 0.0, gap,
               "aggregated next-z distribution differs between states " +
                   std::to_string(states[0]) + " and " +
                   std::to_string(states[i]) + " sharing the same abstract "
                   "state"});
        }
      }
    }
  }

  // (iii) candidate marginals p_d(z'_d | z, a), then require dependence on
  // (z_d, a_d) only.  Keyed by (d, z_d, a_d); first occurrence is the
  // candidate, all others must match.
  std::map<std::tuple<int, int, int>, std::pair<Eigen::VectorXd, int>> cand;
  for (const auto& [z, states] : groups) {
    const std::vector<int> zvec = phi.abstract_vector_of_index(z);
    const int s0 = states[0];
    for (int a = 0; a < A; ++a) {
      const Eigen::VectorXd& t = agg[static_cast<std::size_t>(s0) * A + a];
      for (int d = 0; d < D; ++d) {
        Eigen::VectorXd marg = Eigen::VectorXd::Zero(phi.abstract_card(d));
        for (int z2 = 0; z2 < Z; ++z2) {
          if (t[z2] == 0.0) continue;
          marg[phi.abstract_vector_of_index(z2)[d]] += t[z2];
        }
        const int a_d = mdp.actions().sub_action(a, d);
        auto key = std::make_tuple(d, zvec[d], a_d);
        auto it = cand.find(key);
        if (it == cand.end()) {
          cand.emplace(key, std::make_pair(marg, s0));
        } else {
          const double gap = (it->second.first - marg).cwiseAbs().maxCoeff();
          if (gap > tol) {
            report.violations.push_back(
                {s0, a, 0.0, 0.0, gap,
                 "marginal over dimension " + std::to_string(d) +
                     " depends on more than (z_" + std::to_string(d) +
                     ", a_" + std::to_string(d) + ")"});
          }
        }
      }
    }
  }

  // (iv) product of candidate marginals reproduces T
  for (const auto& [z, states] : groups) {
    const std::vector<int> zvec = phi.abstract_vector_of_index(z);
    const int s0 = states[0];
    for (int a = 0; a < A; ++a) {
      const Eigen::VectorXd& t = agg[static_cast<std::size_t>(s0) * A + a];
      for (int z2 = 0; z2 < Z; ++z2) {
        const std::vector<int> z2vec = phi.abstract_vector_of_index(z2);
        double prod = 1.0;
        for (int d = 0; d < D; ++d) {
          const int a_d = mdp.actions().sub_action(a, d);
          const auto& marg = cand.at({d, zvec[d], a_d}).first;
          prod *= marg[z2vec[d]];
        }
        const double gap = std::abs(prod - t[z2]);
        if (gap > tol) {
          report.violations.push_back(
              {s0, a, t[z2], prod, gap,
               "product of per-dimension marginals does not reproduce the "
               "aggregated transition"});
        }
      }
    }
  }

  report.satisfied = report.violations.empty();
  return report;
}

ConditionReport check_reward_condition(const TabularMdp& mdp,
                                       const AbstractionSet& phi, double tol) {
  ConditionReport report;
  report.id = ConditionId::reward;
  const int A = mdp.n_actions();
  const int D = phi.dims();

  // r depends on s only through z
  auto groups = group_by_abstract(phi);
  for (const auto& [z, states] : groups) {
    for (int a = 0; a < A; ++a) {
      const double ref = mdp.reward()(states[0], a);
      for (std::size_t i = 1; i < states.size(); ++i) {
        const double cur = mdp.reward()(states[i], a);
        if (std::abs(ref - cur) > tol)
          report.violations.push_back(
              {states[i], a, cur, ref, std::abs(ref - cur),
               "reward differs between states sharing an abstract state"});
      }
    }
  }

  // additive fit over per-(z_d, a_d) indicator features
  int n_features = 0;
  std::vector<int> offset(D, 0);
  for (int d = 0; d < D; ++d) {
    offset[d] = n_features;
    n_features += phi.abstract_card(d) * mdp.actions().cardinality(d);
  }
  const int n_rows = static_cast<int>(groups.size()) * A;
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(n_rows, n_features);
  Eigen::VectorXd target(n_rows);
  std::vector<std::pair<int, int>> row_key;  // representative (s, a)
  int row_i = 0;
  for (const auto& [z, states] : groups) {
    const std::vector<int> zvec = phi.abstract_vector_of_index(z);
    for (int a = 0; a < A; ++a) {
      for (int d = 0; d < D; ++d) {
        const int a_d = mdp.actions().sub_action(a, d);
        design(row_i,
               offset[d] + zvec[d] * mdp.actions().cardinality(d) + a_d) = 1.0;
      }
      target[row_i] = mdp.reward()(states[0], a);
      row_key.emplace_back(states[0], a);
      ++row_i;
    }
  }
  Eigen::VectorXd fitted = design * (pinv(design) * target);
  for (int i = 0; i < n_rows; ++i) {
    const double gap = std::abs(fitted[i] - target[i]);
    if (gap > tol)
      report.violations.push_back(
          {row_key[i].first, row_key[i].second, target[i], fitted[i], gap,
           "reward is not additive across sub-action dimensions"});
  }

  report.satisfied = report.violations.empty();
  return report;
}

ConditionReport check_policy_condition(const Policy& pi,
                                       const FactoredActionSpace& space,
                                       const AbstractionSet& phi, double tol) {
  if (pi.n_states() != phi.n_states())
    throw std::invalid_argument("policy/abstraction state count mismatch");
  if (pi.n_actions() != space.total())
    throw std::invalid_argument("policy/action space mismatch");
  ConditionReport report;
  report.id = ConditionId::policy;
  const int A = space.total();
  const int D = phi.dims();

  auto groups = group_by_abstract(phi);
  // pi depends on s only through z
  for (const auto& [z, states] : groups) {
    for (std::size_t i = 1; i < states.size(); ++i) {
      const double gap = (pi.probs().row(states[0]) - pi.probs().row(states[i]))
                             .cwiseAbs()
                             .maxCoeff();
      if (gap > tol)
        report.violations.push_back(
            {states[i], -1, 0.0, 0.0, gap,
             "policy row differs between states " + std::to_string(states[0]) +
                 " and " + std::to_string(states[i]) +
                 " sharing an abstract state"});
    }
  }

  // per-dimension marginals; candidate keyed by (d, z_d)
  std::map<std::pair<int, int>, Eigen::VectorXd> cand;
  for (const auto& [z, states] : groups) {
    const std::vector<int> zvec = phi.abstract_vector_of_index(z);
    const int s0 = states[0];
    for (int d = 0; d < D; ++d) {
      Eigen::VectorXd marg = Eigen::VectorXd::Zero(space.cardinality(d));
      for (int a = 0; a < A; ++a)
        marg[space.sub_action(a, d)] += pi.probs()(s0, a);
      auto key = std::make_pair(d, zvec[d]);
      auto it = cand.find(key);
      if (it == cand.end()) {
        cand.emplace(key, marg);
      } else {
        const double gap = (it->second - marg).cwiseAbs().maxCoeff();
        if (gap > tol)
          report.violations.push_back(
              {s0, -1, 0.0, 0.0, gap,
               "sub-policy for dimension " + std::to_string(d) +
                   " depends on more than z_" + std::to_string(d)});
      }
    }
  }

  // joint = product of marginals
  for (const auto& [z, states] : groups) {
    const std::vector<int> zvec = phi.abstract_vector_of_index(z);
    const int s0 = states[0];
    for (int a = 0; a < A; ++a) {
      double prod = 1.0;
      for (int d = 0; d < D; ++d)
        prod *= cand.at({d, zvec[d]})[space.sub_action(a, d)];
      const double gap = std::abs(prod - pi.probs()(s0, a));
      if (gap > tol)
        report.violations.push_back(
            {s0, a, pi.probs()(s0, a), prod, gap,
             "joint policy is not the product of per-dimension marginals"});
    }
  }

  report.satisfied = report.violations.empty();
  return report;
}

Theorem1Report check_theorem1(const TabularMdp& mdp, const Policy& pi,
                              const AbstractionSet& phi, double tol) {
  Theorem1Report out;
  out.transition = check_transition_condition(mdp, phi, tol);
  out.reward = check_reward_condition(mdp, phi, tol);
  out.policy = check_policy_condition(pi, mdp.actions(), phi, tol);
  out.guaranteed = out.transition.satisfied && out.reward.satisfied &&
                   out.policy.satisfied;
  out.verdict = out.guaranteed ? "guaranteed" : "not guaranteed";
  // gamma = 1 gallery chains absorb; a long finite horizon evaluates them
  // exactly.
  QTable q = mdp.gamma() < 1.0 ? policy_evaluation_exact(mdp, pi)
                               : h_step_q(mdp, pi, 256);
  out.decomposability = check_decomposability(q, mdp.actions(), tol);
  out.evaluated = true;
  if (out.guaranteed && !out.decomposability.all_decomposable)
    throw std::runtime_error(
        "Theorem 1 soundness check failed: conditions hold but Q does not "
        "decompose (max residual " +
        std::to_string(out.decomposability.max_residual) + ")");
  return out;
}

}  // namespace faqtor
