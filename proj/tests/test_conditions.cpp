#include <doctest.h>

#include <cmath>

#include "faqtor/conditions.hpp"
#include "faqtor/dp.hpp"
#include "faqtor/gallery.hpp"
#include "faqtor/pcg32.hpp"

using namespace faqtor;

namespace {

TabularMdp random_component(Pcg32& rng, int n_states, double gamma) {
  std::vector<std::vector<std::vector<double>>> t(
      n_states,
      std::vector<std::vector<double>>(2, std::vector<double>(n_states, 0.0)));
  Eigen::MatrixXd reward(n_states, 2);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < 2; ++a) {
      double sum = 0.0;
      for (int s2 = 0; s2 < n_states; ++s2) {
        t[s][a][s2] = -std::log(1.0 - rng.next_double());
        sum += t[s][a][s2];
      }
      double acc = 0.0;
      for (int s2 = 0; s2 + 1 < n_states; ++s2) {
        t[s][a][s2] /= sum;
        acc += t[s][a][s2];
      }
      t[s][a][n_states - 1] = 1.0 - acc;
      reward(s, a) = 2.0 * rng.next_double() - 1.0;
    }
  }
  Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(n_states);
  mu0[0] = 1.0;
  return TabularMdp::from_dense(t, FactoredActionSpace({2}), reward, gamma,
                                mu0);
}

Policy random_component_policy(Pcg32& rng, int n_states) {
  Eigen::MatrixXd p(n_states, 2);
  for (int s = 0; s < n_states; ++s) {
    const double x = rng.next_double();
    p(s, 0) = x;
    p(s, 1) = 1.0 - x;
  }
  return Policy(p, false);
}

// Component-projection abstractions of a parallel composition.
AbstractionSet projection_abstractions(const std::vector<int>& sizes) {
  const int D = static_cast<int>(sizes.size());
  int total = 1;
  for (int n : sizes) total *= n;
  std::vector<int> place(D, 1);
  for (int d = D - 2; d >= 0; --d) place[d] = place[d + 1] * sizes[d + 1];
  std::vector<std::vector<int>> maps(D, std::vector<int>(total));
  for (int s = 0; s < total; ++s)
    for (int d = 0; d < D; ++d) maps[d][s] = (s / place[d]) % sizes[d];
  return AbstractionSet(std::move(maps), sizes);
}

}  // namespace

TEST_CASE("abstraction validation") {
  CHECK_THROWS_AS(AbstractionSet({{0, 0, 1, 1}, {0, 0, 1, 1}}, {2, 2}),
                  std::invalid_argument);  // identical maps
  CHECK_THROWS_AS(AbstractionSet({{0, 0, 0, 0}, {0, 1, 0, 1}}, {2, 2}),
                  std::invalid_argument);  // not surjective
  AbstractionSet ok({{0, 0, 1, 1}, {0, 1, 0, 1}}, {2, 2});
  CHECK(ok.total_abstract() == 4);
  CHECK(ok.abstract_index(2) == 2);
}

TEST_CASE("five-state example satisfies the transition condition for any p") {
  for (double p : {0.0, 0.3, 0.5, 0.9}) {
    TabularMdp mdp = five_state_mdp(p);
    auto report =
        check_transition_condition(mdp, five_state_abstractions(), 1e-9);
    CHECK(report.satisfied);
  }
}

TEST_CASE("five-state example satisfies reward and policy conditions") {
  TabularMdp mdp = five_state_mdp(0.5);
  AbstractionSet phi = five_state_abstractions();
  CHECK(check_reward_condition(mdp, phi, 1e-9).satisfied);
  Policy pi = Policy::deterministic_from({3, 2, 2, 3, 2}, 4);
  CHECK(check_policy_condition(pi, mdp.actions(), phi, 1e-9).satisfied);
}

TEST_CASE("modified chain violates the transition condition at (s01, UR)") {
  auto g = build_gallery();
  const auto& f = g.at("fig3");
  auto report = check_transition_condition(f.mdp, *f.phi, 1e-9);
  CHECK_FALSE(report.satisfied);
  bool witness_found = false;
  for (const auto& v : report.violations)
    witness_found |= (v.state == 1 && v.action == 3) || v.state == 1;
  CHECK(witness_found);
}

TEST_CASE("reward-violation fixture reports a witness at (s00, UR)") {
  auto g = build_gallery();
  const auto& f = g.at("figC5_reward_violation");
  auto report = check_reward_condition(f.mdp, *f.phi, 1e-9);
  CHECK_FALSE(report.satisfied);
  bool witness_found = false;
  for (const auto& v : report.violations)
    witness_found |= v.state == 0 && v.action == 3;
  CHECK(witness_found);
}

TEST_CASE("all-zero rewards satisfy the reward condition") {
  TabularMdp chain = chain2d();
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(4, 4);
  std::vector<SparseRow> rows;
  for (int s = 0; s < 4; ++s)
    for (int a = 0; a < 4; ++a) rows.push_back(chain.row(s, a));
  TabularMdp zmdp(4, chain.actions(), rows, zero, 0.9, chain.initial_dist());
  CHECK(check_reward_condition(zmdp, chain2d_abstractions(), 1e-9).satisfied);
}

TEST_CASE("policy condition distinguishes factored from entangled policies") {
  TabularMdp mdp = chain2d();
  AbstractionSet phi = chain2d_abstractions();
  Policy uniform = Policy::uniform(4, 4);
  CHECK(check_policy_condition(uniform, mdp.actions(), phi, 1e-9).satisfied);

  // up-left at s00 but up-right at s01: x sub-action depends on y
  Policy bad = Policy::deterministic_from({1, 3, 3, 3}, 4);
  auto report = check_policy_condition(bad, mdp.actions(), phi, 1e-9);
  CHECK_FALSE(report.satisfied);
}

TEST_CASE("correlated mixtures fail the independence check") {
  TabularMdp mdp = chain2d();
  AbstractionSet phi = chain2d_abstractions();
  // equal mass on down-left and up-right only: marginals are uniform but the
  // joint is not their product
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(4, 4);
  for (int s = 0; s < 4; ++s) {
    p(s, 0) = 0.5;
    p(s, 3) = 0.5;
  }
  Policy corr(p, false);
  CHECK_FALSE(check_policy_condition(corr, mdp.actions(), phi, 1e-9).satisfied);
}

TEST_CASE("theorem-1 verdicts across the gallery") {
  auto g = build_gallery();
  {
    const auto& f = g.at("fig2");
    auto rep = check_theorem1(f.mdp, f.policy, *f.phi, 1e-9);
    CHECK(rep.guaranteed);
    CHECK(rep.decomposability.max_residual < 1e-9);
  }
  {
    const auto& f = g.at("fig3");
    auto rep = check_theorem1(f.mdp, f.policy, *f.phi, 1e-9);
    CHECK_FALSE(rep.guaranteed);
    CHECK(rep.verdict == "not guaranteed");
    CHECK(rep.decomposability.max_residual < 1e-10);  // yet Q decomposes
  }
  {
    const auto& f = g.at("fig3_caption_policy");
    auto rep = check_theorem1(f.mdp, f.policy, *f.phi, 1e-9);
    CHECK_FALSE(rep.guaranteed);
    CHECK_FALSE(rep.transition.satisfied);
    CHECK_FALSE(rep.reward.satisfied);
    CHECK_FALSE(rep.policy.satisfied);
    CHECK(rep.decomposability.max_residual > 1e-3);  // biased here
  }
}

TEST_CASE("exactly-one-condition witnesses") {
  auto g = build_gallery();
  struct Expect {
    const char* name;
    bool transition, reward, policy;
  };
  const Expect cases[] = {
      {"transition_only_gamma0", false, true, true},
      {"reward_only_exact", true, false, true},
      {"policy_only_gamma0", true, true, false},
  };
  for (const auto& c : cases) {
    CAPTURE(c.name);
    const auto& f = g.at(c.name);
    auto rep = check_theorem1(f.mdp, f.policy, *f.phi, 1e-9);
    CHECK(rep.transition.satisfied == c.transition);
    CHECK(rep.reward.satisfied == c.reward);
    CHECK(rep.policy.satisfied == c.policy);
    CHECK_FALSE(rep.guaranteed);
    CHECK(rep.decomposability.max_residual < 1e-10);
  }
}

TEST_CASE("gamma-0 chains decompose whenever the reward is additive") {
  auto g = build_gallery();
  for (const char* name : {"transition_only_gamma0", "policy_only_gamma0"}) {
    const auto& f = g.at(name);
    QTable q = policy_evaluation_exact(f.mdp, f.policy);
    CHECK((q.values - f.mdp.reward()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(check_decomposability(q, f.mdp.actions(), 1e-10).all_decomposable);
  }
}

TEST_CASE("soundness on randomized parallel compositions") {
  Pcg32 rng(2024, 7);
  const double gammas[] = {0.0, 0.5, 0.9};
  for (int trial = 0; trial < 40; ++trial) {
    const double gamma = gammas[rng.next_u32() % 3];
    const int D = 2 + static_cast<int>(rng.next_u32() % 2);
    std::vector<TabularMdp> parts;
    std::vector<Policy> policies;
    std::vector<int> sizes;
    for (int d = 0; d < D; ++d) {
      const int n = 2 + static_cast<int>(rng.next_u32() % 3);
      sizes.push_back(n);
      parts.push_back(random_component(rng, n, gamma));
      policies.push_back(random_component_policy(rng, n));
    }
    TabularMdp joint = compose_parallel(parts);
    Policy joint_pi = compose_factored_policy(policies, parts);
    AbstractionSet phi = projection_abstractions(sizes);
    auto rep = check_theorem1(joint, joint_pi, phi, 1e-8);
    CHECK(rep.guaranteed);
    CHECK(rep.decomposability.max_residual < 1e-8);
  }
}

TEST_CASE("projection abstractions satisfy the transition condition on"
          " twenty random compositions") {
  Pcg32 rng(515, 3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<TabularMdp> parts = {random_component(rng, 2, 0.9),
                                     random_component(rng, 3, 0.9)};
    TabularMdp joint = compose_parallel(parts);
    AbstractionSet phi = projection_abstractions({2, 3});
    CHECK(check_transition_condition(joint, phi, 1e-9).satisfied);
  }
}
