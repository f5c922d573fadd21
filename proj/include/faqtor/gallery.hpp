#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "faqtor/conditions.hpp"
#include "faqtor/mdp.hpp"

namespace faqtor {

// An executable example: an MDP, the policy under study, the coordinate
// abstractions, and the expected tables it must reproduce.
struct GalleryFixture {
  std::string name;
  TabularMdp mdp;
  Policy policy;
  std::optional<AbstractionSet> phi;

  // Expected full Q table (0x0 when only the start-state row is pinned).
  Eigen::MatrixXd expected_q;
  // Expected Q(s0, .) and its factored fit (size 0 when not pinned).
  Eigen::VectorXd expected_q_s0;
  Eigen::VectorXd expected_fit_s0;
  // Per-dimension component tables for composed fixtures (joint indexing).
  Eigen::MatrixXd expected_qx;
  Eigen::MatrixXd expected_qy;

  // 0 evaluates exactly; > 0 runs h_step_q (used by the gamma = 1 chains).
  int eval_horizon = 0;
  // True when Q must decompose with zero residual at every state.
  bool decomposes_exactly = false;
  std::string notes;
};

// The one-dimensional chain: 2 states, left keeps the agent at s0, right
// moves it to the absorbing s1 with reward +1.
TabularMdp chain1d();

// Two 1-d chains composed in parallel (4 states, 4 diagonal actions).
TabularMdp chain2d();

// Coordinate abstractions of the 4-state chain: x = s / 2, y = s % 2.
AbstractionSet chain2d_abstractions();

// The 5-state abstraction example; `p` is the probabilistic branch taken by
// the up-left action out of the start state.
TabularMdp five_state_mdp(double p);
AbstractionSet five_state_abstractions();

// Fixture collection keyed by name.  `fig2_p` parameterizes the 5-state
// example's probabilistic branch.
std::map<std::string, GalleryFixture> build_gallery(double fig2_p = 0.5);

}  // namespace faqtor
