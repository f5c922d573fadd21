#pragma once

#include <utility>
#include <vector>

#include "faqtor/mdp.hpp"

namespace faqtor {

// Closed-form Q^pi = (I - gamma P^pi)^{-1} R via dense LU with one round of
// iterative refinement.  Throws if gamma == 1 or the Bellman residual of the
// solution exceeds 1e-9 (non-convergent evaluation).
QTable policy_evaluation_exact(const TabularMdp& mdp, const Policy& pi);

// h-step Q-function: h = 1 returns the reward table.
QTable h_step_q(const TabularMdp& mdp, const Policy& pi, int h);

// Value of pi from the initial distribution, sum_s mu0(s) V^pi(s).
double policy_value(const TabularMdp& mdp, const Policy& pi);

// Finite-horizon state values under pi with an evaluation discount
// (V over `horizon` steps); used for gamma = 1 absorbing chains and the
// truncated-episode evaluation protocol.
Eigen::VectorXd finite_horizon_values(const TabularMdp& mdp, const Policy& pi,
                                      int horizon, double gamma_eval);

struct ValueIterationResult {
  QTable q;
  Policy greedy;
  int iterations = 0;
};

// Optimal Q within tol in sup-norm; greedy ties break to the lowest index.
// gamma == 1 is rejected.
ValueIterationResult value_iteration(const TabularMdp& mdp, double tol);

// Product of parallel MDPs: joint states/actions are mixed-radix indexed
// with component 0 most significant, transitions multiply, rewards add.
TabularMdp compose_parallel(const std::vector<TabularMdp>& mdps);

// pi(a|s) = prod_d pi_d(a_d|s_d) on the composed index spaces.
Policy compose_factored_policy(const std::vector<Policy>& policies,
                               const std::vector<TabularMdp>& mdps);

// Sup-norm Bellman residual ||Q - (R + gamma P^pi Q)||_inf.
double bellman_residual(const TabularMdp& mdp, const Policy& pi,
                        const QTable& q);

}  // namespace faqtor
