#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <utility>
#include <vector>

#include "faqtor/action_space.hpp"
#include "faqtor/mdp.hpp"

namespace faqtor {

// |A| x sum_d |A_d| block one-hot matrix: row i, block d holds the one-hot
// indicator of the d-th sub-action of joint action i.  Every row sums to D.
Eigen::MatrixXd build_psi(const FactoredActionSpace& space);

// All-ones first column, then each block of psi with its first column
// removed; full column rank 1 + sum_d (|A_d| - 1).
Eigen::MatrixXd build_psi_tilde(const FactoredActionSpace& space);

// Moore-Penrose pseudoinverse via SVD; singular values below
// 1e-10 * sigma_max are treated as zero.
Eigen::MatrixXd pinv(const Eigen::MatrixXd& m);

// Orthogonal projector onto the decomposable subspace, psi psi^+.
Eigen::MatrixXd projection_matrix(const FactoredActionSpace& space);

// Minimum-norm least-squares fit of one state's Q-row onto the condensed
// basis.  `fitted` equals projection_matrix(space) * q exactly (same SVD).
struct FactoredFit {
  Eigen::VectorXd weights;  // condensed basis, length 1 + sum (|A_d| - 1)
  Eigen::VectorXd fitted;   // psi_tilde * weights
  double residual = 0.0;    // ||q - fitted||_2

  // Per-dimension component q_d(a_d); the shared constant lives in d = 0.
  double component(const FactoredActionSpace& space, int d, int a_d) const;
};

FactoredFit fit_factored_q(const Eigen::VectorXd& q_row,
                           const FactoredActionSpace& space);

struct DecomposabilityRow {
  int state = 0;
  double residual = 0.0;
  bool decomposable = false;
};

struct DecomposabilityReport {
  std::vector<DecomposabilityRow> rows;
  double max_residual = 0.0;
  bool all_decomposable = false;
};

DecomposabilityReport check_decomposability(const QTable& q,
                                            const FactoredActionSpace& space,
                                            double tol);

// CSV emitters: a bare numeric matrix, and decomposability rows under the
// header state,residual,decomposable.
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m);
void write_decomposability_csv(std::ostream& os,
                               const DecomposabilityReport& report);

// (full, factored) free-parameter counts: |S| prod |A_d| vs
// |S| (sum |A_d| - D + 1).
std::pair<long long, long long> free_parameter_count(
    const FactoredActionSpace& space, int n_states);

// weight_bound / (sqrt(2) m) * ||X||_{2,2}; the (2,2)-group norm equals the
// Frobenius norm.
double rademacher_lower_bound(const Eigen::MatrixXd& design,
                              double weight_bound);

// Q and V error bounds for planning in an (eps_p, eps_r)-approximate model.
struct SimulationLemmaBounds {
  double q_bound = 0.0;
  double v_bound = 0.0;
};

SimulationLemmaBounds simulation_lemma_bounds(double eps_p, double eps_r,
                                              double gamma, double r_max);

// Least squares over [psi_tilde | interaction columns]; minimum-norm
// weights.  The tail of `weights` holds the interaction coefficients.
struct InteractionFit {
  Eigen::VectorXd weights;
  Eigen::VectorXd fitted;
  double residual = 0.0;
};

InteractionFit fit_with_interactions(const Eigen::VectorXd& q_row,
                                     const FactoredActionSpace& space,
                                     const Eigen::MatrixXd& interaction_cols);

}  // namespace faqtor
