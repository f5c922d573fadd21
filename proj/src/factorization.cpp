#include "faqtor/factorization.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace faqtor {

Eigen::MatrixXd build_psi(const FactoredActionSpace& space) {
  const int A = space.total();
  int cols = 0;
  for (int c : space.cardinalities()) cols += c;
  Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(A, cols);
  for (int a = 0; a < A; ++a) {
    int off = 0;
    for (int d = 0; d < space.dims(); ++d) {
      psi(a, off + space.sub_action(a, d)) = 1.0;
      off += space.cardinality(d);
    }
  }
  return psi;
}

Eigen::MatrixXd build_psi_tilde(const FactoredActionSpace& space) {
  const int A = space.total();
  int cols = 1;
  for (int c : space.cardinalities()) cols += c - 1;
  Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(A, cols);
  for (int a = 0; a < A; ++a) {
    psi(a, 0) = 1.0;
    int off = 1;
    for (int d = 0; d < space.dims(); ++d) {
      const int sub = space.sub_action(a, d);
      if (sub > 0) psi(a, off + sub - 1) = 1.0;
      off += space.cardinality(d) - 1;
    }
  }
  return psi;
}

Eigen::MatrixXd pinv(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() ? 1e-10 * sv[0] : 0.0;
  Eigen::VectorXd inv_sv(sv.size());
  for (int i = 0; i < sv.size(); ++i)
    inv_sv[i] = sv[i] > cutoff ? 1.0 / sv[i] : 0.0;
  return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
}

Eigen::MatrixXd projection_matrix(const FactoredActionSpace& space) {
  Eigen::MatrixXd psi = build_psi(space);
  return psi * pinv(psi);
}

double FactoredFit::component(const FactoredActionSpace& space, int d,
                              int a_d) const {
  // weights = [c, block_1, ..., block_D] with block_d of size |A_d| - 1;
  // the constant is folded into dimension 0's component.
  double v = d == 0 ? weights[0] : 0.0;
  if (a_d > 0) {
    int off = 1;
    for (int k = 0; k < d; ++k) off += space.cardinality(k) - 1;
    v += weights[off + a_d - 1];
  }
  return v;
}

FactoredFit fit_factored_q(const Eigen::VectorXd& q_row,
                           const FactoredActionSpace& space) {
  if (!q_row.allFinite())
    throw std::invalid_argument("fit_factored_q: non-finite Q values");
  if (q_row.size() != space.total())
    throw std::invalid_argument("fit_factored_q: Q row length mismatch");
  Eigen::MatrixXd psi_tilde = build_psi_tilde(space);
  FactoredFit fit;
  fit.weights = pinv(psi_tilde) * q_row;
  fit.fitted = psi_tilde * fit.weights;
  fit.residual = (q_row - fit.fitted).norm();
  return fit;
}

DecomposabilityReport check_decomposability(const QTable& q,
                                            const FactoredActionSpace& space,
                                            double tol) {
  DecomposabilityReport report;
  report.all_decomposable = true;
  Eigen::MatrixXd proj = projection_matrix(space);
  for (int s = 0; s < q.values.rows(); ++s) {
    Eigen::VectorXd row = q.values.row(s).transpose();
    const double residual = (row - proj * row).norm();
    const bool ok = residual < tol;
    report.rows.push_back({s, residual, ok});
    report.max_residual = std::max(report.max_residual, residual);
    report.all_decomposable &= ok;
  }
  return report;
}

namespace {

std::string csv_number(double v) {
  char buf[32];
  if (v == static_cast<long long>(v) && std::abs(v) < 1e15)
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
  else
    std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m) {
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << csv_number(m(i, j));
    }
    os << '\n';
  }
}

void write_decomposability_csv(std::ostream& os,
                               const DecomposabilityReport& report) {
  os << "state,residual,decomposable\n";
  for (const auto& row : report.rows)
    os << row.state << ',' << csv_number(row.residual) << ','
       << (row.decomposable ? 1 : 0) << '\n';
}

std::pair<long long, long long> free_parameter_count(
    const FactoredActionSpace& space, int n_states) {
  long long full = 1;
  long long sum = 0;
  for (int c : space.cardinalities()) {
    full *= c;
    sum += c;
  }
  long long factored = sum - space.dims() + 1;
  return {n_states * full, n_states * factored};
}

double rademacher_lower_bound(const Eigen::MatrixXd& design,
                              double weight_bound) {
  if (design.rows() == 0 || design.cols() == 0)
    throw std::invalid_argument("rademacher_lower_bound: empty design");
  if (weight_bound <= 0.0)
    throw std::invalid_argument("rademacher_lower_bound: bound must be > 0");
  const double m = static_cast<double>(design.rows());
  return weight_bound / (std::sqrt(2.0) * m) * design.norm();
}

SimulationLemmaBounds simulation_lemma_bounds(double eps_p, double eps_r,
                                              double gamma, double r_max) {
  if (gamma < 0.0 || gamma >= 1.0)
    throw std::invalid_argument("simulation_lemma_bounds: gamma in [0, 1)");
  if (eps_p < 0.0 || eps_r < 0.0 || r_max < 0.0)
    throw std::invalid_argument("simulation_lemma_bounds: negative input");
  const double g1 = 1.0 - gamma;
  SimulationLemmaBounds b;
  b.q_bound = eps_r / g1 + gamma * eps_p * r_max / (2.0 * g1 * g1);
  b.v_bound = 2.0 * eps_r / g1 + gamma * eps_p * r_max / (g1 * g1);
  return b;
}

InteractionFit fit_with_interactions(const Eigen::VectorXd& q_row,
                                     const FactoredActionSpace& space,
                                     const Eigen::MatrixXd& interaction_cols) {
  if (interaction_cols.size() > 0 && interaction_cols.rows() != space.total())
    throw std::invalid_argument(
        "fit_with_interactions: interaction columns need |A| rows");
  Eigen::MatrixXd psi_tilde = build_psi_tilde(space);
  Eigen::MatrixXd design(space.total(),
                         psi_tilde.cols() + interaction_cols.cols());
  design.leftCols(psi_tilde.cols()) = psi_tilde;
  if (interaction_cols.cols() > 0)
    design.rightCols(interaction_cols.cols()) = interaction_cols;
  InteractionFit fit;
  fit.weights = pinv(design) * q_row;
  fit.fitted = design * fit.weights;
  fit.residual = (q_row - fit.fitted).norm();
  return fit;
}

}  // namespace faqtor
