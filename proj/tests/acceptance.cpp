// Acceptance suite: one pass/fail line per criterion, exit 0 only if all
// criteria hold.  Criterion 8 onward needs the reference simulator config and
// prints an explicit SKIP when it is missing.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>
#include <vector>

#include "faqtor/bandit.hpp"
#include "faqtor/conditions.hpp"
#include "faqtor/dp.hpp"
#include "faqtor/factorization.hpp"
#include "faqtor/gallery.hpp"
#include "faqtor/offline.hpp"
#include "faqtor/pcg32.hpp"
#include "faqtor/runners.hpp"
#include "faqtor/sepsis.hpp"

using namespace faqtor;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, double seconds,
            const std::string& detail = "") {
  std::printf("criterion %2d [%s] %-34s (%.2fs)%s%s\n", id,
              pass ? "PASS" : "FAIL", name.c_str(), seconds,
              detail.empty() ? "" : " : ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double run_timed(const std::function<bool(std::string&)>& fn, int id,
                 const std::string& name) {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = false;
  try {
    pass = fn(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  report(id, name, pass, secs, detail);
  return secs;
}

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  const int nr = static_cast<int>(rows.size());
  const int nc = static_cast<int>(rows.begin()->size());
  Eigen::MatrixXd m(nr, nc);
  int i = 0;
  for (const auto& r : rows) {
    int j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

bool close(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tol) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a - b).cwiseAbs().maxCoeff() <= tol;
}

// ---- criterion 1: printed featurization matrices ----
bool criterion1(std::string& detail) {
  FactoredActionSpace space({2, 2});
  const double tol = 1e-10;
  bool ok = true;
  ok &= close(build_psi(space),
              mat({{1, 0, 1, 0}, {1, 0, 0, 1}, {0, 1, 1, 0}, {0, 1, 0, 1}}),
              tol);
  ok &= close(build_psi_tilde(space),
              mat({{1, 0, 0}, {1, 0, 1}, {1, 1, 0}, {1, 1, 1}}), tol);
  ok &= close(pinv(build_psi(space)),
              mat({{3. / 8, 3. / 8, -1. / 8, -1. / 8},
                   {-1. / 8, -1. / 8, 3. / 8, 3. / 8},
                   {3. / 8, -1. / 8, 3. / 8, -1. / 8},
                   {-1. / 8, 3. / 8, -1. / 8, 3. / 8}}),
              tol);
  ok &= close(pinv(build_psi_tilde(space)),
              mat({{3. / 4, 1. / 4, 1. / 4, -1. / 4},
                   {-1. / 2, -1. / 2, 1. / 2, 1. / 2},
                   {-1. / 2, 1. / 2, -1. / 2, 1. / 2}}),
              tol);
  Eigen::MatrixXd proj = mat({{0.75, 0.25, 0.25, -0.25},
                              {0.25, 0.75, -0.25, 0.25},
                              {0.25, -0.25, 0.75, 0.25},
                              {-0.25, 0.25, 0.25, 0.75}});
  ok &= close(projection_matrix(space), proj, tol);
  Eigen::MatrixXd pt = build_psi_tilde(space);
  ok &= close(pt * pinv(pt), proj, tol);
  if (!ok) detail = "a printed matrix was not reproduced";
  return ok;
}

// ---- criterion 2: gallery exactness ----
bool criterion2(std::string& detail) {
  auto gallery = build_gallery();
  const double tol = 1e-9;
  const char* names[] = {
      "fig2",          "figC2_optimal", "figC2_nonopt1",
      "figC2_nonopt2", "figC3_row1",    "figC3_row2",
      "figC3_row3",    "figC3_row4",    "figC3_row5",
      "figC3_row6",    "figC3_row7",    "figC4_transition_violation",
      "figC5_reward_violation",         "figC6_adversarial"};
  for (const char* name : names) {
    const auto& f = gallery.at(name);
    QTable q = f.eval_horizon > 0 ? h_step_q(f.mdp, f.policy, f.eval_horizon)
                                  : policy_evaluation_exact(f.mdp, f.policy);
    if (f.expected_q.size() > 0 && !close(q.values, f.expected_q, tol)) {
      detail = std::string(name) + ": Q table mismatch";
      return false;
    }
    if (f.expected_q_s0.size() > 0) {
      Eigen::VectorXd row0 = q.values.row(0).transpose();
      if ((row0 - f.expected_q_s0).cwiseAbs().maxCoeff() > tol) {
        detail = std::string(name) + ": Q(s0) mismatch";
        return false;
      }
      if (f.expected_fit_s0.size() > 0) {
        FactoredFit fit = fit_factored_q(row0, f.mdp.actions());
        if ((fit.fitted - f.expected_fit_s0).cwiseAbs().maxCoeff() > tol) {
          detail = std::string(name) + ": fitted Q(s0) mismatch";
          return false;
        }
      }
    }
    if (f.expected_qx.size() > 0) {
      // the decomposition parts are themselves pinned; verify their sum
      if (!close(f.expected_qx + f.expected_qy, q.values, tol)) {
        detail = std::string(name) + ": component tables do not add up";
        return false;
      }
    }
    if (f.decomposes_exactly &&
        !check_decomposability(q, f.mdp.actions(), tol).all_decomposable) {
      detail = std::string(name) + ": expected an exact decomposition";
      return false;
    }
  }
  return true;
}

// ---- criterion 3: omitted-variable-bias closed form ----
bool criterion3(std::string& detail) {
  Pcg32 rng(303, 1);
  FactoredActionSpace space({2, 2});
  for (int i = 0; i < 1000; ++i) {
    const double alpha = 8.0 * rng.next_double() - 4.0;
    const double beta = 8.0 * rng.next_double() - 4.0;
    Eigen::VectorXd q(4);
    q << 0, alpha, 1, 1 + alpha + beta;
    FactoredFit fit = fit_factored_q(q, space);
    if ((fit.fitted - ovb_qhat(alpha, beta)).cwiseAbs().maxCoeff() > 1e-10) {
      detail = "mismatch at alpha=" + std::to_string(alpha) +
               " beta=" + std::to_string(beta);
      return false;
    }
  }
  return true;
}

// ---- criterion 4: bias / suboptimality regions on the standard grid ----
bool criterion4(std::string& detail) {
  HeatmapGrid grid = heatmap_sweep(-4, 4, -4, 4, 161);
  for (const auto& c : grid.cells) {
    const bool zero_rmse = c.rmse <= 1e-12;
    if (zero_rmse != (c.beta == 0.0)) {
      detail = "rmse zero-set mismatch at beta=" + std::to_string(c.beta);
      return false;
    }
    if (c.alpha >= 0.0 && c.beta >= 0.0 && c.suboptimality > 1e-12) {
      detail = "suboptimality > 0 inside the nonnegative quadrant";
      return false;
    }
    if (c.alpha == 1.0 && c.beta >= -1.0 && c.suboptimality > 1e-12) {
      detail = "suboptimality > 0 at alpha=1, beta=" + std::to_string(c.beta);
      return false;
    }
  }
  return true;
}

// ---- criterion 5: soundness on randomized parallel compositions ----
bool criterion5(std::string& detail) {
  Pcg32 rng(505, 7);
  const double gammas[] = {0.0, 0.5, 0.9};
  auto random_component = [&](int n, double gamma) {
    std::vector<std::vector<std::vector<double>>> t(
        n, std::vector<std::vector<double>>(2, std::vector<double>(n, 0.0)));
    Eigen::MatrixXd reward(n, 2);
    for (int s = 0; s < n; ++s) {
      for (int a = 0; a < 2; ++a) {
        double sum = 0.0;
        for (int s2 = 0; s2 < n; ++s2) {
          t[s][a][s2] = -std::log(1.0 - rng.next_double());
          sum += t[s][a][s2];
        }
        double acc = 0.0;
        for (int s2 = 0; s2 + 1 < n; ++s2) {
          t[s][a][s2] /= sum;
          acc += t[s][a][s2];
        }
        t[s][a][n - 1] = 1.0 - acc;
        reward(s, a) = 2.0 * rng.next_double() - 1.0;
      }
    }
    Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(n);
    mu0[0] = 1.0;
    return TabularMdp::from_dense(t, FactoredActionSpace({2}), reward, gamma,
                                  mu0);
  };
  double max_residual = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const double gamma = gammas[rng.next_u32() % 3];
    const int D = 2 + static_cast<int>(rng.next_u32() % 2);
    std::vector<TabularMdp> parts;
    std::vector<Policy> policies;
    std::vector<int> sizes;
    for (int d = 0; d < D; ++d) {
      const int n = 2 + static_cast<int>(rng.next_u32() % 3);
      sizes.push_back(n);
      parts.push_back(random_component(n, gamma));
      Eigen::MatrixXd p(n, 2);
      for (int s = 0; s < n; ++s) {
        const double x = rng.next_double();
        p(s, 0) = x;
        p(s, 1) = 1.0 - x;
      }
      policies.emplace_back(p, false);
    }
    TabularMdp joint = compose_parallel(parts);
    Policy joint_pi = compose_factored_policy(policies, parts);
    // component-projection abstractions
    int total = 1;
    for (int n : sizes) total *= n;
    std::vector<int> place(D, 1);
    for (int d = D - 2; d >= 0; --d) place[d] = place[d + 1] * sizes[d + 1];
    std::vector<std::vector<int>> maps(D, std::vector<int>(total));
    for (int s = 0; s < total; ++s)
      for (int d = 0; d < D; ++d) maps[d][s] = (s / place[d]) % sizes[d];
    AbstractionSet phi(maps, sizes);
    Theorem1Report rep = check_theorem1(joint, joint_pi, phi, 1e-8);
    if (!rep.guaranteed) {
      detail = "conditions unexpectedly violated on trial " +
               std::to_string(trial);
      return false;
    }
    max_residual = std::max(max_residual, rep.decomposability.max_residual);
  }
  if (max_residual >= 1e-8) {
    detail = "max residual " + std::to_string(max_residual);
    return false;
  }
  detail = "max residual " + std::to_string(max_residual) + " over 200 trials";
  return true;
}

// ---- criterion 6: exactly-one-condition witnesses ----
bool criterion6(std::string& detail) {
  auto gallery = build_gallery();
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
    const auto& f = gallery.at(c.name);
    Theorem1Report rep = check_theorem1(f.mdp, f.policy, *f.phi, 1e-9);
    const bool pattern = rep.transition.satisfied == c.transition &&
                         rep.reward.satisfied == c.reward &&
                         rep.policy.satisfied == c.policy;
    if (!pattern) {
      detail = std::string(c.name) + ": wrong violation pattern";
      return false;
    }
    if (rep.decomposability.max_residual >= 1e-10) {
      detail = std::string(c.name) + ": residual " +
               std::to_string(rep.decomposability.max_residual);
      return false;
    }
  }
  return true;
}

// ---- criterion 7: Rademacher ordering ----
bool criterion7(std::string& detail) {
  Pcg32 rng(707, 3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> cards;
    const int dims = 1 + static_cast<int>(rng.next_u32() % 3);
    for (int d = 0; d < dims; ++d)
      cards.push_back(2 + static_cast<int>(rng.next_u32() % 3));
    FactoredActionSpace space(cards);
    Eigen::MatrixXd psi = build_psi(space);
    const int m = 1 + static_cast<int>(rng.next_u32() % 25);
    Eigen::MatrixXd x(m, psi.cols());
    Eigen::MatrixXd inter = Eigen::MatrixXd::Zero(m, 1);
    for (int i = 0; i < m; ++i) {
      x.row(i) = psi.row(rng.next_u32() % space.total());
      inter(i, 0) = rng.next_double() < 0.4 ? 1.0 : 0.0;
    }
    if (inter.cwiseAbs().sum() == 0.0) inter(0, 0) = 1.0;
    Eigen::MatrixXd xfull(m, x.cols() + 1);
    xfull.leftCols(x.cols()) = x;
    xfull.rightCols(1) = inter;
    if (!(rademacher_lower_bound(x, 1.0) <
          rademacher_lower_bound(xfull, 1.0))) {
      detail = "ordering failed on trial " + std::to_string(trial);
      return false;
    }
  }
  return true;
}

// ---- criterion 10: OPE identities ----
bool criterion10(std::string& detail) {
  TabularMdp mdp = chain2d();
  Policy behavior = Policy::uniform(4, 4);
  Dataset d = generate_dataset(mdp, behavior, 40, 20, 99);
  std::map<int, double> ret;
  for (const auto& rec : d.records) ret[rec.episode] += rec.r;
  double mean = 0.0;
  for (const auto& [ep, g] : ret) mean += g;
  mean /= ret.size();
  if (std::abs(wis_estimate(d, behavior, behavior, 1.0) - mean) > 1e-12) {
    detail = "WIS(target = behavior) differs from the sample mean";
    return false;
  }
  if (std::abs(ess({1, 1, 1, 1, 1}) - 5.0) > 1e-12) {
    detail = "ESS of equal weights is off";
    return false;
  }
  if (std::abs(ess({1, 1, 2}) - 8.0 / 3.0) > 1e-12) {
    detail = "ESS([1,1,2]) is off";
    return false;
  }
  return true;
}

// ---- criteria 8, 9, 11: require the simulator config ----

bool criterion8(const std::string& config_path, std::string& detail) {
  SepsisConfig config = SepsisConfig::from_json_file(config_path);
  TabularMdp mdp = enumerate_sepsis_mdp(config);
  SepsisOptimalResult opt = sepsis_optimal_policy(mdp, config);
  detail = "optimal value " + std::to_string(opt.value);
  return std::abs(opt.value - 0.736) <= 0.01;
}

bool criterion9(const std::string& config_path, std::string& detail) {
  ExperimentManifest manifest;
  manifest.seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  manifest.rho_grid = {0.0, 0.125};
  manifest.n_grid = {1000, 10000};
  manifest.modes = {"baseline", "factored"};
  manifest.state_features = "tabular";
  manifest.iterations = 50;
  manifest.lambda = 1e-3;
  manifest.max_len = 20;
  manifest.jobs = static_cast<int>(
      std::max(1u, std::thread::hardware_concurrency()));
  std::vector<ExperimentRow> rows =
      run_sepsis_experiment_rows(config_path, manifest);

  auto median_of = [&](double rho, int n, const std::string& mode) {
    std::vector<double> vals;
    for (const auto& r : rows)
      if (r.rho == rho && r.n == n && r.mode == mode) vals.push_back(r.value);
    std::sort(vals.begin(), vals.end());
    return 0.5 * (vals[vals.size() / 2] + vals[(vals.size() - 1) / 2]);
  };
  const double f0 = median_of(0.0, 1000, "factored");
  const double b0 = median_of(0.0, 1000, "baseline");
  const double gap_small = std::abs(median_of(0.125, 1000, "factored") -
                                    median_of(0.125, 1000, "baseline"));
  const double gap_large = std::abs(median_of(0.125, 10000, "factored") -
                                    median_of(0.125, 10000, "baseline"));
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "rho=0/n=1e3 factored %.3f vs baseline %.3f; "
                "rho=0.125 gap %.3f (n=1e3) -> %.3f (n=1e4)",
                f0, b0, gap_small, gap_large);
  detail = buf;
  return f0 > b0 && gap_large < gap_small;
}

bool criterion11(const std::string& config_path, std::string& detail) {
  ExperimentManifest manifest;
  manifest.seeds = {0, 1};
  manifest.rho_grid = {0.125};
  manifest.n_grid = {200};
  manifest.modes = {"baseline", "factored"};
  manifest.state_features = "tabular";
  manifest.iterations = 10;
  manifest.jobs = 2;
  fs::path base = fs::temp_directory_path() / "faqtor_acceptance";
  fs::remove_all(base);
  std::ostringstream sink;
  run_sepsis_experiment(sink, config_path, manifest, (base / "a").string());
  run_sepsis_experiment(sink, config_path, manifest, (base / "b").string());
  auto slurp = [](const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };
  const bool same =
      slurp(base / "a" / "results.csv") == slurp(base / "b" / "results.csv") &&
      slurp(base / "a" / "summary.csv") == slurp(base / "b" / "summary.csv");
  if (!same) detail = "reruns differ";
  fs::remove_all(base);
  return same;
}

}  // namespace

int main() {
  run_timed(criterion1, 1, "featurization matrices");
  run_timed(criterion2, 2, "gallery exactness");
  run_timed(criterion3, 3, "omitted-variable-bias closed form");
  run_timed(criterion4, 4, "bias/suboptimality regions");
  run_timed(criterion5, 5, "soundness on random compositions");
  run_timed(criterion6, 6, "single-condition witnesses");
  run_timed(criterion7, 7, "complexity-bound ordering");

  const std::string config_path = FAQTOR_SEPSIS_CONFIG;
  const bool have_config = fs::exists(config_path);
  if (!have_config) {
    std::printf(
        "criterion  8 [SKIP] reference dynamics config not found at %s -- "
        "transcribe the simulator tables into that file to enable the "
        "simulator criteria\n",
        config_path.c_str());
    std::printf("criterion  9 [SKIP] requires the reference config\n");
  } else {
    run_timed([&](std::string& d) { return criterion8(config_path, d); }, 8,
              "simulator optimal value");
    run_timed([&](std::string& d) { return criterion9(config_path, d); }, 9,
              "offline-learning trend");
  }
  run_timed(criterion10, 10, "off-policy evaluation identities");
  if (have_config) {
    run_timed([&](std::string& d) { return criterion11(config_path, d); }, 11,
              "experiment determinism");
  } else {
    std::printf("criterion 11 [SKIP] requires the reference config\n");
  }

  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
