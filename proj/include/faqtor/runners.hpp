#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace faqtor {

// Exit-code contract shared by every subcommand:
// 0 = success, 1 = verification failure, 2 = usage / input error.

// Evaluates every gallery fixture against its embedded tables and prints a
// pass/fail matrix.  `only` restricts to one fixture.
int run_gallery(std::ostream& os, const std::string& only = "",
                double tol = 1e-9);

// Theorem-1 condition check for an MDP + abstraction document (policy
// optional; without it only the transition and reward conditions run).
int run_check(std::ostream& os, const std::string& mdp_path,
              const std::string& abstraction_path,
              const std::string& policy_path, double tol);

// Decomposability report (CSV rows state,residual,decomposable) for the
// exact Q of a policy on an MDP.
int run_decompose(std::ostream& os, const std::string& mdp_path,
                  const std::string& policy_path, double tol);

struct BanditHeatmapArgs {
  double alpha_min = -4.0, alpha_max = 4.0;
  double beta_min = -4.0, beta_max = 4.0;
  int steps = 161;
  std::string out_csv;
  // --out-svg: error map at this path, suboptimality map alongside it with a
  // "_suboptimality" stem suffix unless out_svg_subopt overrides.
  std::string out_svg_rmse;
  std::string out_svg_subopt;
};

int run_bandit_heatmap(std::ostream& os, const BanditHeatmapArgs& args);

int run_sepsis_enumerate(std::ostream& os, const std::string& config_path,
                         const std::string& out_path);

struct ExperimentManifest {
  std::vector<std::uint64_t> seeds;
  std::vector<double> rho_grid;
  std::vector<int> n_grid;
  std::vector<std::string> modes;  // "baseline" / "factored"
  std::string state_features = "tabular";
  int iterations = 50;
  double lambda = 1e-3;
  double gamma = 0.0;  // 0 = use the config's planning discount
  int max_len = 20;
  int jobs = 1;
  bool traces = false;  // per-iteration trace CSVs under out_dir/traces/

  static ExperimentManifest from_json_file(const std::string& path);
};

struct ExperimentRow {
  std::uint64_t seed = 0;
  double rho = 0.0;
  int n = 0;
  std::string mode;
  double value = 0.0;         // best-iteration online value
  double value_final = 0.0;   // final-iteration online value
  std::vector<double> trace;  // online value per iteration
};

// Full sweep: dataset -> FQI -> exact truncated-horizon evaluation per
// (seed, rho, n, mode).  Deterministic given the manifest; cells may run on
// worker threads but rows always come back in grid order.
std::vector<ExperimentRow> run_sepsis_experiment_rows(
    const std::string& config_path, const ExperimentManifest& manifest);

// Writes results.csv and summary.csv under out_dir and prints progress.
int run_sepsis_experiment(std::ostream& os, const std::string& config_path,
                          const ExperimentManifest& manifest,
                          const std::string& out_dir);

// --config fallback: FAQTOR_CONFIG environment variable.
std::string resolve_config_path(const std::string& cli_value);

}  // namespace faqtor
