#include <CLI11.hpp>
#include <exception>
#include <iostream>

#include "faqtor/runners.hpp"

int main(int argc, char** argv) {
  CLI::App app{"factored-action offline RL laboratory"};
  app.require_subcommand(1);

  // gallery
  std::string fixture;
  double gallery_tol = 1e-9;
  auto* gallery = app.add_subcommand(
      "gallery", "evaluate the executable example fixtures");
  gallery->add_option("--fixture", fixture, "run a single fixture by name");
  gallery->add_option("--tol", gallery_tol, "comparison tolerance");

  // check
  std::string mdp_path, abstraction_path, policy_path;
  double check_tol = 1e-9;
  auto* check = app.add_subcommand(
      "check", "check the sufficient conditions for an MDP + abstraction");
  check->add_option("--mdp", mdp_path, "MDP JSON document")->required();
  check->add_option("--abstraction", abstraction_path,
                    "abstraction JSON document")->required();
  check->add_option("--policy", policy_path,
                    "policy JSON document (optional)");
  check->add_option("--tol", check_tol, "comparison tolerance");

  // decompose
  std::string d_mdp, d_policy;
  double d_tol = 1e-8;
  auto* decompose = app.add_subcommand(
      "decompose", "per-state decomposition residuals of an exact Q");
  decompose->add_option("--mdp", d_mdp, "MDP JSON document")->required();
  decompose->add_option("--policy", d_policy, "policy JSON document")
      ->required();
  decompose->add_option("--tol", d_tol, "decomposability tolerance");

  // bandit-heatmap
  faqtor::BanditHeatmapArgs hm;
  auto* heatmap = app.add_subcommand(
      "bandit-heatmap", "bias / suboptimality sweep of the 2-d bandit");
  heatmap->add_option("--alpha-min", hm.alpha_min);
  heatmap->add_option("--alpha-max", hm.alpha_max);
  heatmap->add_option("--beta-min", hm.beta_min);
  heatmap->add_option("--beta-max", hm.beta_max);
  heatmap->add_option("--steps", hm.steps, "grid points per axis");
  heatmap->add_option("--out-csv", hm.out_csv, "grid CSV path");
  heatmap->add_option("--out-svg", hm.out_svg_rmse,
                      "error heatmap SVG path");
  heatmap->add_option("--out-svg-subopt", hm.out_svg_subopt,
                      "suboptimality heatmap SVG path");

  // sepsis-enumerate
  std::string config_path, out_path;
  auto* enumerate = app.add_subcommand(
      "sepsis-enumerate", "enumerate the simulator into an MDP JSON document");
  enumerate->add_option("--config", config_path,
                        "simulator config (or FAQTOR_CONFIG)");
  enumerate->add_option("--out", out_path, "output path")->required();

  // sepsis-experiment
  std::string manifest_path, out_dir = ".", exp_config;
  int jobs = 0;
  long long seed_override = -1;
  auto* experiment = app.add_subcommand(
      "sepsis-experiment", "offline-learning sweep over the manifest grid");
  experiment->add_option("--manifest", manifest_path, "experiment manifest")
      ->required();
  experiment->add_option("--config", exp_config,
                         "simulator config (or FAQTOR_CONFIG)");
  experiment->add_option("--out-dir", out_dir, "output directory");
  experiment->add_option("--jobs", jobs, "worker threads (overrides manifest)");
  experiment->add_option("--seed", seed_override,
                         "run a single seed instead of the manifest's list");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gallery->parsed())
      return faqtor::run_gallery(std::cout, fixture, gallery_tol);
    if (check->parsed())
      return faqtor::run_check(std::cout, mdp_path, abstraction_path,
                               policy_path, check_tol);
    if (decompose->parsed())
      return faqtor::run_decompose(std::cout, d_mdp, d_policy, d_tol);
    if (heatmap->parsed()) return faqtor::run_bandit_heatmap(std::cout, hm);
    if (enumerate->parsed()) {
      const std::string cfg = faqtor::resolve_config_path(config_path);
      if (cfg.empty()) {
        std::cerr << "no simulator config: pass --config or set "
                     "FAQTOR_CONFIG\n";
        return 2;
      }
      return faqtor::run_sepsis_enumerate(std::cout, cfg, out_path);
    }
    if (experiment->parsed()) {
      const std::string cfg = faqtor::resolve_config_path(exp_config);
      if (cfg.empty()) {
        std::cerr << "no simulator config: pass --config or set "
                     "FAQTOR_CONFIG\n";
        return 2;
      }
      faqtor::ExperimentManifest manifest =
          faqtor::ExperimentManifest::from_json_file(manifest_path);
      if (jobs > 0) manifest.jobs = jobs;
      if (seed_override >= 0)
        manifest.seeds = {static_cast<std::uint64_t>(seed_override)};
      return faqtor::run_sepsis_experiment(std::cout, cfg, manifest, out_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
