#include "faqtor/runners.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <ostream>
#include <thread>

#include "faqtor/bandit.hpp"
#include "faqtor/dp.hpp"
#include "faqtor/factorization.hpp"
#include "faqtor/gallery.hpp"
#include "faqtor/mdp_json.hpp"
#include "faqtor/offline.hpp"
#include "faqtor/sepsis.hpp"
#include "faqtor/svg.hpp"

namespace faqtor {

namespace {

std::string fmt(double v) {
  char buf[32];
  if (v == static_cast<long long>(v) && std::abs(v) < 1e15)
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
  else
    std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

QTable evaluate_fixture(const GalleryFixture& f) {
  if (f.eval_horizon > 0) return h_step_q(f.mdp, f.policy, f.eval_horizon);
  return policy_evaluation_exact(f.mdp, f.policy);
}

bool close_all(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
               double tol) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a - b).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

int run_gallery(std::ostream& os, const std::string& only, double tol) {
  auto gallery = build_gallery();
  if (!only.empty() && gallery.find(only) == gallery.end()) {
    os << "unknown fixture: " << only << "\n";
    return 2;
  }
  int failures = 0;
  int checked = 0;
  for (const auto& [name, f] : gallery) {
    if (!only.empty() && name != only) continue;
    ++checked;
    QTable q = evaluate_fixture(f);
    bool ok = true;
    std::string why;

    if (f.expected_q.size() > 0 && !close_all(q.values, f.expected_q, tol)) {
      ok = false;
      why += " q-table";
    }
    if (f.expected_q_s0.size() > 0) {
      Eigen::VectorXd row0 = q.values.row(0).transpose();
      if ((row0 - f.expected_q_s0).cwiseAbs().maxCoeff() > tol) {
        ok = false;
        why += " q(s0)";
      }
      if (f.expected_fit_s0.size() > 0) {
        FactoredFit fit = fit_factored_q(row0, f.mdp.actions());
        if ((fit.fitted - f.expected_fit_s0).cwiseAbs().maxCoeff() > tol) {
          ok = false;
          why += " fit(s0)";
        }
      }
    }
    if (f.decomposes_exactly) {
      auto report = check_decomposability(q, f.mdp.actions(), tol);
      if (!report.all_decomposable) {
        ok = false;
        why += " residual";
      }
    }
    os << (ok ? "PASS " : "FAIL ") << name;
    if (!ok) os << " (" << why << " )";
    os << "\n";
    failures += ok ? 0 : 1;
  }
  os << checked - failures << "/" << checked << " fixtures passed\n";
  return failures == 0 ? 0 : 1;
}

namespace {

AbstractionSet read_abstraction_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  nlohmann::json doc = nlohmann::json::parse(is);
  auto maps = doc.at("maps").get<std::vector<std::vector<int>>>();
  if (doc.contains("cardinalities"))
    return AbstractionSet(std::move(maps),
                          doc.at("cardinalities").get<std::vector<int>>());
  return AbstractionSet::infer(std::move(maps));
}

void print_report(std::ostream& os, const char* name,
                  const ConditionReport& r) {
  os << name << ": " << (r.satisfied ? "satisfied" : "violated") << "\n";
  std::size_t shown = 0;
  for (const auto& v : r.violations) {
    if (++shown > 5) {
      os << "  ... " << r.violations.size() - 5 << " more\n";
      break;
    }
    os << "  witness state=" << v.state;
    if (v.action >= 0) os << " action=" << v.action;
    os << " gap=" << fmt(v.gap) << " : " << v.detail << "\n";
  }
}

}  // namespace

int run_check(std::ostream& os, const std::string& mdp_path,
              const std::string& abstraction_path,
              const std::string& policy_path, double tol) {
  TabularMdp mdp = read_mdp_json_file(mdp_path);
  AbstractionSet phi = read_abstraction_json_file(abstraction_path);
  if (phi.n_states() != mdp.n_states())
    throw std::runtime_error("abstraction covers a different state count");

  if (policy_path.empty()) {
    auto t = check_transition_condition(mdp, phi, tol);
    auto r = check_reward_condition(mdp, phi, tol);
    print_report(os, "transition", t);
    print_report(os, "reward", r);
    const bool all = t.satisfied && r.satisfied;
    os << (all ? "guaranteed (given a factored policy)\n" : "not guaranteed\n");
    return all ? 0 : 1;
  }

  Policy pi = read_policy_json_file(policy_path, mdp.n_actions());
  Theorem1Report rep = check_theorem1(mdp, pi, phi, tol);
  print_report(os, "transition", rep.transition);
  print_report(os, "reward", rep.reward);
  print_report(os, "policy", rep.policy);
  os << rep.verdict << "\n";
  if (rep.evaluated)
    os << "max decomposition residual: " << fmt(rep.decomposability.max_residual)
       << "\n";
  return rep.guaranteed ? 0 : 1;
}

int run_decompose(std::ostream& os, const std::string& mdp_path,
                  const std::string& policy_path, double tol) {
  TabularMdp mdp = read_mdp_json_file(mdp_path);
  Policy pi = read_policy_json_file(policy_path, mdp.n_actions());
  QTable q = mdp.gamma() < 1.0 ? policy_evaluation_exact(mdp, pi)
                               : h_step_q(mdp, pi, 256);
  auto report = check_decomposability(q, mdp.actions(), tol);
  write_decomposability_csv(os, report);
  return report.all_decomposable ? 0 : 1;
}

int run_bandit_heatmap(std::ostream& os, const BanditHeatmapArgs& args) {
  HeatmapGrid grid = heatmap_sweep(args.alpha_min, args.alpha_max,
                                   args.beta_min, args.beta_max, args.steps);
  if (!args.out_csv.empty()) {
    std::ofstream csv(args.out_csv, std::ios::binary);
    if (!csv)
      throw std::runtime_error("cannot open " + args.out_csv +
                               " for writing");
    csv << "alpha,beta,rmse,suboptimality\n";
    std::string buf;
    for (const auto& c : grid.cells) {
      buf.clear();
      buf += fmt(c.alpha);
      buf += ',';
      buf += fmt(c.beta);
      buf += ',';
      buf += fmt(c.rmse);
      buf += ',';
      buf += fmt(c.suboptimality);
      buf += '\n';
      csv << buf;
    }
    os << "wrote " << args.out_csv << " (" << grid.cells.size() << " cells)\n";
  }
  std::string subopt_path = args.out_svg_subopt;
  if (subopt_path.empty() && !args.out_svg_rmse.empty()) {
    std::filesystem::path p(args.out_svg_rmse);
    std::filesystem::path derived = p.parent_path() /
        (p.stem().string() + "_suboptimality" + p.extension().string());
    subopt_path = derived.string();
  }
  auto emit_svg = [&](const std::string& path, bool use_rmse) {
    if (path.empty()) return;
    SvgHeatmapSpec spec;
    spec.n_rows = grid.beta_steps;
    spec.n_cols = grid.alpha_steps;
    spec.values.resize(grid.cells.size());
    double vmax = 0.0;
    for (int i = 0; i < grid.alpha_steps; ++i) {
      for (int j = 0; j < grid.beta_steps; ++j) {
        const auto& c = grid.cells[i * grid.beta_steps + j];
        const double v = use_rmse ? c.rmse : c.suboptimality;
        spec.values[j * grid.alpha_steps + i] = v;
        vmax = std::max(vmax, std::abs(v));
      }
    }
    spec.v_min = -vmax;
    spec.v_max = vmax;
    spec.title = use_rmse ? "value approximation error" : "suboptimality";
    write_svg_heatmap_file(spec, path);
    os << "wrote " << path << "\n";
  };
  emit_svg(args.out_svg_rmse, true);
  emit_svg(subopt_path, false);
  return 0;
}

int run_sepsis_enumerate(std::ostream& os, const std::string& config_path,
                         const std::string& out_path) {
  SepsisConfig config = SepsisConfig::from_json_file(config_path);
  TabularMdp mdp = enumerate_sepsis_mdp(config);
  write_mdp_json_file(mdp, out_path);
  os << "wrote " << out_path << " (" << mdp.n_states() << " states, "
     << mdp.n_actions() << " actions)\n";
  return 0;
}

ExperimentManifest ExperimentManifest::from_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open manifest " + path);
  nlohmann::json doc = nlohmann::json::parse(is);
  ExperimentManifest m;
  m.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
  m.rho_grid = doc.at("rho").get<std::vector<double>>();
  m.n_grid = doc.at("n_episodes").get<std::vector<int>>();
  m.modes = doc.value("modes",
                      std::vector<std::string>{"baseline", "factored"});
  m.state_features = doc.value("state_features", std::string("tabular"));
  m.iterations = doc.value("iterations", 50);
  m.lambda = doc.value("lambda", 1e-3);
  m.gamma = doc.value("gamma", 0.0);
  m.max_len = doc.value("max_len", 20);
  m.jobs = doc.value("jobs", 1);
  m.traces = doc.value("traces", false);
  if (m.seeds.empty() || m.rho_grid.empty() || m.n_grid.empty() ||
      m.modes.empty())
    throw std::runtime_error("manifest: seeds and grids must be nonempty");
  for (const auto& mode : m.modes)
    if (mode != "baseline" && mode != "factored")
      throw std::runtime_error("manifest: unknown mode " + mode);
  if (m.state_features != "tabular" && m.state_features != "compact")
    throw std::runtime_error("manifest: unknown state_features " +
                             m.state_features);
  return m;
}

namespace {

struct SepsisExperimentContext {
  SepsisConfig config;
  TabularMdp mdp;
  SepsisOptimalResult opt;

  explicit SepsisExperimentContext(const std::string& config_path)
      : config(SepsisConfig::from_json_file(config_path)),
        mdp(enumerate_sepsis_mdp(config)),
        opt(sepsis_optimal_policy(mdp, config)) {}
};

std::vector<ExperimentRow> experiment_rows_with_context(
    const SepsisExperimentContext& ctx, const ExperimentManifest& manifest) {
  const SepsisConfig& config = ctx.config;
  const TabularMdp& mdp = ctx.mdp;
  const SepsisOptimalResult& opt = ctx.opt;

  Eigen::MatrixXd features(kSepsisStates, kSepsisFeatureBits);
  for (int s = 0; s < kSepsisLiveStates; ++s)
    features.row(s) = sepsis_featurize(sepsis_state_from_index(s)).transpose();
  features.row(kSepsisDeathState).setZero();
  features.row(kSepsisDischargeState).setZero();

  struct Cell {
    std::uint64_t seed;
    double rho;
    int n;
    std::string mode;
  };
  std::vector<Cell> cells;
  for (double rho : manifest.rho_grid)
    for (int n : manifest.n_grid)
      for (const auto& mode : manifest.modes)
        for (std::uint64_t seed : manifest.seeds)
          cells.push_back({seed, rho, n, mode});

  const double gamma_fqi =
      manifest.gamma > 0.0 ? manifest.gamma : config.gamma_plan;

  auto run_cell = [&](const Cell& cell) -> ExperimentRow {
    Policy behavior = make_behavior_policy(opt.policy, cell.rho);
    Dataset data = generate_sepsis_dataset(config, behavior, cell.n,
                                           manifest.max_len, cell.seed);
    FqiConfig fc;
    fc.action_features = cell.mode == "factored"
                             ? ActionFeatures::factored
                             : ActionFeatures::baseline_combinatorial;
    fc.state_features = manifest.state_features == "compact"
                            ? StateFeatures::compact
                            : StateFeatures::tabular_one_hot;
    fc.iterations = manifest.iterations;
    fc.lambda = manifest.lambda;
    fc.gamma = gamma_fqi;
    FqiResult fit = fqi(data, kSepsisStates, mdp.actions(), fc, &features);
    ExperimentRow row{cell.seed, cell.rho, cell.n, cell.mode,
                      -std::numeric_limits<double>::infinity(), 0.0, {}};
    row.trace.reserve(fit.iterations.size());
    for (std::size_t i = 0; i < fit.iterations.size(); ++i) {
      const double v = evaluate_policy_online(mdp, fit.iterations[i].greedy,
                                              config.eval_horizon,
                                              config.gamma_eval);
      row.trace.push_back(v);
      row.value = std::max(row.value, v);
      if (i + 1 == fit.iterations.size()) row.value_final = v;
    }
    return row;
  };

  std::vector<ExperimentRow> rows(cells.size());
  const int jobs = std::max(1, manifest.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) rows[i] = run_cell(cells[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (int j = 0; j < jobs; ++j) {
      workers.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= cells.size()) return;
          rows[i] = run_cell(cells[i]);
        }
      });
    }
    for (auto& w : workers) w.join();
  }
  return rows;
}

}  // namespace

std::vector<ExperimentRow> run_sepsis_experiment_rows(
    const std::string& config_path, const ExperimentManifest& manifest) {
  SepsisExperimentContext ctx(config_path);
  return experiment_rows_with_context(ctx, manifest);
}

int run_sepsis_experiment(std::ostream& os, const std::string& config_path,
                          const ExperimentManifest& manifest,
                          const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  SepsisExperimentContext ctx(config_path);
  const SepsisOptimalResult& opt = ctx.opt;

  std::vector<ExperimentRow> rows =
      experiment_rows_with_context(ctx, manifest);

  const std::string results_path = (fs::path(out_dir) / "results.csv").string();
  {
    std::ofstream csv(results_path, std::ios::binary);
    csv << "seed,rho,n,mode,value,value_final\n";
    for (const auto& r : rows)
      csv << r.seed << "," << fmt(r.rho) << "," << r.n << "," << r.mode << ","
          << fmt(r.value) << "," << fmt(r.value_final) << "\n";
  }
  if (manifest.traces) {
    fs::create_directories(fs::path(out_dir) / "traces");
    for (const auto& r : rows) {
      char name[128];
      std::snprintf(name, sizeof name, "trace_seed%llu_rho%g_n%d_%s.csv",
                    static_cast<unsigned long long>(r.seed), r.rho, r.n,
                    r.mode.c_str());
      std::ofstream trace(fs::path(out_dir) / "traces" / name,
                          std::ios::binary);
      write_fqi_trace_csv(trace, r.mode, r.trace);
    }
  }

  // Median / IQR summary per (rho, n, mode) over seeds.
  auto quantile = [](std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * (v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - lo;
    return v[lo] * (1.0 - frac) + v[hi] * frac;
  };
  const std::string summary_path = (fs::path(out_dir) / "summary.csv").string();
  {
    std::ofstream csv(summary_path, std::ios::binary);
    csv << "rho,n,mode,median,q1,q3,optimal_value\n";
    for (double rho : manifest.rho_grid) {
      for (int n : manifest.n_grid) {
        for (const auto& mode : manifest.modes) {
          std::vector<double> vals;
          for (const auto& r : rows)
            if (r.rho == rho && r.n == n && r.mode == mode)
              vals.push_back(r.value);
          if (vals.empty()) continue;
          csv << fmt(rho) << "," << n << "," << mode << ","
              << fmt(quantile(vals, 0.5)) << "," << fmt(quantile(vals, 0.25))
              << "," << fmt(quantile(vals, 0.75)) << "," << fmt(opt.value)
              << "\n";
        }
      }
    }
  }
  os << "wrote " << results_path << " (" << rows.size() << " rows)\n";
  os << "wrote " << summary_path << "\n";
  os << "optimal policy value (discounted, start distribution): "
     << fmt(opt.value) << "\n";
  return 0;
}

std::string resolve_config_path(const std::string& cli_value) {
  if (!cli_value.empty()) return cli_value;
  if (const char* env = std::getenv("FAQTOR_CONFIG")) return env;
  return "";
}

}  // namespace faqtor
