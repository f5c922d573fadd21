#include "faqtor/offline.hpp"

#include "faqtor/dp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace faqtor {

namespace {

std::string format_double(double v) {
  char tmp[32];
  if (v == static_cast<long long>(v) && std::abs(v) < 1e15)
    std::snprintf(tmp, sizeof tmp, "%lld", static_cast<long long>(v));
  else
    std::snprintf(tmp, sizeof tmp, "%.17g", v);
  return tmp;
}

}  // namespace

Policy make_behavior_policy(const Policy& optimal, double rho) {
  if (rho < 0.0 || rho > 1.0)
    throw std::invalid_argument("make_behavior_policy: rho out of [0, 1]");
  if (!optimal.deterministic())
    throw std::invalid_argument(
        "make_behavior_policy: reference policy must be deterministic");
  const int S = optimal.n_states();
  const int A = optimal.n_actions();
  Eigen::MatrixXd probs =
      Eigen::MatrixXd::Constant(S, A, (1.0 - rho) / (A - 1));
  for (int s = 0; s < S; ++s) probs(s, optimal.action_at(s)) = rho;
  return Policy(std::move(probs), rho == 1.0);
}

void Dataset::write_csv(std::ostream& os) const {
  os << "episode,t,s,a,r,s_next,done\n";
  std::string buf;
  for (const auto& rec : records) {
    buf.clear();
    buf += std::to_string(rec.episode);
    buf += ',';
    buf += std::to_string(rec.t);
    buf += ',';
    buf += std::to_string(rec.s);
    buf += ',';
    buf += std::to_string(rec.a);
    buf += ',';
    buf += format_double(rec.r);
    buf += ',';
    buf += std::to_string(rec.s_next);
    buf += ',';
    buf += rec.done ? '1' : '0';
    buf += '\n';
    os << buf;
  }
}

void Dataset::write_csv_file(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(os);
}

void Dataset::write_sidecar_file(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  nlohmann::json doc;
  doc["seed"] = seed;
  doc["spec"] = spec;
  doc["n_records"] = records.size();
  os << doc.dump(2) << "\n";
}

Dataset Dataset::read_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  Dataset out;
  std::string line;
  if (!std::getline(is, line) || line != "episode,t,s,a,r,s_next,done")
    throw std::runtime_error("unexpected dataset header in " + path);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    TransitionRecord rec;
    int done = 0;
    if (std::sscanf(line.c_str(), "%d,%d,%d,%d,%lf,%d,%d", &rec.episode,
                    &rec.t, &rec.s, &rec.a, &rec.r, &rec.s_next, &done) != 7)
      throw std::runtime_error("malformed dataset row: " + line);
    rec.done = done != 0;
    out.records.push_back(rec);
  }
  return out;
}

namespace {

int sample_action(const Policy& pi, int s, Pcg32& rng) {
  const double u = rng.next_double();
  double acc = 0.0;
  const int A = pi.n_actions();
  for (int a = 0; a + 1 < A; ++a) {
    acc += pi.probs()(s, a);
    if (u < acc) return a;
  }
  return A - 1;
}

int sample_next(const SparseRow& row, Pcg32& rng) {
  const double u = rng.next_double();
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < row.idx.size(); ++k) {
    acc += row.p[k];
    if (u < acc) return row.idx[k];
  }
  return row.idx.back();
}

int sample_initial(const Eigen::VectorXd& mu0, Pcg32& rng) {
  const double u = rng.next_double();
  double acc = 0.0;
  int last = 0;
  for (int s = 0; s < mu0.size(); ++s) {
    if (mu0[s] == 0.0) continue;
    last = s;
    acc += mu0[s];
    if (u < acc) return s;
  }
  return last;
}

}  // namespace

Dataset generate_dataset(const TabularMdp& mdp, const Policy& behavior,
                         int n_episodes, int max_len, std::uint64_t seed) {
  if (n_episodes < 1)
    throw std::invalid_argument("generate_dataset: n_episodes must be >= 1");
  Dataset out;
  out.seed = seed;
  out.spec = "tabular-mdp n_episodes=" + std::to_string(n_episodes) +
             " max_len=" + std::to_string(max_len);
  const std::vector<bool> absorbing = mdp.absorbing_zero_reward_states();
  for (int ep = 0; ep < n_episodes; ++ep) {
    Pcg32 rng(seed, seed ^ static_cast<std::uint64_t>(ep));
    int s = sample_initial(mdp.initial_dist(), rng);
    for (int t = 0; t < max_len; ++t) {
      const int a = sample_action(behavior, s, rng);
      const int s2 = sample_next(mdp.row(s, a), rng);
      const bool done = absorbing[s2];
      out.records.push_back({ep, t, s, a, mdp.reward()(s, a), s2, done});
      if (done) break;
      s = s2;
    }
  }
  return out;
}

Dataset generate_sepsis_dataset(const SepsisConfig& config,
                                const Policy& behavior, int n_episodes,
                                int max_len, std::uint64_t seed) {
  if (n_episodes < 1)
    throw std::invalid_argument("generate_sepsis_dataset: n_episodes >= 1");
  Dataset out;
  out.seed = seed;
  out.spec = "sepsis-sim n_episodes=" + std::to_string(n_episodes) +
             " max_len=" + std::to_string(max_len);
  for (int ep = 0; ep < n_episodes; ++ep) {
    Pcg32 rng(seed, seed ^ static_cast<std::uint64_t>(ep));
    SepsisState s = sepsis_initial_state(rng, config);
    for (int t = 0; t < max_len; ++t) {
      const int si = sepsis_state_index(s);
      const int a = sample_action(behavior, si, rng);
      const SepsisStepResult step =
          sepsis_step(s, SepsisAction::from_index(a), rng, config);
      out.records.push_back({ep, t, si, a, step.reward,
                             sepsis_state_index(step.next), step.done});
      if (step.done) break;
      s = step.next;
    }
  }
  return out;
}

namespace {

// Rows of the condensed sub-action featurization, one per joint action.
Eigen::MatrixXd action_feature_rows(const FactoredActionSpace& space,
                                    ActionFeatures mode) {
  const int A = space.total();
  if (mode == ActionFeatures::baseline_combinatorial)
    return Eigen::MatrixXd::Identity(A, A);
  int cols = 1;
  for (int c : space.cardinalities()) cols += c - 1;
  Eigen::MatrixXd af = Eigen::MatrixXd::Zero(A, cols);
  for (int a = 0; a < A; ++a) {
    af(a, 0) = 1.0;
    int off = 1;
    for (int d = 0; d < space.dims(); ++d) {
      const int sub = space.sub_action(a, d);
      if (sub > 0) af(a, off + sub - 1) = 1.0;
      off += space.cardinality(d) - 1;
    }
  }
  return af;
}

struct AggregatedData {
  // unique (s, a) pairs with visit counts and per-(s', r, done) splits
  struct Cell {
    int s = 0;
    int a = 0;
    double count = 0.0;
    std::vector<int> s_next;
    std::vector<double> r;
    std::vector<char> done;
    std::vector<double> n;
  };
  std::vector<Cell> cells;
  std::vector<int> states_seen;
};

AggregatedData aggregate(const Dataset& dataset, int n_actions) {
  std::map<std::pair<int, int>, std::map<std::tuple<int, long long, char>,
                                         std::pair<double, double>>>
      acc;  // (s,a) -> (s', r-bits, done) -> (count, r)
  for (const auto& rec : dataset.records) {
    long long rbits;
    static_assert(sizeof rbits == sizeof rec.r);
    std::memcpy(&rbits, &rec.r, sizeof rbits);
    auto& cell = acc[{rec.s, rec.a}][{rec.s_next, rbits,
                                      static_cast<char>(rec.done)}];
    cell.first += 1.0;
    cell.second = rec.r;
  }
  AggregatedData out;
  std::map<int, bool> seen;
  for (const auto& [sa, splits] : acc) {
    AggregatedData::Cell cell;
    cell.s = sa.first;
    cell.a = sa.second;
    seen[sa.first] = true;
    for (const auto& [key, cnt_r] : splits) {
      cell.s_next.push_back(std::get<0>(key));
      seen[std::get<0>(key)] = true;
      cell.r.push_back(cnt_r.second);
      cell.done.push_back(std::get<2>(key));
      cell.n.push_back(cnt_r.first);
      cell.count += cnt_r.first;
    }
    out.cells.push_back(std::move(cell));
  }
  for (const auto& [s, _] : seen) out.states_seen.push_back(s);
  (void)n_actions;
  return out;
}

}  // namespace

FqiResult fqi(const Dataset& dataset, int n_states,
              const FactoredActionSpace& space, const FqiConfig& config,
              const Eigen::MatrixXd* compact_features) {
  if (dataset.records.empty())
    throw std::invalid_argument("fqi: dataset is empty");
  if (config.lambda < 0.0)
    throw std::invalid_argument("fqi: lambda must be >= 0");
  if (config.clip_lo > config.clip_hi)
    throw std::invalid_argument("fqi: empty clip range");
  const int A = space.total();
  const Eigen::MatrixXd af =
      action_feature_rows(space, config.action_features);
  const int k = static_cast<int>(af.cols());
  const AggregatedData agg = aggregate(dataset, A);

  const bool tabular =
      config.state_features == StateFeatures::tabular_one_hot;
  if (!tabular && compact_features == nullptr)
    throw std::invalid_argument("fqi: compact features matrix required");
  const Eigen::MatrixXd* F = compact_features;
  const int d = tabular ? n_states : static_cast<int>(F->cols());
  if (!tabular && F->rows() < n_states)
    throw std::invalid_argument("fqi: feature matrix is missing states");

  // Pre-factor the normal matrix; the design never changes across
  // iterations, only the targets do.
  Eigen::LLT<Eigen::MatrixXd> dense_chol;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> per_state_chol;
  std::vector<std::vector<int>> state_cells(n_states);
  if (!tabular) {
    Eigen::MatrixXd normal =
        config.lambda * Eigen::MatrixXd::Identity(d * k, d * k);
    Eigen::VectorXd row(d * k);
    for (const auto& cell : agg.cells) {
      const Eigen::VectorXd x = F->row(cell.s).transpose();
      const Eigen::VectorXd a_feat = af.row(cell.a).transpose();
      // kron(a_feat, x): block j holds a_feat[j] * x
      for (int j = 0; j < k; ++j) row.segment(j * d, d) = a_feat[j] * x;
      normal.selfadjointView<Eigen::Lower>().rankUpdate(row, cell.count);
    }
    dense_chol.compute(normal.selfadjointView<Eigen::Lower>());
    if (dense_chol.info() != Eigen::Success)
      throw std::runtime_error("fqi: normal matrix factorization failed");
  } else if (config.action_features == ActionFeatures::factored) {
    for (const auto& cell : agg.cells)
      state_cells[cell.s].push_back(
          static_cast<int>(&cell - agg.cells.data()));
    per_state_chol.resize(n_states);
    for (int s = 0; s < n_states; ++s) {
      if (state_cells[s].empty()) continue;
      Eigen::MatrixXd normal =
          config.lambda * Eigen::MatrixXd::Identity(k, k);
      for (int ci : state_cells[s]) {
        const auto& cell = agg.cells[ci];
        const Eigen::VectorXd a_feat = af.row(cell.a).transpose();
        normal.selfadjointView<Eigen::Lower>().rankUpdate(a_feat, cell.count);
      }
      if (config.lambda == 0.0)
        normal += 1e-12 * Eigen::MatrixXd::Identity(k, k);
      per_state_chol[s].compute(normal.selfadjointView<Eigen::Lower>());
      if (per_state_chol[s].info() != Eigen::Success)
        throw std::runtime_error("fqi: per-state factorization failed");
    }
  }

  FqiResult result;
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n_states, A);
  for (int it = 0; it < config.iterations; ++it) {
    // Bootstrapped, clipped targets averaged per (s, a).
    Eigen::VectorXd v_max = q.rowwise().maxCoeff();
    Eigen::VectorXd ybar(agg.cells.size());
    for (std::size_t i = 0; i < agg.cells.size(); ++i) {
      const auto& cell = agg.cells[i];
      double acc = 0.0;
      for (std::size_t j = 0; j < cell.s_next.size(); ++j) {
        double y = cell.r[j];
        if (!cell.done[j]) y += config.gamma * v_max[cell.s_next[j]];
        acc += cell.n[j] * std::clamp(y, config.clip_lo, config.clip_hi);
      }
      ybar[i] = acc / cell.count;
    }

    // Regression.
    if (!tabular) {
      Eigen::VectorXd b = Eigen::VectorXd::Zero(d * k);
      for (std::size_t i = 0; i < agg.cells.size(); ++i) {
        const auto& cell = agg.cells[i];
        const Eigen::VectorXd x = F->row(cell.s).transpose();
        const Eigen::VectorXd a_feat = af.row(cell.a).transpose();
        const double w = cell.count * ybar[i];
        for (int j = 0; j < k; ++j) b.segment(j * d, d) += w * a_feat[j] * x;
      }
      Eigen::VectorXd wvec = dense_chol.solve(b);
      Eigen::Map<const Eigen::MatrixXd> wmat(wvec.data(), d, k);
      q = (*F).topRows(n_states) * wmat * af.transpose();
    } else if (config.action_features == ActionFeatures::factored) {
      q.setZero();
      for (int s = 0; s < n_states; ++s) {
        if (state_cells[s].empty()) continue;
        Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
        for (int ci : state_cells[s]) {
          const auto& cell = agg.cells[ci];
          // ybar index equals cell index
          b += cell.count *
               ybar[static_cast<std::size_t>(ci)] * af.row(cell.a).transpose();
        }
        const Eigen::VectorXd w = per_state_chol[s].solve(b);
        q.row(s) = (af * w).transpose();
      }
    } else {
      q.setZero();
      for (std::size_t i = 0; i < agg.cells.size(); ++i) {
        const auto& cell = agg.cells[i];
        q(cell.s, cell.a) =
            cell.count * ybar[i] / (cell.count + config.lambda);
      }
    }

    std::vector<int> greedy(n_states, 0);
    for (int s = 0; s < n_states; ++s) {
      int best = 0;
      for (int a = 1; a < A; ++a)
        if (q(s, a) > q(s, best)) best = a;
      greedy[s] = best;
    }
    result.iterations.push_back(
        {Policy::deterministic_from(greedy, A), q});
  }
  return result;
}

double evaluate_policy_online(const TabularMdp& mdp, const Policy& policy,
                              int horizon, double gamma_eval) {
  Eigen::VectorXd v = finite_horizon_values(mdp, policy, horizon, gamma_eval);
  return mdp.initial_dist().dot(v);
}

std::vector<double> wis_weights(const Dataset& dataset, const Policy& target,
                                const Policy& behavior) {
  std::map<int, double> w;  // episode -> likelihood ratio
  for (const auto& rec : dataset.records) {
    const double pb = behavior.probs()(rec.s, rec.a);
    if (pb <= 0.0)
      throw std::runtime_error(
          "wis: behavior policy assigns zero probability to logged action "
          "(episode " + std::to_string(rec.episode) + ", t=" +
          std::to_string(rec.t) + ", s=" + std::to_string(rec.s) + ", a=" +
          std::to_string(rec.a) + ")");
    const double pt = target.probs()(rec.s, rec.a);
    auto [it, inserted] = w.try_emplace(rec.episode, 1.0);
    it->second *= pt / pb;
  }
  std::vector<double> out;
  out.reserve(w.size());
  for (const auto& [ep, weight] : w) out.push_back(weight);
  return out;
}

double wis_estimate(const Dataset& dataset, const Policy& target,
                    const Policy& behavior, double gamma_eval) {
  std::map<int, double> w, g, disc;
  for (const auto& rec : dataset.records) {
    const double pb = behavior.probs()(rec.s, rec.a);
    if (pb <= 0.0)
      throw std::runtime_error(
          "wis: behavior policy assigns zero probability to logged action "
          "(episode " + std::to_string(rec.episode) + ", t=" +
          std::to_string(rec.t) + ", s=" + std::to_string(rec.s) + ", a=" +
          std::to_string(rec.a) + ")");
    auto [wi, _] = w.try_emplace(rec.episode, 1.0);
    wi->second *= target.probs()(rec.s, rec.a) / pb;
    auto [di, d_inserted] = disc.try_emplace(rec.episode, 1.0);
    if (!d_inserted) di->second *= gamma_eval;
    g[rec.episode] += di->second * rec.r;
  }
  double num = 0.0, den = 0.0;
  for (const auto& [ep, weight] : w) {
    num += weight * g[ep];
    den += weight;
  }
  if (den == 0.0) throw std::runtime_error("wis: all weights are zero");
  return num / den;
}

double ess(const std::vector<double>& weights) {
  double sum = 0.0, sum_sq = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("ess: negative weight");
    sum += w;
    sum_sq += w * w;
  }
  if (sum_sq == 0.0)
    throw std::invalid_argument("ess: all weights are zero");
  return sum * sum / sum_sq;
}

Policy bcq_filter(const QTable& q, const Eigen::MatrixXd& behavior_counts,
                  double tau) {
  if (tau < 0.0 || tau > 1.0)
    throw std::invalid_argument("bcq_filter: tau out of [0, 1]");
  if (behavior_counts.minCoeff() < 0.0)
    throw std::invalid_argument("bcq_filter: negative counts");
  const int S = static_cast<int>(q.values.rows());
  const int A = static_cast<int>(q.values.cols());
  std::vector<int> actions(S, 0);
  for (int s = 0; s < S; ++s) {
    const double total = behavior_counts.row(s).sum();
    int best = -1;
    if (total > 0.0) {
      const double modal = behavior_counts.row(s).maxCoeff();
      for (int a = 0; a < A; ++a) {
        if (behavior_counts(s, a) / modal < tau) continue;
        if (best < 0 || q.values(s, a) > q.values(s, best)) best = a;
      }
    }
    if (best < 0) {
      best = 0;
      for (int a = 1; a < A; ++a)
        if (q.values(s, a) > q.values(s, best)) best = a;
    }
    actions[s] = best;
  }
  return Policy::deterministic_from(actions, A);
}

Eigen::MatrixXd behavior_counts(const Dataset& dataset, int n_states,
                                int n_actions) {
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n_states, n_actions);
  for (const auto& rec : dataset.records) counts(rec.s, rec.a) += 1.0;
  return counts;
}

void write_fqi_trace_csv(std::ostream& os, const std::string& mode,
                         const std::vector<double>& online_values) {
  os << "iteration,mode,online_value\n";
  for (std::size_t i = 0; i < online_values.size(); ++i)
    os << i + 1 << "," << mode << "," << format_double(online_values[i])
       << "\n";
}

}  // namespace faqtor
