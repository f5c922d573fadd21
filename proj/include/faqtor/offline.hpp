#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "faqtor/mdp.hpp"
#include "faqtor/pcg32.hpp"
#include "faqtor/sepsis.hpp"

namespace faqtor {

// rho on the optimal action, (1 - rho) / (|A| - 1) on each other action.
Policy make_behavior_policy(const Policy& optimal, double rho);

struct TransitionRecord {
  int episode = 0;
  int t = 0;
  int s = 0;
  int a = 0;
  double r = 0.0;
  int s_next = 0;
  bool done = false;
};

struct Dataset {
  std::vector<TransitionRecord> records;
  std::uint64_t seed = 0;
  std::string spec;  // human-readable generating description

  // header: episode,t,s,a,r,s_next,done
  void write_csv(std::ostream& os) const;
  void write_csv_file(const std::string& path) const;
  // sidecar: { "seed": ..., "spec": ..., "n_records": ... }
  void write_sidecar_file(const std::string& path) const;
  static Dataset read_csv_file(const std::string& path);
};

// Roll episodes from a tabular MDP.  Rewards come from the reward table;
// an episode ends when it enters an absorbing zero-reward state or at
// max_len (final record then carries done = false).  Episode k uses the
// generator Pcg32(seed, seed ^ k).
Dataset generate_dataset(const TabularMdp& mdp, const Policy& behavior,
                         int n_episodes, int max_len, std::uint64_t seed);

// Roll episodes from the sepsis simulator; per-transition rewards follow the
// terminal rules.  States are recorded as enumerated-MDP indices.
Dataset generate_sepsis_dataset(const SepsisConfig& config,
                                const Policy& behavior, int n_episodes,
                                int max_len, std::uint64_t seed);

enum class ActionFeatures { baseline_combinatorial, factored };
enum class StateFeatures { tabular_one_hot, compact };

struct FqiConfig {
  ActionFeatures action_features = ActionFeatures::baseline_combinatorial;
  StateFeatures state_features = StateFeatures::tabular_one_hot;
  int iterations = 50;
  double lambda = 1e-3;
  double clip_lo = -1.0;
  double clip_hi = 1.0;
  double gamma = 0.99;
};

struct FqiIteration {
  Policy greedy;
  Eigen::MatrixXd q;  // fitted Q over all states x actions
};

struct FqiResult {
  std::vector<FqiIteration> iterations;
  const FqiIteration& final() const { return iterations.back(); }
};

// Ridge-regularized fitted Q-iteration over x(s) (x) action-features.
// `n_states` covers every index appearing in the dataset; `compact_features`
// supplies x(s) rows when state_features == compact (ignored otherwise).
FqiResult fqi(const Dataset& dataset, int n_states,
              const FactoredActionSpace& space, const FqiConfig& config,
              const Eigen::MatrixXd* compact_features = nullptr);

// Exact truncated-horizon policy value from the MDP's initial distribution.
double evaluate_policy_online(const TabularMdp& mdp, const Policy& policy,
                              int horizon, double gamma_eval = 1.0);

// Weighted importance sampling with full-episode likelihood ratios.
// Throws when the behavior policy gives a logged action zero probability.
double wis_estimate(const Dataset& dataset, const Policy& target,
                    const Policy& behavior, double gamma_eval);

// Per-episode importance weights (exposed for ESS computations).
std::vector<double> wis_weights(const Dataset& dataset, const Policy& target,
                                const Policy& behavior);

// (sum w)^2 / sum w^2; throws on an all-zero weight vector.
double ess(const std::vector<double>& weights);

// Count-based discrete BCQ: allow actions whose estimated behavior
// probability is within tau of the modal one, then act greedily on q.
// Unvisited states fall back to unrestricted greedy.
Policy bcq_filter(const QTable& q, const Eigen::MatrixXd& behavior_counts,
                  double tau);

// (s, a) visit counts of a dataset.
Eigen::MatrixXd behavior_counts(const Dataset& dataset, int n_states,
                                int n_actions);

// Per-iteration learning trace, header: iteration,mode,online_value.
void write_fqi_trace_csv(std::ostream& os, const std::string& mode,
                         const std::vector<double>& online_values);

}  // namespace faqtor
