#pragma once

#include <array>
#include <string>
#include <vector>

#include "faqtor/mdp.hpp"
#include "faqtor/pcg32.hpp"

namespace faqtor {

// Discrete patient state.  Levels: hr/bp in {0 low, 1 normal, 2 high},
// o2 in {0 low, 1 normal}, glucose in {0 very low .. 4 very high}.
struct SepsisState {
  int hr = 1;
  int bp = 1;
  int o2 = 1;
  int glucose = 2;
  bool diabetic = false;
  bool abx_on = false;
  bool vaso_on = false;
  bool vent_on = false;

  // death / discharge marker once an episode has terminated
  enum class Outcome { alive, dead, discharged };
  Outcome outcome = Outcome::alive;

  int num_abnormal() const {
    return (hr != 1) + (bp != 1) + (o2 != 1) + (glucose != 2);
  }
  bool any_treatment() const { return abx_on || vaso_on || vent_on; }
  bool operator==(const SepsisState&) const = default;
};

// Joint treatment action, index = 4 abx + 2 vaso + vent.
struct SepsisAction {
  bool abx = false;
  bool vaso = false;
  bool vent = false;

  static SepsisAction from_index(int a) {
    return {(a & 4) != 0, (a & 2) != 0, (a & 1) != 0};
  }
  int index() const { return 4 * abx + 2 * vaso + vent; }
};

// Dynamics parameters; loaded from JSON so the shipped numbers stay data,
// not code.  Every conditional table is validated to sum to 1.
struct SepsisConfig {
  double p_diabetic = 0.2;
  double gamma_plan = 0.99;
  double gamma_eval = 1.0;
  int eval_horizon = 20;

  // initial per-variable distributions plus an abnormal-count admission
  // window [min_abnormal, max_abnormal]
  std::array<double, 3> init_hr{};
  std::array<double, 3> init_bp{};
  std::array<double, 2> init_o2{};
  std::array<double, 5> init_glucose_nondiabetic{};
  std::array<double, 5> init_glucose_diabetic{};
  int init_min_abnormal = 0;
  int init_max_abnormal = 4;

  // antibiotics
  double abx_on_hr_high_to_normal = 0.0;
  double abx_on_bp_high_to_normal = 0.0;
  double abx_withdraw_hr_normal_to_high = 0.0;
  double abx_withdraw_bp_normal_to_high = 0.0;
  // ventilation
  double vent_on_o2_low_to_normal = 0.0;
  double vent_withdraw_o2_normal_to_low = 0.0;
  // vasopressors
  double vaso_on_bp_up_one_nondiabetic = 0.0;
  double vaso_withdraw_bp_down_one_nondiabetic = 0.0;
  double vaso_on_bp_low_to_normal_diabetic = 0.0;
  double vaso_on_bp_low_to_high_diabetic = 0.0;
  double vaso_on_bp_normal_to_high_diabetic = 0.0;
  double vaso_on_glucose_up_one_diabetic = 0.0;
  double vaso_withdraw_bp_down_one_diabetic = 0.0;
  // spontaneous fluctuation of untreated vitals, one level each direction
  double fluctuate = 0.0;
  double glucose_fluctuate_diabetic = 0.0;
  // terminal rules
  int abnormal_for_death = 3;
  double reward_death = -1.0;
  double reward_discharge = 1.0;

  static SepsisConfig from_json_file(const std::string& path);
  void validate() const;
};

struct SepsisStepResult {
  SepsisState next;
  double reward = 0.0;
  bool done = false;
};

// One simulator transition.  Stage draws come in a fixed documented order
// (antibiotics hr, bp; ventilation o2; vasopressor bp, glucose; then
// fluctuation hr, bp, o2, glucose), each stage consuming draws only while
// active, so identical (state, action, rng state) gives identical outcomes.
SepsisStepResult sepsis_step(const SepsisState& state, SepsisAction action,
                             Pcg32& rng, const SepsisConfig& config);

// 1440 live states indexed mixed-radix over
// (hr 3, bp 3, o2 2, glucose 5, diabetic 2, abx 2, vaso 2, vent 2), most
// significant first; then death = 1440, discharge = 1441.
constexpr int kSepsisLiveStates = 1440;
constexpr int kSepsisDeathState = 1440;
constexpr int kSepsisDischargeState = 1441;
constexpr int kSepsisStates = 1442;
constexpr int kSepsisActions = 8;

int sepsis_state_index(const SepsisState& s);
SepsisState sepsis_state_from_index(int index);

// Exact enumeration into a TabularMdp (1442 states, factored actions
// [2, 2, 2], absorbing terminal states, admission-window initial
// distribution, discount = config.gamma_plan).
TabularMdp enumerate_sepsis_mdp(const SepsisConfig& config);

// One-hot encoding over the eight variable groups:
// hr(3) bp(3) o2(2) glucose(5) diabetic(2) abx(2) vaso(2) vent(2).
constexpr int kSepsisFeatureBits = 21;
Eigen::VectorXd sepsis_featurize(const SepsisState& s);

struct SepsisOptimalResult {
  Policy policy;           // greedy over the enumerated MDP
  double value = 0.0;      // discounted start-distribution value
  double value_h20 = 0.0;  // finite-horizon evaluation at gamma_eval
};

// Value iteration on the enumerated MDP at `gamma`; reports the
// start-distribution value of the fixed point and the truncated-episode
// evaluation of the greedy policy.
SepsisOptimalResult sepsis_optimal_policy(const TabularMdp& mdp,
                                          const SepsisConfig& config);

// Draw an admissible initial state (admission window applied by rejection).
SepsisState sepsis_initial_state(Pcg32& rng, const SepsisConfig& config);

}  // namespace faqtor
