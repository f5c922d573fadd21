#include "faqtor/sepsis.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <map>
#include <stdexcept>

#include "faqtor/dp.hpp"

namespace faqtor {

namespace {

using nlohmann::json;

constexpr std::array<int, 8> kDims = {3, 3, 2, 5, 2, 2, 2, 2};

// level -> [(next level, prob)]; small fixed-capacity map
using LevelDist = std::vector<std::pair<int, double>>;

void add_mass(LevelDist& d, int level, double p) {
  if (p == 0.0) return;
  for (auto& [lv, q] : d) {
    if (lv == level) {
      q += p;
      return;
    }
  }
  d.emplace_back(level, p);
}

LevelDist apply_map(const LevelDist& d,
                    const std::function<LevelDist(int)>& f) {
  LevelDist out;
  for (const auto& [lv, p] : d)
    for (const auto& [lv2, p2] : f(lv)) add_mass(out, lv2, p * p2);
  return out;
}

LevelDist fluct_dist(int x, int lo, int hi, double step) {
  LevelDist out;
  add_mass(out, std::max(lo, x - 1), step);
  add_mass(out, std::min(hi, x + 1), step);
  add_mass(out, x, 1.0 - 2.0 * step);
  return out;
}

struct StageMaps {
  // Per-variable stochastic maps for one (state, action) pair, in the order
  // they compose.  Empty vector = identity.
  std::vector<std::function<LevelDist(int)>> hr, bp, o2, glucose;
};

StageMaps stage_maps(const SepsisState& s, SepsisAction a,
                     const SepsisConfig& c) {
  StageMaps m;
  const bool abx_active = a.abx || s.abx_on;
  const bool vaso_active = a.vaso || s.vaso_on;
  const bool vent_active = a.vent || s.vent_on;

  if (a.abx) {
    m.hr.push_back([&c](int x) -> LevelDist {
      if (x == 2) return {{1, c.abx_on_hr_high_to_normal},
                          {2, 1.0 - c.abx_on_hr_high_to_normal}};
      return {{x, 1.0}};
    });
    m.bp.push_back([&c](int x) -> LevelDist {
      if (x == 2) return {{1, c.abx_on_bp_high_to_normal},
                          {2, 1.0 - c.abx_on_bp_high_to_normal}};
      return {{x, 1.0}};
    });
  } else if (s.abx_on) {
    m.hr.push_back([&c](int x) -> LevelDist {
      if (x == 1) return {{2, c.abx_withdraw_hr_normal_to_high},
                          {1, 1.0 - c.abx_withdraw_hr_normal_to_high}};
      return {{x, 1.0}};
    });
    m.bp.push_back([&c](int x) -> LevelDist {
      if (x == 1) return {{2, c.abx_withdraw_bp_normal_to_high},
                          {1, 1.0 - c.abx_withdraw_bp_normal_to_high}};
      return {{x, 1.0}};
    });
  }

  if (a.vent) {
    m.o2.push_back([&c](int x) -> LevelDist {
      if (x == 0) return {{1, c.vent_on_o2_low_to_normal},
                          {0, 1.0 - c.vent_on_o2_low_to_normal}};
      return {{x, 1.0}};
    });
  } else if (s.vent_on) {
    m.o2.push_back([&c](int x) -> LevelDist {
      if (x == 1) return {{0, c.vent_withdraw_o2_normal_to_low},
                          {1, 1.0 - c.vent_withdraw_o2_normal_to_low}};
      return {{x, 1.0}};
    });
  }

  if (a.vaso) {
    if (!s.diabetic) {
      m.bp.push_back([&c](int x) -> LevelDist {
        if (x == 0 || x == 1)
          return {{x + 1, c.vaso_on_bp_up_one_nondiabetic},
                  {x, 1.0 - c.vaso_on_bp_up_one_nondiabetic}};
        return {{x, 1.0}};
      });
    } else {
      m.bp.push_back([&c](int x) -> LevelDist {
        if (x == 0)
          return {{1, c.vaso_on_bp_low_to_normal_diabetic},
                  {2, c.vaso_on_bp_low_to_high_diabetic},
                  {0, 1.0 - c.vaso_on_bp_low_to_normal_diabetic -
                          c.vaso_on_bp_low_to_high_diabetic}};
        if (x == 1)
          return {{2, c.vaso_on_bp_normal_to_high_diabetic},
                  {1, 1.0 - c.vaso_on_bp_normal_to_high_diabetic}};
        return {{x, 1.0}};
      });
      m.glucose.push_back([&c](int x) -> LevelDist {
        return {{std::min(4, x + 1), c.vaso_on_glucose_up_one_diabetic},
                {x, 1.0 - c.vaso_on_glucose_up_one_diabetic}};
      });
    }
  } else if (s.vaso_on) {
    const double p = s.diabetic ? c.vaso_withdraw_bp_down_one_diabetic
                                : c.vaso_withdraw_bp_down_one_nondiabetic;
    m.bp.push_back([p](int x) -> LevelDist {
      return {{std::max(0, x - 1), p}, {x, 1.0 - p}};
    });
  }

  // Spontaneous fluctuation of anything no treatment stage touched.
  if (!abx_active) {
    m.hr.push_back(
        [&c](int x) { return fluct_dist(x, 0, 2, c.fluctuate); });
  }
  if (!abx_active && !vaso_active) {
    m.bp.push_back(
        [&c](int x) { return fluct_dist(x, 0, 2, c.fluctuate); });
  }
  if (!vent_active) {
    m.o2.push_back(
        [&c](int x) { return fluct_dist(x, 0, 1, c.fluctuate); });
  }
  if (!a.vaso) {
    const double step =
        s.diabetic ? c.glucose_fluctuate_diabetic : c.fluctuate;
    m.glucose.push_back(
        [step](int x) { return fluct_dist(x, 0, 4, step); });
  }
  return m;
}

int sample_level(const LevelDist& d, Pcg32& rng) {
  const double u = rng.next_double();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < d.size(); ++i) {
    acc += d[i].second;
    if (u < acc) return d[i].first;
  }
  return d.back().first;
}

// Sample the composition of stage maps, one draw per applicable stage.
int sample_chain(int level, const std::vector<std::function<LevelDist(int)>>& maps,
                 Pcg32& rng) {
  for (const auto& f : maps) level = sample_level(f(level), rng);
  return level;
}

LevelDist dist_chain(int level,
                     const std::vector<std::function<LevelDist(int)>>& maps) {
  LevelDist d = {{level, 1.0}};
  for (const auto& f : maps) d = apply_map(d, f);
  return d;
}

void check_prob(double p, const std::string& name) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("sepsis config: " + name +
                                " is not a probability");
}

template <std::size_t N>
void check_dist(const std::array<double, N>& d, const std::string& name) {
  double sum = 0.0;
  for (double p : d) {
    if (p < 0.0)
      throw std::invalid_argument("sepsis config: " + name +
                                  " has negative mass");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("sepsis config: " + name + " sums to " +
                                std::to_string(sum));
}

}  // namespace

void SepsisConfig::validate() const {
  check_prob(p_diabetic, "p_diabetic");
  check_dist(init_hr, "initial.hr");
  check_dist(init_bp, "initial.bp");
  check_dist(init_o2, "initial.o2");
  check_dist(init_glucose_nondiabetic, "initial.glucose_nondiabetic");
  check_dist(init_glucose_diabetic, "initial.glucose_diabetic");
  check_prob(abx_on_hr_high_to_normal, "antibiotics.on_hr_high_to_normal");
  check_prob(abx_on_bp_high_to_normal, "antibiotics.on_bp_high_to_normal");
  check_prob(abx_withdraw_hr_normal_to_high,
             "antibiotics.withdraw_hr_normal_to_high");
  check_prob(abx_withdraw_bp_normal_to_high,
             "antibiotics.withdraw_bp_normal_to_high");
  check_prob(vent_on_o2_low_to_normal, "ventilation.on_o2_low_to_normal");
  check_prob(vent_withdraw_o2_normal_to_low,
             "ventilation.withdraw_o2_normal_to_low");
  check_prob(vaso_on_bp_up_one_nondiabetic,
             "vasopressors.nondiabetic.on_bp_up_one");
  check_prob(vaso_withdraw_bp_down_one_nondiabetic,
             "vasopressors.nondiabetic.withdraw_bp_down_one");
  check_prob(vaso_on_bp_low_to_normal_diabetic,
             "vasopressors.diabetic.on_bp_low_to_normal");
  check_prob(vaso_on_bp_low_to_high_diabetic,
             "vasopressors.diabetic.on_bp_low_to_high");
  if (vaso_on_bp_low_to_normal_diabetic + vaso_on_bp_low_to_high_diabetic >
      1.0 + 1e-12)
    throw std::invalid_argument(
        "sepsis config: diabetic vasopressor bp-low branches exceed 1");
  check_prob(vaso_on_bp_normal_to_high_diabetic,
             "vasopressors.diabetic.on_bp_normal_to_high");
  check_prob(vaso_on_glucose_up_one_diabetic,
             "vasopressors.diabetic.on_glucose_up_one");
  check_prob(vaso_withdraw_bp_down_one_diabetic,
             "vasopressors.diabetic.withdraw_bp_down_one");
  if (fluctuate < 0.0 || fluctuate > 0.5)
    throw std::invalid_argument("sepsis config: fluctuation step out of "
                                "[0, 0.5]");
  if (glucose_fluctuate_diabetic < 0.0 || glucose_fluctuate_diabetic > 0.5)
    throw std::invalid_argument(
        "sepsis config: diabetic glucose fluctuation out of [0, 0.5]");
  if (abnormal_for_death < 1 || abnormal_for_death > 4)
    throw std::invalid_argument("sepsis config: abnormal_for_death out of "
                                "[1, 4]");
  if (init_min_abnormal < 0 || init_max_abnormal > 4 ||
      init_min_abnormal > init_max_abnormal)
    throw std::invalid_argument("sepsis config: bad admission window");
  if (gamma_plan < 0.0 || gamma_plan >= 1.0)
    throw std::invalid_argument("sepsis config: gamma_plan must be in [0, 1)");
  if (eval_horizon < 1)
    throw std::invalid_argument("sepsis config: eval_horizon must be >= 1");
}

SepsisConfig SepsisConfig::from_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open sepsis config " + path);
  json doc = json::parse(is);
  SepsisConfig c;
  c.p_diabetic = doc.at("p_diabetic").get<double>();
  c.gamma_plan = doc.at("gamma_plan").get<double>();
  c.gamma_eval = doc.value("gamma_eval", 1.0);
  c.eval_horizon = doc.value("eval_horizon", 20);

  const auto& init = doc.at("initial");
  auto read_arr = [](const json& j, auto& arr, const char* name) {
    if (j.size() != arr.size())
      throw std::runtime_error(std::string("sepsis config: ") + name +
                               " has wrong length");
    for (std::size_t i = 0; i < arr.size(); ++i) arr[i] = j[i].get<double>();
  };
  read_arr(init.at("hr"), c.init_hr, "initial.hr");
  read_arr(init.at("bp"), c.init_bp, "initial.bp");
  read_arr(init.at("o2"), c.init_o2, "initial.o2");
  read_arr(init.at("glucose_nondiabetic"), c.init_glucose_nondiabetic,
           "initial.glucose_nondiabetic");
  read_arr(init.at("glucose_diabetic"), c.init_glucose_diabetic,
           "initial.glucose_diabetic");
  c.init_min_abnormal = init.value("min_abnormal", 0);
  c.init_max_abnormal = init.value("max_abnormal", 4);

  const auto& abx = doc.at("antibiotics");
  c.abx_on_hr_high_to_normal = abx.at("on_hr_high_to_normal").get<double>();
  c.abx_on_bp_high_to_normal = abx.at("on_bp_high_to_normal").get<double>();
  c.abx_withdraw_hr_normal_to_high =
      abx.at("withdraw_hr_normal_to_high").get<double>();
  c.abx_withdraw_bp_normal_to_high =
      abx.at("withdraw_bp_normal_to_high").get<double>();

  const auto& vent = doc.at("ventilation");
  c.vent_on_o2_low_to_normal = vent.at("on_o2_low_to_normal").get<double>();
  c.vent_withdraw_o2_normal_to_low =
      vent.at("withdraw_o2_normal_to_low").get<double>();

  const auto& vaso = doc.at("vasopressors");
  const auto& vnd = vaso.at("nondiabetic");
  c.vaso_on_bp_up_one_nondiabetic = vnd.at("on_bp_up_one").get<double>();
  c.vaso_withdraw_bp_down_one_nondiabetic =
      vnd.at("withdraw_bp_down_one").get<double>();
  const auto& vd = vaso.at("diabetic");
  c.vaso_on_bp_low_to_normal_diabetic =
      vd.at("on_bp_low_to_normal").get<double>();
  c.vaso_on_bp_low_to_high_diabetic =
      vd.at("on_bp_low_to_high").get<double>();
  c.vaso_on_bp_normal_to_high_diabetic =
      vd.at("on_bp_normal_to_high").get<double>();
  c.vaso_on_glucose_up_one_diabetic =
      vd.at("on_glucose_up_one").get<double>();
  c.vaso_withdraw_bp_down_one_diabetic =
      vd.at("withdraw_bp_down_one").get<double>();

  const auto& fluct = doc.at("fluctuation");
  c.fluctuate = fluct.at("vital_step").get<double>();
  c.glucose_fluctuate_diabetic = fluct.at("glucose_diabetic_step").get<double>();

  const auto& term = doc.at("terminal");
  c.abnormal_for_death = term.at("abnormal_for_death").get<int>();
  c.reward_death = term.value("reward_death", -1.0);
  c.reward_discharge = term.value("reward_discharge", 1.0);

  c.validate();
  return c;
}

SepsisStepResult sepsis_step(const SepsisState& state, SepsisAction action,
                             Pcg32& rng, const SepsisConfig& config) {
  if (state.outcome != SepsisState::Outcome::alive)
    return {state, 0.0, true};

  StageMaps maps = stage_maps(state, action, config);
  SepsisState next = state;
  next.hr = sample_chain(state.hr, maps.hr, rng);
  next.bp = sample_chain(state.bp, maps.bp, rng);
  next.o2 = sample_chain(state.o2, maps.o2, rng);
  next.glucose = sample_chain(state.glucose, maps.glucose, rng);
  next.abx_on = action.abx;
  next.vaso_on = action.vaso;
  next.vent_on = action.vent;

  if (next.num_abnormal() >= config.abnormal_for_death) {
    next.outcome = SepsisState::Outcome::dead;
    return {next, config.reward_death, true};
  }
  if (next.num_abnormal() == 0 && !next.any_treatment()) {
    next.outcome = SepsisState::Outcome::discharged;
    return {next, config.reward_discharge, true};
  }
  return {next, 0.0, false};
}

int sepsis_state_index(const SepsisState& s) {
  if (s.outcome == SepsisState::Outcome::dead) return kSepsisDeathState;
  if (s.outcome == SepsisState::Outcome::discharged)
    return kSepsisDischargeState;
  const std::array<int, 8> vals = {s.hr,
                                   s.bp,
                                   s.o2,
                                   s.glucose,
                                   s.diabetic ? 1 : 0,
                                   s.abx_on ? 1 : 0,
                                   s.vaso_on ? 1 : 0,
                                   s.vent_on ? 1 : 0};
  int idx = 0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (vals[i] < 0 || vals[i] >= kDims[i])
      throw std::out_of_range("sepsis state variable out of range");
    idx = idx * kDims[i] + vals[i];
  }
  return idx;
}

SepsisState sepsis_state_from_index(int index) {
  SepsisState s;
  if (index == kSepsisDeathState) {
    s.outcome = SepsisState::Outcome::dead;
    return s;
  }
  if (index == kSepsisDischargeState) {
    s.outcome = SepsisState::Outcome::discharged;
    return s;
  }
  if (index < 0 || index >= kSepsisLiveStates)
    throw std::out_of_range("sepsis state index out of range");
  std::array<int, 8> vals{};
  for (int i = 7; i >= 0; --i) {
    vals[i] = index % kDims[i];
    index /= kDims[i];
  }
  s.hr = vals[0];
  s.bp = vals[1];
  s.o2 = vals[2];
  s.glucose = vals[3];
  s.diabetic = vals[4] != 0;
  s.abx_on = vals[5] != 0;
  s.vaso_on = vals[6] != 0;
  s.vent_on = vals[7] != 0;
  return s;
}

TabularMdp enumerate_sepsis_mdp(const SepsisConfig& config) {
  config.validate();
  const int S = kSepsisStates;
  const int A = kSepsisActions;
  std::vector<SparseRow> rows(static_cast<std::size_t>(S) * A);
  Eigen::MatrixXd reward = Eigen::MatrixXd::Zero(S, A);

  for (int si = 0; si < kSepsisLiveStates; ++si) {
    const SepsisState s = sepsis_state_from_index(si);
    for (int a = 0; a < A; ++a) {
      const SepsisAction act = SepsisAction::from_index(a);
      StageMaps maps = stage_maps(s, act, config);
      const LevelDist hr_d = dist_chain(s.hr, maps.hr);
      const LevelDist bp_d = dist_chain(s.bp, maps.bp);
      const LevelDist o2_d = dist_chain(s.o2, maps.o2);
      const LevelDist glu_d = dist_chain(s.glucose, maps.glucose);

      std::map<int, double> dist;
      double r = 0.0;
      for (const auto& [hr2, ph] : hr_d) {
        for (const auto& [bp2, pb] : bp_d) {
          for (const auto& [o22, po] : o2_d) {
            for (const auto& [glu2, pg] : glu_d) {
              const double p = ph * pb * po * pg;
              if (p == 0.0) continue;
              SepsisState n = s;
              n.hr = hr2;
              n.bp = bp2;
              n.o2 = o22;
              n.glucose = glu2;
              n.abx_on = act.abx;
              n.vaso_on = act.vaso;
              n.vent_on = act.vent;
              if (n.num_abnormal() >= config.abnormal_for_death) {
                dist[kSepsisDeathState] += p;
                r += p * config.reward_death;
              } else if (n.num_abnormal() == 0 && !n.any_treatment()) {
                dist[kSepsisDischargeState] += p;
                r += p * config.reward_discharge;
              } else {
                dist[sepsis_state_index(n)] += p;
              }
            }
          }
        }
      }
      SparseRow& row = rows[static_cast<std::size_t>(si) * A + a];
      row.idx.reserve(dist.size());
      row.p.reserve(dist.size());
      for (const auto& [s2, p] : dist) {
        row.idx.push_back(s2);
        row.p.push_back(p);
      }
      reward(si, a) = r;
    }
  }
  for (int si : {kSepsisDeathState, kSepsisDischargeState}) {
    for (int a = 0; a < A; ++a) {
      SparseRow& row = rows[static_cast<std::size_t>(si) * A + a];
      row.idx = {si};
      row.p = {1.0};
    }
  }

  // Admission-window initial distribution, treatments off.
  Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(S);
  double total = 0.0;
  for (int hr = 0; hr < 3; ++hr) {
    for (int bp = 0; bp < 3; ++bp) {
      for (int o2 = 0; o2 < 2; ++o2) {
        for (int glu = 0; glu < 5; ++glu) {
          const int abnormal =
              (hr != 1) + (bp != 1) + (o2 != 1) + (glu != 2);
          if (abnormal < config.init_min_abnormal ||
              abnormal > config.init_max_abnormal)
            continue;
          for (int dia = 0; dia < 2; ++dia) {
            const auto& glu_dist = dia ? config.init_glucose_diabetic
                                       : config.init_glucose_nondiabetic;
            const double p = config.init_hr[hr] * config.init_bp[bp] *
                             config.init_o2[o2] * glu_dist[glu] *
                             (dia ? config.p_diabetic
                                  : 1.0 - config.p_diabetic);
            SepsisState st;
            st.hr = hr;
            st.bp = bp;
            st.o2 = o2;
            st.glucose = glu;
            st.diabetic = dia != 0;
            mu0[sepsis_state_index(st)] += p;
            total += p;
          }
        }
      }
    }
  }
  if (total <= 0.0)
    throw std::runtime_error("sepsis config: admission window has zero mass");
  mu0 /= total;

  return TabularMdp(S, FactoredActionSpace({2, 2, 2}), std::move(rows),
                    std::move(reward), config.gamma_plan, std::move(mu0));
}

Eigen::VectorXd sepsis_featurize(const SepsisState& s) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(kSepsisFeatureBits);
  int off = 0;
  auto put = [&](int value, int card) {
    x[off + value] = 1.0;
    off += card;
  };
  put(s.hr, 3);
  put(s.bp, 3);
  put(s.o2, 2);
  put(s.glucose, 5);
  put(s.diabetic ? 1 : 0, 2);
  put(s.abx_on ? 1 : 0, 2);
  put(s.vaso_on ? 1 : 0, 2);
  put(s.vent_on ? 1 : 0, 2);
  return x;
}

SepsisOptimalResult sepsis_optimal_policy(const TabularMdp& mdp,
                                          const SepsisConfig& config) {
  ValueIterationResult vi = value_iteration(mdp, 1e-8);
  SepsisOptimalResult out{vi.greedy, 0.0, 0.0};
  Eigen::VectorXd v_star = vi.q.values.rowwise().maxCoeff();
  out.value = mdp.initial_dist().dot(v_star);
  Eigen::VectorXd v_h = finite_horizon_values(mdp, vi.greedy,
                                              config.eval_horizon,
                                              config.gamma_eval);
  out.value_h20 = mdp.initial_dist().dot(v_h);
  return out;
}

SepsisState sepsis_initial_state(Pcg32& rng, const SepsisConfig& config) {
  for (;;) {
    SepsisState s;
    s.diabetic = rng.next_double() < config.p_diabetic;
    s.hr = rng.next_categorical(
        {config.init_hr[0], config.init_hr[1], config.init_hr[2]});
    s.bp = rng.next_categorical(
        {config.init_bp[0], config.init_bp[1], config.init_bp[2]});
    s.o2 = rng.next_categorical({config.init_o2[0], config.init_o2[1]});
    const auto& glu = s.diabetic ? config.init_glucose_diabetic
                                 : config.init_glucose_nondiabetic;
    s.glucose = rng.next_categorical({glu[0], glu[1], glu[2], glu[3], glu[4]});
    const int abnormal = s.num_abnormal();
    if (abnormal >= config.init_min_abnormal &&
        abnormal <= config.init_max_abnormal)
      return s;
  }
}

}  // namespace faqtor
