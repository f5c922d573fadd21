#include "faqtor/gallery.hpp"

#include <stdexcept>

#include "faqtor/dp.hpp"

namespace faqtor {

namespace {

// Joint action indices of the 2x2 diagonal space, [a_x, a_y] -> 2 a_x + a_y.
constexpr int kDL = 0;  // [left, down]
constexpr int kUL = 1;  // [left, up]
constexpr int kDR = 2;  // [right, down]
constexpr int kUR = 3;  // [right, up]

Eigen::MatrixXd mat4(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(static_cast<int>(rows.size()), 4);
  int i = 0;
  for (const auto& r : rows) {
    int j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

Eigen::VectorXd vec4(double a, double b, double c, double d) {
  Eigen::VectorXd v(4);
  v << a, b, c, d;
  return v;
}

// Dense transition builder for 4-state / 4-action chain variants.
struct DenseChain {
  std::vector<std::vector<std::vector<double>>> t;
  Eigen::MatrixXd r;

  DenseChain() : r(Eigen::MatrixXd::Zero(4, 4)) {
    t.assign(4, std::vector<std::vector<double>>(4,
                                                 std::vector<double>(4, 0.0)));
    // product of two 1-d chains; state s = 2 x + y
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) {
        const int s = 2 * x + y;
        for (int ax = 0; ax < 2; ++ax) {
          for (int ay = 0; ay < 2; ++ay) {
            const int a = 2 * ax + ay;
            const int x2 = (x == 0 && ax == 1) ? 1 : x;
            const int y2 = (y == 0 && ay == 1) ? 1 : y;
            t[s][a][2 * x2 + y2] = 1.0;
            r(s, a) = (x2 - x) + (y2 - y);
          }
        }
      }
    }
  }

  TabularMdp build(double gamma) const {
    Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(4);
    mu0[0] = 1.0;
    return TabularMdp::from_dense(t, FactoredActionSpace({2, 2}), r, gamma,
                                  mu0);
  }
};

GalleryFixture make_chain2d_fixture(const std::string& name,
                                    std::vector<int> actions,
                                    double gamma = 0.9) {
  TabularMdp mdp = chain2d();
  if (gamma != 0.9) {
    DenseChain c;
    mdp = c.build(gamma);
  }
  GalleryFixture f{name,
                   mdp,
                   Policy::deterministic_from(actions, 4),
                   chain2d_abstractions(),
                   {}, {}, {}, {}, {}};
  return f;
}

}  // namespace

TabularMdp chain1d() {
  std::vector<std::vector<std::vector<double>>> t = {
      {{1, 0}, {0, 1}},  // s0: left stays, right moves
      {{0, 1}, {0, 1}},  // s1 absorbing
  };
  Eigen::MatrixXd r(2, 2);
  r << 0, 1, 0, 0;
  Eigen::VectorXd mu0(2);
  mu0 << 1, 0;
  return TabularMdp::from_dense(t, FactoredActionSpace({2}), r, 0.9, mu0);
}

TabularMdp chain2d() { return compose_parallel({chain1d(), chain1d()}); }

AbstractionSet chain2d_abstractions() {
  return AbstractionSet({{0, 0, 1, 1}, {0, 1, 0, 1}}, {2, 2});
}

TabularMdp five_state_mdp(double p) {
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("five_state_mdp: p must lie in [0, 1]");
  // states: 0 = s00, 1 = s01, 2 = s01~, 3 = s10, 4 = s11
  const int S = 5;
  std::vector<std::vector<std::vector<double>>> t(
      S, std::vector<std::vector<double>>(4, std::vector<double>(S, 0.0)));
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(S, 4);
  // s00
  t[0][kDL][0] = 1.0;
  t[0][kUL][1] = p;
  t[0][kUL][2] = 1.0 - p;
  t[0][kDR][3] = 1.0;
  t[0][kUR][4] = 1.0;
  r(0, kUL) = 1.0;
  r(0, kDR) = 1.0;
  r(0, kUR) = 2.0;
  // s01 and s01~: left actions self-loop, right actions reach s11
  for (int s : {1, 2}) {
    t[s][kDL][s] = 1.0;
    t[s][kUL][s] = 1.0;
    t[s][kDR][4] = 1.0;
    t[s][kUR][4] = 1.0;
    r(s, kDR) = 1.0;
    r(s, kUR) = 1.0;
  }
  // s10: down actions self-loop, up actions reach s11
  t[3][kDL][3] = 1.0;
  t[3][kDR][3] = 1.0;
  t[3][kUL][4] = 1.0;
  t[3][kUR][4] = 1.0;
  r(3, kUL) = 1.0;
  r(3, kUR) = 1.0;
  // s11 absorbing
  for (int a = 0; a < 4; ++a) t[4][a][4] = 1.0;

  Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(S);
  mu0[0] = 1.0;
  return TabularMdp::from_dense(t, FactoredActionSpace({2, 2}), r, 0.9, mu0);
}

AbstractionSet five_state_abstractions() {
  return AbstractionSet({{0, 0, 0, 1, 1}, {0, 1, 1, 0, 1}}, {2, 2});
}

std::map<std::string, GalleryFixture> build_gallery(double fig2_p) {
  std::map<std::string, GalleryFixture> g;

  {
    TabularMdp m = chain1d();
    GalleryFixture f{"chain1d", m, Policy::deterministic_from({1, 1}, 2),
                     std::nullopt, {}, {}, {}, {}, {}};
    f.expected_q = Eigen::MatrixXd(2, 2);
    f.expected_q << 0.9, 1.0, 0.0, 0.0;
    f.decomposes_exactly = true;
    f.notes = "one-dimensional chain, always-right policy";
    g.emplace(f.name, f);
  }

  {
    GalleryFixture f = make_chain2d_fixture("figC2_optimal",
                                            {kUR, kUR, kUR, kUR});
    f.expected_q = mat4({{1.8, 1.9, 1.9, 2.0},
                         {0.9, 0.9, 1.0, 1.0},
                         {0.9, 1.0, 0.9, 1.0},
                         {0, 0, 0, 0}});
    f.expected_qx = mat4({{0.9, 0.9, 1, 1},
                          {0.9, 0.9, 1, 1},
                          {0, 0, 0, 0},
                          {0, 0, 0, 0}});
    f.expected_qy = mat4({{0.9, 1, 0.9, 1},
                          {0, 0, 0, 0},
                          {0.9, 1, 0.9, 1},
                          {0, 0, 0, 0}});
    f.decomposes_exactly = true;
    f.notes = "parallel chains, optimal up-right policy";
    g.emplace(f.name, f);
  }
  {
    GalleryFixture f = make_chain2d_fixture("figC2_nonopt1",
                                            {kUL, kUL, kUR, kUR});
    f.expected_q = mat4({{0.9, 1.0, 1.9, 2.0},
                         {0, 0, 1, 1},
                         {0.9, 1.0, 0.9, 1.0},
                         {0, 0, 0, 0}});
    f.expected_qx = mat4({{0, 0, 1, 1}, {0, 0, 1, 1}, {0, 0, 0, 0},
                          {0, 0, 0, 0}});
    f.expected_qy = mat4({{0.9, 1, 0.9, 1},
                          {0, 0, 0, 0},
                          {0.9, 1, 0.9, 1},
                          {0, 0, 0, 0}});
    f.decomposes_exactly = true;
    f.notes = "factored non-optimal policy (left at x=0)";
    g.emplace(f.name, f);
  }
  {
    GalleryFixture f = make_chain2d_fixture("figC2_nonopt2",
                                            {kDL, kUL, kDR, kUR});
    f.expected_q = mat4({{0, 1, 1, 2}, {0, 0, 1, 1}, {0, 1, 0, 1},
                         {0, 0, 0, 0}});
    f.expected_qx = mat4({{0, 0, 1, 1}, {0, 0, 1, 1}, {0, 0, 0, 0},
                          {0, 0, 0, 0}});
    f.expected_qy = mat4({{0, 1, 0, 1}, {0, 0, 0, 0}, {0, 1, 0, 1},
                          {0, 0, 0, 0}});
    f.decomposes_exactly = true;
    f.notes = "factored non-optimal policy (down at y=0, left at x=0)";
    g.emplace(f.name, f);
  }

  {
    TabularMdp m = five_state_mdp(fig2_p);
    GalleryFixture f{"fig2",
                     m,
                     Policy::deterministic_from({kUR, kDR, kDR, kUR, kDR}, 4),
                     five_state_abstractions(),
                     {}, {}, {}, {}, {}};
    f.expected_q = Eigen::MatrixXd(5, 4);
    f.expected_q << 1.8, 1.9, 1.9, 2.0,
                    0.9, 0.9, 1.0, 1.0,
                    0.9, 0.9, 1.0, 1.0,
                    0.9, 1.0, 0.9, 1.0,
                    0, 0, 0, 0;
    f.decomposes_exactly = true;
    f.notes = "5-state abstraction example; all Theorem 1 conditions hold for "
              "every branch probability p";
    g.emplace(f.name, f);
  }

  // Modified 4-state chain: up-right out of s01 self-loops and pays 1-gamma.
  {
    DenseChain c;
    c.t[1][kUR] = {0, 1, 0, 0};
    c.r(1, kUR) = 0.1;
    TabularMdp m = c.build(0.9);
    {
      GalleryFixture f{"fig3",
                       m,
                       Policy::deterministic_from({kUR, kUR, kUR, kUR}, 4),
                       chain2d_abstractions(),
                       {}, {}, {}, {}, {}};
      f.expected_q = mat4({{1.8, 1.9, 1.9, 2.0},
                           {0.9, 0.9, 1.0, 1.0},
                           {0.9, 1.0, 0.9, 1.0},
                           {0, 0, 0, 0}});
      f.decomposes_exactly = true;
      f.notes = "transition and reward conditions fail, yet Q matches the "
                "clean chain and decomposes exactly";
      g.emplace(f.name, f);
    }
    {
      GalleryFixture f{"fig3_caption_policy",
                       m,
                       Policy::deterministic_from({kUL, kUR, kUR, kUR}, 4),
                       chain2d_abstractions(),
                       {}, {}, {}, {}, {}};
      f.expected_q_s0 = vec4(1.71, 1.9, 1.9, 2.0);
      f.expected_fit_s0 = vec4(1.7325, 1.8775, 1.8775, 2.0225);
      f.notes = "same modified chain with the up-left start action; all three "
                "conditions fail and the fit is biased";
      g.emplace(f.name, f);
    }
  }

  // Seven policies on the clean chain that break the policy condition.
  struct Row {
    std::vector<int> actions;
    Eigen::VectorXd q, fit;
  };
  const std::vector<Row> rows = {
      {{kUL, kUR, kUR, kUR}, vec4(1.71, 1.9, 1.9, 2),
       vec4(1.7325, 1.8775, 1.8775, 2.0225)},
      {{kDL, kUR, kUR, kUR}, vec4(0, 1.9, 1.9, 2),
       vec4(0.45, 1.45, 1.45, 2.45)},
      {{kDR, kDL, kDR, kDR}, vec4(0.9, 1, 1, 2),
       vec4(0.675, 1.225, 1.225, 1.775)},
      {{kDL, kDR, kDR, kDR}, vec4(0, 1.9, 1, 2),
       vec4(0.225, 1.675, 0.775, 2.225)},
      {{kUR, kUL, kUR, kUR}, vec4(1.8, 1, 1.9, 2),
       vec4(1.575, 1.225, 2.125, 1.775)},
      {{kDR, kUL, kUR, kUR}, vec4(1.71, 1, 1.9, 2),
       vec4(1.5075, 1.2025, 2.1025, 1.7975)},
      {{kUR, kUL, kDR, kDR}, vec4(1.8, 1, 1, 2),
       vec4(1.35, 1.45, 1.45, 1.55)},
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    GalleryFixture f = make_chain2d_fixture(
        "figC3_row" + std::to_string(i + 1), rows[i].actions);
    f.expected_q_s0 = rows[i].q;
    f.expected_fit_s0 = rows[i].fit;
    f.notes = "policy condition fails; biased fit at the start state";
    g.emplace(f.name, f);
  }

  // Transition violation with visible bias: up-right out of s10 self-loops
  // with zero reward.
  {
    DenseChain c;
    c.t[2][kUR] = {0, 0, 1, 0};
    c.r(2, kUR) = 0.0;
    GalleryFixture f{"figC4_transition_violation",
                     c.build(0.9),
                     Policy::deterministic_from({kUR, kUR, kUR, kUR}, 4),
                     chain2d_abstractions(),
                     {}, {}, {}, {}, {}};
    f.expected_q_s0 = vec4(1.8, 1.9, 1, 2);
    f.expected_fit_s0 = vec4(1.575, 2.125, 1.225, 1.775);
    f.notes = "modified transition out of s10; biased fit";
    g.emplace(f.name, f);
  }

  // Reward violation with visible bias: up-right out of s00 pays 1, not 2.
  {
    DenseChain c;
    c.r(0, kUR) = 1.0;
    GalleryFixture f{"figC5_reward_violation",
                     c.build(0.9),
                     Policy::deterministic_from({kUR, kUR, kUR, kUR}, 4),
                     chain2d_abstractions(),
                     {}, {}, {}, {}, {}};
    f.expected_q_s0 = vec4(0.9, 1.9, 1.9, 1);
    f.expected_fit_s0 = vec4(1.375, 1.425, 1.425, 1.475);
    f.notes = "non-additive reward at the start state; biased fit";
    g.emplace(f.name, f);
  }

  // Adversarial reward at gamma = 1: the reward is non-additive yet Q
  // decomposes exactly.  Evaluated over a finite horizon (the chain absorbs).
  {
    DenseChain c;
    c.r.row(0) << 1.5, 3.0, 7.0, 1.5;
    c.r.row(1) << 0.0, 0.0, 1.0, 1.0;
    c.r.row(2) << 0.0, 4.0, 0.0, 4.0;
    c.r.row(3) << 0.0, 0.0, 0.0, 0.0;
    GalleryFixture f{"figC6_adversarial",
                     c.build(1.0),
                     Policy::deterministic_from({kDR, kDL, kDL, kDL}, 4),
                     chain2d_abstractions(),
                     {}, {}, {}, {}, {}};
    f.expected_q = mat4({{8.5, 3, 7, 1.5},
                         {0, 0, 1, 1},
                         {0, 4, 0, 4},
                         {0, 0, 0, 0}});
    f.expected_qx = mat4({{1.5, 1.5, 0, 0},
                          {0, 0, 1, 1},
                          {0, 0, 0, 0},
                          {0, 0, 0, 0}});
    f.expected_qy = mat4({{7, 1.5, 7, 1.5},
                          {0, 0, 0, 0},
                          {0, 4, 0, 4},
                          {0, 0, 0, 0}});
    f.eval_horizon = 32;
    f.decomposes_exactly = true;
    f.notes = "adversarial non-additive rewards; Q decomposes exactly";
    g.emplace(f.name, f);
  }

  // Witnesses where exactly one condition fails and the fit is still exact.
  {
    DenseChain c;
    c.t[1][kUR] = {0, 1, 0, 0};  // transition redirected, reward untouched
    TabularMdp m = c.build(0.0);
    GalleryFixture f{"transition_only_gamma0",
                     m,
                     Policy::deterministic_from({kUR, kUR, kUR, kUR}, 4),
                     chain2d_abstractions(),
                     {}, {}, {}, {}, {}};
    f.expected_q = c.r;
    f.decomposes_exactly = true;
    f.notes = "only the transition condition fails; gamma = 0 keeps Q equal "
              "to the additive reward";
    g.emplace(f.name, f);
  }
  {
    GalleryFixture f = make_chain2d_fixture("policy_only_gamma0",
                                            {kUL, kUR, kUR, kUR}, 0.0);
    DenseChain c;
    f.expected_q = c.r;
    f.decomposes_exactly = true;
    f.notes = "only the policy condition fails; gamma = 0 keeps Q additive";
    g.emplace(f.name, f);
  }
  {
    DenseChain c;
    c.r.row(0) << 1.5, 3.0, 7.0, 1.5;
    c.r.row(1) << 0.0, 0.0, -5.5, -5.5;
    c.r.row(2).setZero();
    c.r.row(3).setZero();
    GalleryFixture f{"reward_only_exact",
                     c.build(1.0),
                     Policy::deterministic_from({kUR, kUR, kUR, kUR}, 4),
                     chain2d_abstractions(),
                     {}, {}, {}, {}, {}};
    f.expected_q = mat4({{3, -2.5, 7, 1.5},
                         {-5.5, -5.5, -5.5, -5.5},
                         {0, 0, 0, 0},
                         {0, 0, 0, 0}});
    f.eval_horizon = 32;
    f.decomposes_exactly = true;
    f.notes = "only the reward condition fails; continuation values cancel "
              "the non-additive start-state rewards";
    g.emplace(f.name, f);
  }

  return g;
}

}  // namespace faqtor
