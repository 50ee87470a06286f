#include <doctest.h>

#include <cmath>
#include <random>

#include "decmm/algorithms.hpp"
#include "decmm/topology.hpp"
#include "test_helpers.hpp"

using namespace decmm;
using namespace decmm::testing;

TEST_CASE("proximal x step without regularizer clips the gradient point") {
  const auto box = BoxSet::uniform(2, 0.0, 10.0);
  Regularizer none;
  Vec x(2), p(2);
  x << 1.0, 9.5;
  p << 2.0, -4.0;
  // candidate x - p/tau = (0, 11.5), clipped to (0, 10)
  const Vec out = prox_x(x, p, 2.0, none, box);
  CHECK(out(0) == doctest::Approx(0.0));
  CHECK(out(1) == doctest::Approx(10.0));
  CHECK_THROWS_AS(prox_x(x, p, 0.0, none, box), std::invalid_argument);
}

TEST_CASE("proximal x step soft-thresholds under the weighted l1 term") {
  const auto box = BoxSet::uniform(3, -10.0, 10.0);
  Regularizer l1;
  l1.kind = RegularizerKind::ScaledL1;
  l1.weight = 0.5;
  Vec x(3), p(3);
  x << 1.0, -0.2, 0.0;
  p << 0.0, 0.0, 3.0;
  const double tau = 2.0;
  // candidates (1, -0.2, -1.5), threshold w/tau = 0.25
  const Vec out = prox_x(x, p, tau, l1, box);
  CHECK(out(0) == doctest::Approx(0.75));
  CHECK(out(1) == doctest::Approx(0.0));
  CHECK(out(2) == doctest::Approx(-1.25));

  // Grid-search oracle for the coordinatewise subproblem.
  for (int k = 0; k < 3; ++k) {
    auto obj = [&](double z) {
      return p(k) * (z - x(k)) + 0.5 * tau * (z - x(k)) * (z - x(k)) +
             l1.weight * std::abs(z);
    };
    double best = obj(out(k));
    for (int g = 0; g <= 400000; ++g) {
      const double z = -10.0 + g * (20.0 / 400000.0);
      CHECK(best <= obj(z) + 1e-9);
    }
  }
}

TEST_CASE("proximal y step is a projected ascent move") {
  const auto box = BoxSet::uniform(2, 0.0, 10.0);
  Vec y(2), d(2);
  y << 0.5, 9.0;
  d << -1.0, 4.0;
  const Vec out = prox_y(y, d, 0.5, box);
  CHECK(out(0) == doctest::Approx(0.0));   // 0.5 - 0.5 clipped at 0
  CHECK(out(1) == doctest::Approx(10.0));  // 9 + 2 clipped at 10
}

namespace {

std::vector<AgentState> two_agents(const Vec& x0, const Vec& x1) {
  std::vector<AgentState> states(2);
  for (int i = 0; i < 2; ++i) {
    states[i].x = (i == 0 ? x0 : x1);
    states[i].y = Vec::Zero(1);
    states[i].x_tilde = states[i].x;
    states[i].y_tilde = states[i].y;
    states[i].p = Vec::Zero(x0.size());
    states[i].d = Vec::Zero(1);
    states[i].est.v = states[i].p;
    states[i].est.u = states[i].d;
  }
  return states;
}

Mat two_agent_mix() {
  Mat M(2, 2);
  M << 2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0;
  return M;
}

}  // namespace

TEST_CASE("consensus mixing combines neighbors and the prox direction") {
  auto states = two_agents(Vec::Constant(1, 0.0), Vec::Constant(1, 3.0));
  // x_tilde = x: the update reduces to pure mixing
  consensus_mix(states, two_agent_mix(), 0.5, 0.5);
  CHECK(states[0].x(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(states[1].x(0) == doctest::Approx(2.0).epsilon(1e-14));

  // now push agent 0 toward x_tilde = 5
  states = two_agents(Vec::Constant(1, 0.0), Vec::Constant(1, 3.0));
  states[0].x_tilde = Vec::Constant(1, 5.0);
  consensus_mix(states, two_agent_mix(), 0.2, 0.5);
  CHECK(states[0].x(0) == doctest::Approx(1.0 + 0.2 * 5.0).epsilon(1e-14));
}

TEST_CASE("single-agent mixing is the plain damped prox update") {
  std::vector<AgentState> states(1);
  states[0].x = Vec::Constant(1, 2.0);
  states[0].x_tilde = Vec::Constant(1, 4.0);
  states[0].y = Vec::Constant(1, 1.0);
  states[0].y_tilde = Vec::Constant(1, 0.0);
  consensus_mix(states, Mat::Ones(1, 1), 0.25, 0.5);
  CHECK(states[0].x(0) == doctest::Approx(2.5));
  CHECK(states[0].y(0) == doctest::Approx(0.5));
}

TEST_CASE("tracker preserves the network-average gradient estimate") {
  std::mt19937_64 rng(3);
  const auto g = generate_erdos_renyi(6, 0.5, 9);
  const auto cm = laplacian_consensus_matrix(g);
  const int m = 6, d = 3;
  std::vector<AgentState> states(m);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec mean_p = Vec::Zero(d);
  for (auto& s : states) {
    s.p = Vec(d);
    for (int k = 0; k < d; ++k) s.p(k) = gauss(rng);
    s.d = Vec::Zero(1);
    s.est.v = s.p;
    s.est.u = s.d;
    mean_p += s.p / m;
  }
  // Constant estimator values: the correction vanishes and the trackers
  // mix toward the network average while preserving it exactly.
  std::vector<Vec> old_v(m), old_u(m, Vec::Zero(1));
  for (int step = 0; step < 200; ++step) {
    for (int i = 0; i < m; ++i) old_v[i] = states[i].est.v;
    tracker_update(states, cm.entries, old_v, old_u);
    Vec cur = Vec::Zero(d);
    for (const auto& s : states) cur += s.p / m;
    CHECK((cur - mean_p).norm() < 1e-12);
  }
  for (const auto& s : states) CHECK((s.p - mean_p).norm() < 1e-10);
}

TEST_CASE("single-agent tracker telescopes to the latest estimate") {
  std::vector<AgentState> states(1);
  states[0].p = Vec::Constant(2, 1.0);
  states[0].d = Vec::Constant(1, -2.0);
  states[0].est.v = Vec::Constant(2, 4.0);
  states[0].est.u = Vec::Constant(1, 0.5);
  const std::vector<Vec> old_v = {Vec::Constant(2, 1.0)};
  const std::vector<Vec> old_u = {Vec::Constant(1, -2.0)};
  tracker_update(states, Mat::Ones(1, 1), old_v, old_u);
  CHECK((states[0].p - states[0].est.v).norm() == 0.0);
  CHECK((states[0].d - states[0].est.u).norm() == 0.0);
}

TEST_CASE("single-agent deterministic run reaches the saddle point") {
  const auto pb = build_synthetic_saddle(1, 4, 3, 2, 5);
  HyperParams hp;
  hp.nu = 0.1;
  hp.eta = 0.1;
  hp.alpha = 1.0;
  hp.tau = 1.0;
  hp.q = 1;
  hp.T = 5000;
  RunOptions opts;
  const auto res = run_precision(*pb, Mat::Ones(1, 1), hp,
                                 EstimatorMode::Precision, nullptr, opts);
  const auto [xs, ys] = pb->saddle_point();
  CHECK((res.final_x[0] - xs).norm() < 1e-6);
  CHECK((res.final_y[0] - ys).norm() < 1e-6);
  CHECK(res.records.back().metric.metric_paper < 1e-10);
  // Deterministic full-batch mode: one pass over the data per iteration.
  CHECK(res.counters.ifo_calls == 4 + hp.T * 4);
  CHECK(res.counters.comm_rounds == hp.T);
}

TEST_CASE("homogeneous stationary start is a fixed point") {
  // Identical samples with zero linear term: the exact saddle sits at the
  // origin and every local gradient vanishes there.
  SyntheticSaddleParams flat;
  flat.noise_a = 0.0;
  flat.scale_b = 0.0;
  flat.scale_c = 0.0;
  const auto pb = build_synthetic_saddle(4, 6, 3, 2, 8, flat);
  const auto g = generate_erdos_renyi(4, 0.6, 2);
  const auto cm = laplacian_consensus_matrix(g);
  HyperParams hp;
  hp.q = 3;
  hp.T = 100;
  RunOptions opts;
  const auto res = run_precision(*pb, cm.entries, hp,
                                 EstimatorMode::Precision, nullptr, opts);
  for (int i = 0; i < 4; ++i) {
    CHECK(res.final_x[i].norm() < 1e-12);
    CHECK(res.final_y[i].norm() < 1e-12);
  }
  CHECK(res.records.back().metric.metric_paper < 1e-12);

  const auto base = run_prox_dsgda(*pb, cm.entries, 0.1, 0.1, 2, 50, opts);
  for (int i = 0; i < 4; ++i) CHECK(base.final_x[i].norm() < 1e-12);
}

TEST_CASE("variance reduction with q=1 matches the full-batch baseline") {
  const auto pb = build_synthetic_saddle(5, 9, 4, 3, 12);
  const auto g = generate_erdos_renyi(5, 0.6, 4);
  const auto cm = laplacian_consensus_matrix(g);
  HyperParams hp;
  hp.q = 1;
  hp.T = 200;
  RunOptions opts;
  const auto vr = run_precision(*pb, cm.entries, hp,
                                EstimatorMode::Precision, nullptr, opts);
  const auto gt = run_prox_gt_sgda(*pb, cm.entries, hp, 9, opts);
  for (int i = 0; i < 5; ++i) {
    CHECK((vr.final_x[i] - gt.final_x[i]).norm() < 1e-12);
    CHECK((vr.final_y[i] - gt.final_y[i]).norm() < 1e-12);
  }
}

TEST_CASE("runs are reproducible in the seed and sensitive to it") {
  const auto pb = build_synthetic_saddle(3, 16, 4, 2, 19);
  const auto g = generate_erdos_renyi(3, 0.6, 4);
  const auto cm = laplacian_consensus_matrix(g);
  HyperParams hp;
  hp.q = 4;  // stochastic mini-batch corrections
  hp.T = 60;
  RunOptions a, b, c;
  a.seed = b.seed = 123;
  c.seed = 124;
  const auto ra = run_precision(*pb, cm.entries, hp,
                                EstimatorMode::Precision, nullptr, a);
  const auto rb = run_precision(*pb, cm.entries, hp,
                                EstimatorMode::Precision, nullptr, b);
  const auto rc = run_precision(*pb, cm.entries, hp,
                                EstimatorMode::Precision, nullptr, c);
  for (int i = 0; i < 3; ++i) {
    CHECK((ra.final_x[i] - rb.final_x[i]).norm() == 0.0);
  }
  double diff = 0.0;
  for (int i = 0; i < 3; ++i) diff += (ra.final_x[i] - rc.final_x[i]).norm();
  CHECK(diff > 0.0);

  const auto da = run_prox_dsgda(*pb, cm.entries, 0.05, 0.05, 4, 60, a);
  const auto db = run_prox_dsgda(*pb, cm.entries, 0.05, 0.05, 4, 60, b);
  for (int i = 0; i < 3; ++i)
    CHECK((da.final_x[i] - db.final_x[i]).norm() == 0.0);
}

TEST_CASE("iterates stay inside the feasible boxes") {
  const auto data = generate_synthetic_classification(60, 4, 3);
  const auto pb = build_robust_regression(data, 3, std::nullopt, 1e-3, 10.0, 1);
  const auto g = generate_erdos_renyi(3, 0.6, 7);
  const auto cm = laplacian_consensus_matrix(g);
  HyperParams hp;
  hp.q = 4;
  hp.T = 50;
  RunOptions opts;
  const auto res = run_precision(*pb, cm.entries, hp,
                                 EstimatorMode::Precision, nullptr, opts);
  for (int i = 0; i < 3; ++i) {
    CHECK(pb->x_box().contains(res.final_x[i], 1e-12));
    CHECK(pb->y_box().contains(res.final_y[i], 1e-12));
  }
}

TEST_CASE("divergence raises an error naming the iteration") {
  const auto pb = build_synthetic_saddle(2, 4, 3, 2, 6);
  Mat M(2, 2);
  M << 0.5, 0.5, 0.5, 0.5;
  RunOptions opts;
  try {
    run_prox_dsgda(*pb, M, 1e9, 1e9, 4, 200, opts);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.iteration >= 0);
    CHECK(e.iteration < 200);
    CHECK(std::string(e.what()).find(std::to_string(e.iteration)) !=
          std::string::npos);
  }
}

TEST_CASE("adaptive mode requires its batch configuration") {
  const auto pb = build_synthetic_saddle(2, 4, 3, 2, 6);
  HyperParams hp;
  hp.q = 2;
  hp.T = 5;
  RunOptions opts;
  CHECK_THROWS_AS(run_precision(*pb, Mat::Identity(2, 2), hp,
                                EstimatorMode::PrecisionPlus, nullptr, opts),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_prox_gt_sgda(*pb, Mat::Identity(2, 2), hp, 0, opts),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_prox_dsgda(*pb, Mat::Identity(2, 2), 0.1, 0.1, 5, 5,
                                 opts),
                  std::invalid_argument);
}

TEST_CASE("step-size feasibility report on a worked configuration") {
  // lf = mu = tau = 1, lambda = 1/3, m = 5, alpha = 1/4, beta = 1/12
  const auto rep = check_stepsize_conditions(1.0, 1.0, 1.0 / 3.0, 5, 1.0,
                                             0.25, 1.0 / 12.0, 0.04, 0.001,
                                             4, 16);
  CHECK(rep.c1 == doctest::Approx(0.8).epsilon(1e-14));
  // c1 m mu / (375 alpha lf^2) = 4 / 93.75
  CHECK(rep.eta_bound_terms[1] ==
        doctest::Approx(4.0 / 93.75).epsilon(1e-12));
  CHECK(rep.eta_max == doctest::Approx(4.0 / 93.75).epsilon(1e-12));
  CHECK(rep.nu_max > 0.0);
  CHECK(rep.nu_max < 0.01);
  REQUIRE(rep.conditions.size() == 5);
  for (const auto& c : rep.conditions) CHECK(c.ok);
  CHECK(rep.feasible);

  // beta too large breaks the first condition
  const auto bad = check_stepsize_conditions(1.0, 1.0, 1.0 / 3.0, 5, 1.0,
                                             0.25, 1.0, 0.04, 0.001, 4, 16);
  CHECK(!bad.feasible);
  CHECK(!bad.conditions[0].ok);

  // wrong epoch length is flagged
  const auto badq = check_stepsize_conditions(1.0, 1.0, 1.0 / 3.0, 5, 1.0,
                                              0.25, 1.0 / 12.0, 0.04, 0.001,
                                              5, 16);
  CHECK(!badq.feasible);

  // a fully connected network has lambda = 0 and c1 = 1
  const auto full = check_stepsize_conditions(1.0, 1.0, 0.0, 5, 1.0, 0.25,
                                              1.0 / 12.0, 0.04, 0.001, 4, 16);
  CHECK(full.c1 == 1.0);
}

TEST_CASE("initial points are validated") {
  const auto data = generate_synthetic_classification(20, 3, 1);
  const auto pb = build_robust_regression(data, 2, std::nullopt, 1e-3, 10.0, 0);
  HyperParams hp;
  hp.T = 1;
  RunOptions opts;
  opts.x0 = Vec::Constant(pb->dim_x(), -1.0);  // outside [0, 10]
  CHECK_THROWS_AS(run_precision(*pb, Mat::Identity(2, 2) * 0.5 +
                                    Mat::Ones(2, 2) * 0.25,
                                hp, EstimatorMode::Precision, nullptr, opts),
                  std::invalid_argument);
  opts.x0 = Vec::Zero(pb->dim_x() + 1);  // wrong dimension
  CHECK_THROWS(run_precision(*pb, Mat::Ones(2, 2) * 0.5, hp,
                             EstimatorMode::Precision, nullptr, opts));
}
