#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "decmm/common.hpp"
#include "decmm/estimators.hpp"
#include "decmm/metrics.hpp"
#include "decmm/problems.hpp"

namespace decmm {

struct HyperParams {
  double nu = 0.1;    // x consensus step, in (0, 1]
  double eta = 0.1;   // y consensus step, in (0, 1]
  double alpha = 1.0; // ascent magnitude
  double tau = 1.0;   // proximal control parameter
  double beta = 1.0 / 12.0;  // analysis constant, checker only
  int q = 1;          // epoch length
  long T = 0;         // iteration budget
};

// Per-agent tuple carried across one synchronous round.
struct AgentState {
  Vec x, y;
  Vec x_tilde, y_tilde;
  Vec p, d;  // gradient trackers
  EstimatorState est;
};

struct IterationRecord {
  long iter = 0;
  long long ifo_calls = 0;
  long comm_rounds = 0;
  double loss = 0.0;
  MetricBreakdown metric;
  int batch_size = 0;
};

struct RunResult {
  std::vector<IterationRecord> records;
  ComplexityCounters counters;
  std::vector<Vec> final_x, final_y;
};

struct RunOptions {
  std::uint64_t seed = 1;
  int record_stride = 0;  // 0 = auto: every iteration up to 1e4 records
  Vec x0, y0;             // empty => zero vectors clipped to the boxes
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(long iter, const std::string& what)
      : std::runtime_error(what), iteration(iter) {}
  long iteration;
};

// argmin_{x in box} <p, x - x_t> + (tau/2)||x - x_t||^2 + h(x); separable
// and strictly convex, solved coordinatewise in closed form.
Vec prox_x(const Vec& x_t, const Vec& p_t, double tau, const Regularizer& h,
           const BoxSet& box);

// argmin_{y in box} ||y - (y_t + alpha d)||^2.
Vec prox_y(const Vec& y_t, const Vec& d_t, double alpha, const BoxSet& box);

// Synchronous consensus update x_{i,t+1} = sum_i' M_ii' x_i',t
// + nu (x_tilde_i - x_i,t); analogous for y with eta. All reads are from
// the iteration-t snapshot.
void consensus_mix(std::vector<AgentState>& states, const Mat& M, double nu,
                   double eta);

// Synchronous tracker update p_{i,t} = sum_i' M_ii' p_{i',t-1}
// + v_{i,t} - v_{i,t-1}; old_v/old_u are the previous estimator values.
void tracker_update(std::vector<AgentState>& states, const Mat& M,
                    const std::vector<Vec>& old_v, const std::vector<Vec>& old_u);

// Full PRECISION / PRECISION+ pipeline: prox, mix, estimate, track.
RunResult run_precision(const Problem& problem, const Mat& M,
                        const HyperParams& hp, EstimatorMode mode,
                        const AdaptiveBatchConfig* adaptive,
                        const RunOptions& opts);

// Baseline: same pipeline, but (v, u) are fresh mini-batch gradients every
// iteration (batch = n reproduces deterministic GT-GDA).
RunResult run_prox_gt_sgda(const Problem& problem, const Mat& M,
                           const HyperParams& hp, int batch,
                           const RunOptions& opts);

// Baseline: decentralized stochastic gradient descent ascent with
// projection; no trackers, no variance reduction.
RunResult run_prox_dsgda(const Problem& problem, const Mat& M,
                         double step_gamma, double step_eta, int batch, long T,
                         const RunOptions& opts);

// Feasibility report for the analytical step-size conditions.
struct ConditionCheck {
  std::string name;
  bool ok = false;
  double bound = 0.0;
  double value = 0.0;
};

struct StepsizeReport {
  double c1 = 0.0;
  double eta_max = 0.0;
  double nu_max = 0.0;
  std::vector<double> eta_bound_terms;  // {1/8, c1 m mu/(375 a L^2), ...}
  std::vector<double> nu_bound_terms;
  std::vector<ConditionCheck> conditions;
  bool feasible = false;
};

StepsizeReport check_stepsize_conditions(double lf, double mu, double lambda,
                                         int m, double tau, double alpha,
                                         double beta, double eta, double nu,
                                         int q, int n);

}  // namespace decmm
