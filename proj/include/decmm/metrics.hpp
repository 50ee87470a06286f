#pragma once

#include <vector>

#include "decmm/common.hpp"
#include "decmm/problems.hpp"

namespace decmm {

// Cumulative complexity accounting per Definitions of sample and
// communication complexity: one IFO call per gradient-pair evaluation,
// one communication round per synchronous iteration.
struct ComplexityCounters {
  long long ifo_calls = 0;
  long comm_rounds = 0;
};

struct MetricBreakdown {
  double consensus_x_tilde = 0.0;  // ||x_tilde - 1 (x) xbar||^2, unnormalized
  double consensus_x = 0.0;        // (1/m) sum_i ||x_i - xbar||^2
  double consensus_y = 0.0;        // (1/m) sum_i ||y_i - ybar||^2
  double saddle_err = 0.0;         // ||y*(xbar) - ybar||^2
  double grad_norm2 = 0.0;         // ||(1/m) sum_i grad_x F_i(xbar, ybar)||^2
  double metric_paper = 0.0;       // four-term convergence metric, unnormalized
  double metric_stationarity = 0.0;  // epsilon-stationarity combination, 1/m terms
};

// Maximizer of (1/m) sum_i F_i(x_bar, .) over the y box. Uses the problem's
// closed form when registered, otherwise projected gradient ascent with
// step 1/L_f until the update drops below 1e-10 (at most 10^6 iterations).
Vec y_star(const Problem& problem, const Vec& x_bar);

// Projected-gradient-ascent route, always available; serves as the
// independent oracle for closed forms.
Vec y_star_ascent(const Problem& problem, const Vec& x_bar);

// Computes all metric components from the iteration-t snapshot; x_tildes
// must be the prox outputs of the same iteration.
MetricBreakdown compute_metric(const Problem& problem,
                               const std::vector<Vec>& xs,
                               const std::vector<Vec>& ys,
                               const std::vector<Vec>& x_tildes);

// Global objective (1/m) sum_i F_i(x_i, y_i) + h(xbar).
double global_loss(const Problem& problem, const std::vector<Vec>& xs,
                   const std::vector<Vec>& ys);

// Diagnostic potential
// Q(xbar) + (4 nu Lf^2 / (beta mu eta^2)) ||ybar - y*||^2
//   + (1/m) sum_i [||x_i - xbar||^2 + ||y_i - ybar||^2],
// with Q(x) = max_y F(x, y) + h(x). Not used by the algorithms.
double potential_diagnostic(const Problem& problem, const std::vector<Vec>& xs,
                            const std::vector<Vec>& ys, double nu, double eta,
                            double beta);

}  // namespace decmm
