#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "decmm/common.hpp"
#include "decmm/problems.hpp"

namespace decmm {

enum class EstimatorMode { Precision, PrecisionPlus };

// Constants of the adaptive checkpoint batch rule
// |R| = min{c_gamma * sigma^2 / gamma_t, c_eps * sigma^2 / eps, n}.
struct AdaptiveBatchConfig {
  double c_gamma = 1.0;
  double c_epsilon = 1.0;
  double sigma2 = 1.0;
  double epsilon = 1e-3;
};

// Ceil of the adaptive batch rule, clamped to [1, n]. gamma_t = 0 (or the
// initial "no history" state, passed as +infinity) drops the first term.
int refresh_batch_size(const AdaptiveBatchConfig& cfg, double gamma_t, int n);

// Epoch average of recorded squared consensus gaps: sum(window) / q, even
// when the window is shorter than q.
double gamma_update(std::span<const double> window, int q);

// Recursive variance-reduced gradient-estimator pair (v, u) for one agent.
// After a checkpoint in Precision mode, (v, u) equal the exact full local
// gradients at (prev_x, prev_y); between checkpoints they carry the
// telescoped mini-batch corrections.
struct EstimatorState {
  Vec v, u;
  Vec prev_x, prev_y;
  long t = 0;  // iteration at which (v, u) was last evaluated
  int q = 1;
  EstimatorMode mode = EstimatorMode::Precision;
};

struct EstimatorStepResult {
  long ifo_calls = 0;
  int batch_size = 0;
  bool checkpoint = false;
};

// Uniform sample of k indices from [0, n) without replacement; returns
// indices in ascending order. k == n yields 0..n-1.
std::vector<int> sample_without_replacement(int n, int k, std::mt19937_64& rng);

// Initialization: draw |R_{i,0}| samples without replacement (n for
// Precision, the adaptive rule with empty history for PrecisionPlus) and
// average their gradients.
EstimatorStepResult init_estimator(EstimatorState& state, const Problem& problem,
                                   int agent, const Vec& x0, const Vec& y0,
                                   std::mt19937_64& rng,
                                   const AdaptiveBatchConfig* adaptive);

// One estimator update for the iteration following state.t. Checkpoints
// (iteration divisible by q) recompute from a full / adaptive batch; other
// iterations apply the mini-batch recursive correction with |S| = q.
EstimatorStepResult estimator_step(EstimatorState& state, const Problem& problem,
                                   int agent, const Vec& x_t, const Vec& y_t,
                                   std::mt19937_64& rng, double gamma_t,
                                   const AdaptiveBatchConfig* adaptive);

// Variance of per-sample gradient pairs around the full local gradient at
// (x, y), averaged over agents; optional empirical stand-in for sigma^2.
double estimate_sigma2(const Problem& problem, const Vec& x, const Vec& y);

}  // namespace decmm
