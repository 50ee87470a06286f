#include "decmm/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace decmm {

int refresh_batch_size(const AdaptiveBatchConfig& cfg, double gamma_t, int n) {
  if (n < 1) throw std::invalid_argument("refresh_batch_size: n must be >= 1");
  double bound = static_cast<double>(n);
  if (gamma_t > 0.0 && std::isfinite(gamma_t))
    bound = std::min(bound, cfg.c_gamma * cfg.sigma2 / gamma_t);
  bound = std::min(bound, cfg.c_epsilon * cfg.sigma2 / cfg.epsilon);
  const double rounded = std::ceil(bound);
  return static_cast<int>(std::clamp(rounded, 1.0, static_cast<double>(n)));
}

double gamma_update(std::span<const double> window, int q) {
  if (window.empty())
    throw std::invalid_argument("gamma_update: empty window");
  if (static_cast<int>(window.size()) > q)
    throw std::invalid_argument("gamma_update: window longer than epoch");
  double sum = 0.0;
  for (double g : window) sum += g;
  return sum / q;
}

std::vector<int> sample_without_replacement(int n, int k,
                                            std::mt19937_64& rng) {
  if (k > n)
    throw std::invalid_argument("sample_without_replacement: batch size exceeds n");
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  if (k == n) return pool;
  std::vector<int> out;
  out.reserve(k);
  std::sample(pool.begin(), pool.end(), std::back_inserter(out), k, rng);
  return out;
}

namespace {

// Batch average of gradient pairs at (x, y).
void batch_average(const Problem& pb, int agent, const std::vector<int>& batch,
                   const Vec& x, const Vec& y, Vec& gx, Vec& gy) {
  gx = Vec::Zero(pb.dim_x());
  gy = Vec::Zero(pb.dim_y());
  for (int j : batch) {
    gx += pb.grad_x_sample(agent, j, x, y);
    gy += pb.grad_y_sample(agent, j, x, y);
  }
  gx /= static_cast<double>(batch.size());
  gy /= static_cast<double>(batch.size());
}

}  // namespace

EstimatorStepResult init_estimator(EstimatorState& state, const Problem& pb,
                                   int agent, const Vec& x0, const Vec& y0,
                                   std::mt19937_64& rng,
                                   const AdaptiveBatchConfig* adaptive) {
  const int n = pb.local_samples();
  int batch_size = n;
  if (state.mode == EstimatorMode::PrecisionPlus) {
    if (adaptive == nullptr)
      throw std::invalid_argument("init_estimator: PrecisionPlus requires adaptive config");
    // No consensus-gap history yet, so the gamma term drops out.
    batch_size = refresh_batch_size(
        *adaptive, std::numeric_limits<double>::infinity(), n);
  }
  const auto batch = sample_without_replacement(n, batch_size, rng);
  batch_average(pb, agent, batch, x0, y0, state.v, state.u);
  state.prev_x = x0;
  state.prev_y = y0;
  state.t = 0;
  return {batch_size, batch_size, true};
}

EstimatorStepResult estimator_step(EstimatorState& state, const Problem& pb,
                                   int agent, const Vec& x_t, const Vec& y_t,
                                   std::mt19937_64& rng, double gamma_t,
                                   const AdaptiveBatchConfig* adaptive) {
  const int n = pb.local_samples();
  const long iter = state.t + 1;
  EstimatorStepResult res;

  if (iter % state.q == 0) {
    res.checkpoint = true;
    if (state.mode == EstimatorMode::Precision) {
      auto [gx, gy] = pb.full_local_grads(agent, x_t, y_t);
      state.v = std::move(gx);
      state.u = std::move(gy);
      res.batch_size = n;
    } else {
      if (adaptive == nullptr)
        throw std::invalid_argument("estimator_step: PrecisionPlus requires adaptive config");
      res.batch_size = refresh_batch_size(*adaptive, gamma_t, n);
      const auto batch = sample_without_replacement(n, res.batch_size, rng);
      batch_average(pb, agent, batch, x_t, y_t, state.v, state.u);
    }
    res.ifo_calls = res.batch_size;
  } else {
    if (state.q > n)
      throw std::invalid_argument("estimator_step: mini-batch size q exceeds n");
    const auto batch = sample_without_replacement(n, state.q, rng);
    Vec dv = Vec::Zero(pb.dim_x());
    Vec du = Vec::Zero(pb.dim_y());
    for (int j : batch) {
      dv += pb.grad_x_sample(agent, j, x_t, y_t) -
            pb.grad_x_sample(agent, j, state.prev_x, state.prev_y);
      du += pb.grad_y_sample(agent, j, x_t, y_t) -
            pb.grad_y_sample(agent, j, state.prev_x, state.prev_y);
    }
    state.v += dv / static_cast<double>(batch.size());
    state.u += du / static_cast<double>(batch.size());
    res.batch_size = static_cast<int>(batch.size());
    res.ifo_calls = res.batch_size;
  }

  state.prev_x = x_t;
  state.prev_y = y_t;
  state.t = iter;
  return res;
}

double estimate_sigma2(const Problem& pb, const Vec& x, const Vec& y) {
  double acc = 0.0;
  for (int i = 0; i < pb.num_agents(); ++i) {
    auto [gx, gy] = pb.full_local_grads(i, x, y);
    double var = 0.0;
    for (int j = 0; j < pb.local_samples(); ++j) {
      var += (pb.grad_x_sample(i, j, x, y) - gx).squaredNorm() +
             (pb.grad_y_sample(i, j, x, y) - gy).squaredNorm();
    }
    acc += var / pb.local_samples();
  }
  return acc / pb.num_agents();
}

}  // namespace decmm
