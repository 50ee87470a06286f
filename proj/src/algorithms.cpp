#include "decmm/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace decmm {

namespace {

constexpr double kDivergenceBound = 1e12;

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

int auto_stride(long T) {
  if (T <= 10000) return 1;
  return static_cast<int>((T + 9999) / 10000);
}

Vec initial_point(const Vec& given, const BoxSet& box) {
  if (given.size() == 0) return box.clip(Vec::Zero(box.dim()));
  if (given.size() != box.dim())
    throw std::invalid_argument("RunOptions: initial point has wrong dimension");
  if (!box.contains(given))
    throw std::invalid_argument("RunOptions: initial point outside the box");
  return given;
}

void check_finite(const std::vector<AgentState>& states, long iter) {
  for (const auto& s : states) {
    const bool bad = !s.x.allFinite() || !s.y.allFinite() ||
                     s.x.cwiseAbs().maxCoeff() > kDivergenceBound ||
                     s.y.cwiseAbs().maxCoeff() > kDivergenceBound;
    if (bad)
      throw DivergenceError(iter, "iterate diverged at iteration " +
                                      std::to_string(iter));
  }
}

std::vector<std::mt19937_64> make_agent_rngs(std::uint64_t seed, int m) {
  std::vector<std::mt19937_64> rngs;
  rngs.reserve(m);
  for (int i = 0; i < m; ++i)
    rngs.emplace_back(agent_stream_seed(seed, i));
  return rngs;
}

std::vector<Vec> collect_x(const std::vector<AgentState>& states) {
  std::vector<Vec> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s.x);
  return out;
}

std::vector<Vec> collect_y(const std::vector<AgentState>& states) {
  std::vector<Vec> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s.y);
  return out;
}

enum class PipelineEstimator { VarianceReduced, FreshMinibatch };

// Shared prox / mix / estimate / track pipeline behind PRECISION,
// PRECISION+ and Prox-GT-SGDA.
RunResult run_tracking_pipeline(const Problem& pb, const Mat& M,
                                const HyperParams& hp,
                                PipelineEstimator policy, EstimatorMode mode,
                                const AdaptiveBatchConfig* adaptive,
                                int fresh_batch, const RunOptions& opts) {
  const int m = pb.num_agents();
  if (M.rows() != m || M.cols() != m)
    throw std::invalid_argument("run: mixing matrix size does not match agent count");
  if (hp.q < 1) throw std::invalid_argument("run: q must be >= 1");
  if (policy == PipelineEstimator::VarianceReduced &&
      mode == EstimatorMode::PrecisionPlus && adaptive == nullptr)
    throw std::invalid_argument("run: PRECISION+ requires an adaptive batch config");

  const Vec x0 = initial_point(opts.x0, pb.x_box());
  const Vec y0 = initial_point(opts.y0, pb.y_box());
  auto rngs = make_agent_rngs(opts.seed, m);

  std::vector<AgentState> states(m);
  ComplexityCounters counters;
  int last_batch = 0;
  for (int i = 0; i < m; ++i) {
    auto& s = states[i];
    s.x = x0;
    s.y = y0;
    s.est.q = hp.q;
    s.est.mode = mode;
    if (policy == PipelineEstimator::VarianceReduced) {
      const auto r = init_estimator(s.est, pb, i, x0, y0, rngs[i], adaptive);
      counters.ifo_calls += r.ifo_calls;
      last_batch = r.batch_size;
    } else {
      const auto batch = sample_without_replacement(pb.local_samples(),
                                                    fresh_batch, rngs[i]);
      Vec gx = Vec::Zero(pb.dim_x());
      Vec gy = Vec::Zero(pb.dim_y());
      for (int j : batch) {
        gx += pb.grad_x_sample(i, j, x0, y0);
        gy += pb.grad_y_sample(i, j, x0, y0);
      }
      s.est.v = gx / static_cast<double>(batch.size());
      s.est.u = gy / static_cast<double>(batch.size());
      counters.ifo_calls += fresh_batch;
      last_batch = fresh_batch;
    }
    s.p = s.est.v;
    s.d = s.est.u;
  }

  const int stride = opts.record_stride > 0 ? opts.record_stride
                                            : auto_stride(hp.T);
  RunResult result;
  std::vector<double> gamma_window;
  double gamma_t = std::numeric_limits<double>::infinity();

  for (long t = 0; t < hp.T; ++t) {
    // Step 1: local proximal operations.
    for (auto& s : states) {
      s.x_tilde = prox_x(s.x, s.p, hp.tau, pb.regularizer(), pb.x_box());
      s.y_tilde = prox_y(s.y, s.d, hp.alpha, pb.y_box());
    }

    Vec x_bar = Vec::Zero(pb.dim_x());
    for (const auto& s : states) x_bar += s.x;
    x_bar /= m;
    double gap = 0.0;
    for (const auto& s : states) gap += (s.x_tilde - x_bar).squaredNorm();
    gamma_window.push_back(gap);

    if (t % stride == 0) {
      IterationRecord rec;
      rec.iter = t;
      rec.ifo_calls = counters.ifo_calls;
      rec.comm_rounds = counters.comm_rounds;
      rec.batch_size = last_batch;
      std::vector<Vec> xs = collect_x(states), ys = collect_y(states);
      std::vector<Vec> xts;
      xts.reserve(m);
      for (const auto& s : states) xts.push_back(s.x_tilde);
      rec.metric = compute_metric(pb, xs, ys, xts);
      rec.loss = global_loss(pb, xs, ys);
      result.records.push_back(std::move(rec));
    }

    // Step 2: consensus update.
    consensus_mix(states, M, hp.nu, hp.eta);
    counters.comm_rounds += 1;
    check_finite(states, t);

    // Step 3: local gradient estimate at the new iterate.
    if (policy == PipelineEstimator::VarianceReduced && (t + 1) % hp.q == 0) {
      gamma_t = gamma_update(gamma_window, hp.q);
      gamma_window.clear();
    }
    std::vector<Vec> old_v(m), old_u(m);
    for (int i = 0; i < m; ++i) {
      auto& s = states[i];
      old_v[i] = s.est.v;
      old_u[i] = s.est.u;
      if (policy == PipelineEstimator::VarianceReduced) {
        const auto r =
            estimator_step(s.est, pb, i, s.x, s.y, rngs[i], gamma_t, adaptive);
        counters.ifo_calls += r.ifo_calls;
        last_batch = r.batch_size;
      } else {
        const auto batch = sample_without_replacement(pb.local_samples(),
                                                      fresh_batch, rngs[i]);
        Vec gx = Vec::Zero(pb.dim_x());
        Vec gy = Vec::Zero(pb.dim_y());
        for (int j : batch) {
          gx += pb.grad_x_sample(i, j, s.x, s.y);
          gy += pb.grad_y_sample(i, j, s.x, s.y);
        }
        s.est.v = gx / static_cast<double>(batch.size());
        s.est.u = gy / static_cast<double>(batch.size());
        counters.ifo_calls += fresh_batch;
        last_batch = fresh_batch;
      }
    }

    // Step 4: gradient tracking.
    tracker_update(states, M, old_v, old_u);
  }

  result.counters = counters;
  result.final_x = collect_x(states);
  result.final_y = collect_y(states);
  return result;
}

}  // namespace

Vec prox_x(const Vec& x_t, const Vec& p_t, double tau, const Regularizer& h,
           const BoxSet& box) {
  if (!(tau > 0.0)) throw std::invalid_argument("prox_x: tau must be positive");
  Vec cand = x_t - p_t / tau;
  switch (h.kind) {
    case RegularizerKind::None:
      break;
    case RegularizerKind::ScaledL1: {
      const double thr = h.weight / tau;
      for (int k = 0; k < cand.size(); ++k)
        cand(k) = soft_threshold(cand(k), thr);
      break;
    }
    default:
      throw std::invalid_argument("prox_x: unsupported regularizer");
  }
  return box.clip(cand);
}

Vec prox_y(const Vec& y_t, const Vec& d_t, double alpha, const BoxSet& box) {
  if (!(alpha > 0.0)) throw std::invalid_argument("prox_y: alpha must be positive");
  return box.clip(y_t + alpha * d_t);
}

void consensus_mix(std::vector<AgentState>& states, const Mat& M, double nu,
                   double eta) {
  const int m = static_cast<int>(states.size());
  std::vector<Vec> new_x(m), new_y(m);
  for (int i = 0; i < m; ++i) {
    Vec xi = Vec::Zero(states[i].x.size());
    Vec yi = Vec::Zero(states[i].y.size());
    for (int j = 0; j < m; ++j) {
      xi += M(i, j) * states[j].x;
      yi += M(i, j) * states[j].y;
    }
    new_x[i] = xi + nu * (states[i].x_tilde - states[i].x);
    new_y[i] = yi + eta * (states[i].y_tilde - states[i].y);
  }
  for (int i = 0; i < m; ++i) {
    states[i].x = std::move(new_x[i]);
    states[i].y = std::move(new_y[i]);
  }
}

void tracker_update(std::vector<AgentState>& states, const Mat& M,
                    const std::vector<Vec>& old_v,
                    const std::vector<Vec>& old_u) {
  const int m = static_cast<int>(states.size());
  std::vector<Vec> new_p(m), new_d(m);
  for (int i = 0; i < m; ++i) {
    Vec pi = Vec::Zero(states[i].p.size());
    Vec di = Vec::Zero(states[i].d.size());
    for (int j = 0; j < m; ++j) {
      pi += M(i, j) * states[j].p;
      di += M(i, j) * states[j].d;
    }
    new_p[i] = pi + states[i].est.v - old_v[i];
    new_d[i] = di + states[i].est.u - old_u[i];
  }
  for (int i = 0; i < m; ++i) {
    states[i].p = std::move(new_p[i]);
    states[i].d = std::move(new_d[i]);
  }
}

RunResult run_precision(const Problem& pb, const Mat& M, const HyperParams& hp,
                        EstimatorMode mode, const AdaptiveBatchConfig* adaptive,
                        const RunOptions& opts) {
  return run_tracking_pipeline(pb, M, hp, PipelineEstimator::VarianceReduced,
                               mode, adaptive, 0, opts);
}

RunResult run_prox_gt_sgda(const Problem& pb, const Mat& M,
                           const HyperParams& hp, int batch,
                           const RunOptions& opts) {
  if (batch < 1 || batch > pb.local_samples())
    throw std::invalid_argument("run_prox_gt_sgda: batch must be in [1, n]");
  return run_tracking_pipeline(pb, M, hp, PipelineEstimator::FreshMinibatch,
                               EstimatorMode::Precision, nullptr, batch, opts);
}

RunResult run_prox_dsgda(const Problem& pb, const Mat& M, double step_gamma,
                         double step_eta, int batch, long T,
                         const RunOptions& opts) {
  const int m = pb.num_agents();
  if (M.rows() != m || M.cols() != m)
    throw std::invalid_argument("run_prox_dsgda: mixing matrix size mismatch");
  if (batch < 1 || batch > pb.local_samples())
    throw std::invalid_argument("run_prox_dsgda: batch must be in [1, n]");

  const Vec x0 = initial_point(opts.x0, pb.x_box());
  const Vec y0 = initial_point(opts.y0, pb.y_box());
  auto rngs = make_agent_rngs(opts.seed, m);

  std::vector<Vec> xs(m, x0), ys(m, y0);
  ComplexityCounters counters;
  const int stride = opts.record_stride > 0 ? opts.record_stride
                                            : auto_stride(T);
  RunResult result;
  const int rec_batch = batch == pb.local_samples() ? 0 : batch;

  for (long t = 0; t < T; ++t) {
    if (t % stride == 0) {
      IterationRecord rec;
      rec.iter = t;
      rec.ifo_calls = counters.ifo_calls;
      rec.comm_rounds = counters.comm_rounds;
      rec.batch_size = rec_batch;
      rec.metric = compute_metric(pb, xs, ys, xs);  // no prox point; x_tilde = x
      rec.loss = global_loss(pb, xs, ys);
      result.records.push_back(std::move(rec));
    }

    std::vector<Vec> gx(m), gy(m);
    for (int i = 0; i < m; ++i) {
      const auto idx =
          sample_without_replacement(pb.local_samples(), batch, rngs[i]);
      Vec ax = Vec::Zero(pb.dim_x());
      Vec ay = Vec::Zero(pb.dim_y());
      for (int j : idx) {
        ax += pb.grad_x_sample(i, j, xs[i], ys[i]);
        ay += pb.grad_y_sample(i, j, xs[i], ys[i]);
      }
      gx[i] = ax / static_cast<double>(idx.size());
      gy[i] = ay / static_cast<double>(idx.size());
      counters.ifo_calls += batch;
    }

    std::vector<Vec> new_x(m), new_y(m);
    for (int i = 0; i < m; ++i) {
      Vec mx = Vec::Zero(pb.dim_x());
      Vec my = Vec::Zero(pb.dim_y());
      for (int j = 0; j < m; ++j) {
        mx += M(i, j) * xs[j];
        my += M(i, j) * ys[j];
      }
      new_x[i] = pb.x_box().clip(mx - step_gamma * gx[i]);
      new_y[i] = pb.y_box().clip(my + step_eta * gy[i]);  // ascent in y
    }
    xs = std::move(new_x);
    ys = std::move(new_y);
    counters.comm_rounds += 1;

    for (int i = 0; i < m; ++i) {
      if (!xs[i].allFinite() || !ys[i].allFinite() ||
          xs[i].cwiseAbs().maxCoeff() > kDivergenceBound ||
          ys[i].cwiseAbs().maxCoeff() > kDivergenceBound)
        throw DivergenceError(t, "iterate diverged at iteration " +
                                     std::to_string(t));
    }
  }

  result.counters = counters;
  result.final_x = xs;
  result.final_y = ys;
  return result;
}

StepsizeReport check_stepsize_conditions(double lf, double mu, double lambda,
                                         int m, double tau, double alpha,
                                         double beta, double eta, double nu,
                                         int q, int n) {
  StepsizeReport rep;
  const double l2 = lambda * lambda;
  const double c1 = (1.0 - l2) / (1.0 + l2);
  rep.c1 = c1;
  const double lf2 = lf * lf;

  rep.eta_bound_terms = {
      1.0 / 8.0,
      c1 * m * mu / (375.0 * alpha * lf2),
      15.0 * lf2 / (beta * mu * alpha * alpha * c1),
      3.0 * c1 * c1 * m / (10.0 * (1.0 + c1) * mu * alpha),
  };
  rep.eta_max = *std::min_element(rep.eta_bound_terms.begin(),
                                  rep.eta_bound_terms.end());

  rep.nu_bound_terms = {
      c1 * m * beta / (40.0 * lf2),
      2.0 * c1 * m * beta / (5.0 * tau),
      2.0 * c1 * beta * mu * mu * m / (375.0 * lf2 * lf2),
      5.0 * tau / (3.0 * m * c1),
      tau / (6.0 * m * (1.0 + 1.0 / c1)),
      3.0 * mu * eta * alpha * tau / (17.0 * lf2),
      tau / (3.0 * (lf + lf2 / mu)),
  };
  rep.nu_max = *std::min_element(rep.nu_bound_terms.begin(),
                                 rep.nu_bound_terms.end());

  const double beta_bound = std::min(tau / 12.0, 1.0 / 3.0);
  const double q_expected = std::ceil(std::sqrt(static_cast<double>(n)));
  rep.conditions = {
      {"beta <= min(tau/12, 1/3)", beta <= beta_bound, beta_bound, beta},
      {"alpha <= 1/(4 Lf)", alpha <= 1.0 / (4.0 * lf), 1.0 / (4.0 * lf), alpha},
      {"q == ceil(sqrt(n))", q == static_cast<int>(q_expected), q_expected,
       static_cast<double>(q)},
      {"eta <= eta_max", eta <= rep.eta_max, rep.eta_max, eta},
      {"nu <= nu_max", nu <= rep.nu_max, rep.nu_max, nu},
  };
  rep.feasible = std::all_of(rep.conditions.begin(), rep.conditions.end(),
                             [](const ConditionCheck& c) { return c.ok; });
  return rep;
}

}  // namespace decmm
