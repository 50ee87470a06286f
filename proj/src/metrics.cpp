#include "decmm/metrics.hpp"

#include <stdexcept>

namespace decmm {

namespace {

Vec mean_of(const std::vector<Vec>& vs) {
  Vec acc = Vec::Zero(vs.front().size());
  for (const auto& v : vs) acc += v;
  return acc / static_cast<double>(vs.size());
}

}  // namespace

Vec y_star(const Problem& pb, const Vec& x_bar) {
  if (pb.has_closed_form_y_star()) return pb.closed_form_y_star(x_bar);
  return y_star_ascent(pb, x_bar);
}

Vec y_star_ascent(const Problem& pb, const Vec& x_bar) {
  const double step = 1.0 / pb.lf();
  const int m = pb.num_agents();
  Vec y = pb.y_box().clip(Vec::Zero(pb.dim_y()));
  for (long k = 0; k < 1000000; ++k) {
    Vec g = Vec::Zero(pb.dim_y());
    for (int i = 0; i < m; ++i) g += pb.full_local_grads(i, x_bar, y).second;
    g /= m;
    Vec next = pb.y_box().clip(y + step * g);
    const double move = (next - y).norm();
    y = std::move(next);
    if (move < 1e-10) return y;
  }
  throw std::runtime_error(
      "y_star_ascent: no convergence within 1e6 iterations (check mu/L_f)");
}

MetricBreakdown compute_metric(const Problem& pb, const std::vector<Vec>& xs,
                               const std::vector<Vec>& ys,
                               const std::vector<Vec>& x_tildes) {
  const int m = pb.num_agents();
  if (static_cast<int>(xs.size()) != m || static_cast<int>(ys.size()) != m ||
      static_cast<int>(x_tildes.size()) != m)
    throw std::invalid_argument("compute_metric: wrong number of agent blocks");

  const Vec x_bar = mean_of(xs);
  const Vec y_bar = mean_of(ys);

  MetricBreakdown out;
  double cons_x_sum = 0.0, cons_y_sum = 0.0;
  for (int i = 0; i < m; ++i) {
    out.consensus_x_tilde += (x_tildes[i] - x_bar).squaredNorm();
    cons_x_sum += (xs[i] - x_bar).squaredNorm();
    cons_y_sum += (ys[i] - y_bar).squaredNorm();
  }
  out.consensus_x = cons_x_sum / m;
  out.consensus_y = cons_y_sum / m;

  out.saddle_err = (y_star(pb, x_bar) - y_bar).squaredNorm();

  Vec g = Vec::Zero(pb.dim_x());
  for (int i = 0; i < m; ++i) g += pb.full_local_grads(i, x_bar, y_bar).first;
  g /= m;
  out.grad_norm2 = g.squaredNorm();

  // The four-term metric keeps its consensus sums unnormalized, as written;
  // the stationarity combination uses the 1/m-averaged terms plus the
  // global gradient magnitude.
  out.metric_paper =
      out.consensus_x_tilde + cons_x_sum + cons_y_sum + out.saddle_err;
  out.metric_stationarity =
      out.consensus_x + out.consensus_y + out.saddle_err + out.grad_norm2;
  return out;
}

double global_loss(const Problem& pb, const std::vector<Vec>& xs,
                   const std::vector<Vec>& ys) {
  const int m = pb.num_agents();
  double loss = 0.0;
  for (int i = 0; i < m; ++i) loss += pb.local_value(i, xs[i], ys[i]);
  loss /= m;
  return loss + pb.regularizer().value(mean_of(xs));
}

double potential_diagnostic(const Problem& pb, const std::vector<Vec>& xs,
                            const std::vector<Vec>& ys, double nu, double eta,
                            double beta) {
  const int m = pb.num_agents();
  const Vec x_bar = mean_of(xs);
  const Vec y_bar = mean_of(ys);
  const Vec ystar = y_star(pb, x_bar);

  double q_val = 0.0;
  for (int i = 0; i < m; ++i) q_val += pb.local_value(i, x_bar, ystar);
  q_val = q_val / m + pb.regularizer().value(x_bar);

  double cons = 0.0;
  for (int i = 0; i < m; ++i)
    cons += (xs[i] - x_bar).squaredNorm() + (ys[i] - y_bar).squaredNorm();
  cons /= m;

  const double lf = pb.lf();
  const double coef = 4.0 * nu * lf * lf / (beta * pb.mu() * eta * eta);
  return q_val + coef * (y_bar - ystar).squaredNorm() + cons;
}

}  // namespace decmm
