#include "decmm/problems.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace decmm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log(1 + exp(z)) without overflow.
double log1pexp(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

BoxSet BoxSet::uniform(int dim, double lo, double hi) {
  BoxSet b;
  b.lower = Vec::Constant(dim, lo);
  b.upper = Vec::Constant(dim, hi);
  return b;
}

BoxSet BoxSet::unbounded(int dim) { return uniform(dim, -kInf, kInf); }

Vec BoxSet::clip(const Vec& v) const {
  return v.cwiseMax(lower).cwiseMin(upper);
}

bool BoxSet::contains(const Vec& v, double tol) const {
  return (v.array() >= lower.array() - tol).all() &&
         (v.array() <= upper.array() + tol).all();
}

double Regularizer::value(const Vec& x) const {
  switch (kind) {
    case RegularizerKind::None:
      return 0.0;
    case RegularizerKind::ScaledL1:
      return weight * x.lpNorm<1>();
  }
  return 0.0;
}

void Problem::check_indices(int agent, int sample) const {
  if (agent < 0 || agent >= m_)
    throw std::out_of_range("Problem: agent index out of range");
  if (sample < 0 || sample >= n_)
    throw std::out_of_range("Problem: sample index out of range");
}

double Problem::local_value(int agent, const Vec& x, const Vec& y) const {
  double acc = 0.0;
  for (int j = 0; j < n_; ++j) acc += sample_value(agent, j, x, y);
  return acc / n_;
}

std::pair<Vec, Vec> Problem::full_local_grads(int agent, const Vec& x,
                                              const Vec& y) const {
  Vec gx = Vec::Zero(dim_x_);
  Vec gy = Vec::Zero(dim_y_);
  for (int j = 0; j < n_; ++j) {
    gx += grad_x_sample(agent, j, x, y);
    gy += grad_y_sample(agent, j, x, y);
  }
  gx /= n_;
  gy /= n_;
  return {std::move(gx), std::move(gy)};
}

Vec Problem::closed_form_y_star(const Vec&) const {
  throw std::logic_error("Problem: no closed-form y* available");
}

// ---------------------------------------------------------------------------
// Robust regression
// ---------------------------------------------------------------------------

RobustRegressionProblem::RobustRegressionProblem(std::vector<Dataset> locals,
                                                 double lambda1, double lambda2,
                                                 double alpha_reg)
    : locals_(std::move(locals)),
      lambda1_(lambda1),
      lambda2_(lambda2),
      alpha_reg_(alpha_reg) {
  if (locals_.empty())
    throw std::invalid_argument("RobustRegressionProblem: no agents");
  m_ = static_cast<int>(locals_.size());
  n_ = locals_[0].size();
  dim_x_ = locals_[0].dim();
  dim_y_ = n_;
  for (const auto& ds : locals_) {
    if (ds.size() != n_ || ds.dim() != dim_x_)
      throw std::invalid_argument("RobustRegressionProblem: ragged local datasets");
    for (int j = 0; j < ds.size(); ++j)
      if (ds.labels(j) != 1.0 && ds.labels(j) != -1.0)
        throw std::invalid_argument("RobustRegressionProblem: labels must be -1 or +1");
  }
  x_box_ = BoxSet::uniform(dim_x_, 0.0, 10.0);
  y_box_ = BoxSet::uniform(dim_y_, 0.0, 10.0);
  mu_ = lambda1_ * n_ * n_;

  double max_a2 = 0.0;
  for (const auto& ds : locals_)
    for (int j = 0; j < ds.size(); ++j)
      max_a2 = std::max(max_a2, ds.features.row(j).squaredNorm());
  const double y_ub = 10.0;
  // Block bound on the joint per-sample Hessian: xx-curvature plus the
  // x-y coupling (|l'| <= 1), against the exact yy-curvature lambda1*n^2.
  lf_ = std::max(y_ub * 0.25 * max_a2 + 2.0 * lambda2_ * alpha_reg_, mu_) +
        std::sqrt(max_a2);
}

double RobustRegressionProblem::logistic_loss(int agent, int sample,
                                              const Vec& x) const {
  const auto& ds = locals_[agent];
  const double z = -ds.labels(sample) * ds.features.row(sample).dot(x);
  return log1pexp(z);
}

double RobustRegressionProblem::sample_value(int agent, int sample,
                                             const Vec& x, const Vec& y) const {
  check_indices(agent, sample);
  const double l = logistic_loss(agent, sample, x);
  const double v = 0.5 * lambda1_ * (n_ * y - Vec::Ones(n_)).squaredNorm();
  double g = 0.0;
  for (int k = 0; k < dim_x_; ++k) {
    const double xk2 = x(k) * x(k);
    g += alpha_reg_ * xk2 / (1.0 + alpha_reg_ * xk2);
  }
  return y(sample) * l - v + lambda2_ * g;
}

Vec RobustRegressionProblem::grad_x_sample(int agent, int sample, const Vec& x,
                                           const Vec& y) const {
  check_indices(agent, sample);
  const auto& ds = locals_[agent];
  const double b = ds.labels(sample);
  const double z = -b * ds.features.row(sample).dot(x);
  Vec g = (-b * sigmoid(z) * y(sample)) * ds.features.row(sample).transpose();
  for (int k = 0; k < dim_x_; ++k) {
    const double denom = 1.0 + alpha_reg_ * x(k) * x(k);
    g(k) += lambda2_ * 2.0 * alpha_reg_ * x(k) / (denom * denom);
  }
  return g;
}

Vec RobustRegressionProblem::grad_y_sample(int agent, int sample, const Vec& x,
                                           const Vec& y) const {
  check_indices(agent, sample);
  Vec g = -lambda1_ * n_ * (n_ * y - Vec::Ones(n_));
  g(sample) += logistic_loss(agent, sample, x);
  return g;
}

Vec RobustRegressionProblem::closed_form_y_star(const Vec& x_bar) const {
  // Maximizing the agent-averaged objective over a shared y gives, per
  // coordinate j, y_j = (lbar_j / (lambda1 n^2) + 1) / n clipped to the box,
  // where lbar_j averages the j-th sample loss across agents.
  Vec y(n_);
  for (int j = 0; j < n_; ++j) {
    double lbar = 0.0;
    for (int i = 0; i < m_; ++i) lbar += logistic_loss(i, j, x_bar);
    lbar /= m_;
    y(j) = (lbar / (lambda1_ * n_ * n_) + 1.0) / n_;
  }
  return y_box_.clip(y);
}

// ---------------------------------------------------------------------------
// AUC maximization
// ---------------------------------------------------------------------------

AucProblem::AucProblem(std::vector<Dataset> locals, double tau)
    : locals_(std::move(locals)), tau_(tau) {
  if (locals_.empty()) throw std::invalid_argument("AucProblem: no agents");
  if (!(tau_ > 0.0) || !(tau_ < 1.0))
    throw std::invalid_argument("AucProblem: both classes must be present");
  m_ = static_cast<int>(locals_.size());
  n_ = locals_[0].size();
  feat_dim_ = locals_[0].dim();
  for (const auto& ds : locals_)
    if (ds.size() != n_ || ds.dim() != feat_dim_)
      throw std::invalid_argument("AucProblem: ragged local datasets");
  dim_x_ = feat_dim_ + 2;  // (w, c1, c2)
  dim_y_ = 1;
  mu_ = 2.0 * tau_ * (1.0 - tau_);
  x_box_ = BoxSet::uniform(dim_x_, -10.0, 10.0);
  y_box_ = BoxSet::uniform(1, -10.0, 10.0);

  double max_a2 = 0.0;
  for (const auto& ds : locals_)
    for (int j = 0; j < ds.size(); ++j)
      max_a2 = std::max(max_a2, ds.features.row(j).squaredNorm());
  const double wt = std::max(tau_, 1.0 - tau_);
  lf_ = 2.0 * wt * (max_a2 + 1.0) + 2.0 * wt * std::sqrt(max_a2) + mu_;
}

double AucProblem::sample_value(int agent, int sample, const Vec& x,
                                const Vec& y) const {
  check_indices(agent, sample);
  const auto& ds = locals_[agent];
  const double h = ds.features.row(sample).dot(x.head(feat_dim_));
  const double c1 = x(feat_dim_);
  const double c2 = x(feat_dim_ + 1);
  const double yv = y(0);
  double val = -tau_ * (1.0 - tau_) * yv * yv;
  if (ds.labels(sample) > 0) {
    val += (1.0 - tau_) * (h - c1) * (h - c1);
    val -= 2.0 * (1.0 + yv) * (1.0 - tau_) * h;
  } else {
    val += tau_ * (h - c2) * (h - c2);
    val += 2.0 * (1.0 + yv) * tau_ * h;
  }
  return val;
}

Vec AucProblem::grad_x_sample(int agent, int sample, const Vec& x,
                              const Vec& y) const {
  check_indices(agent, sample);
  const auto& ds = locals_[agent];
  const auto a = ds.features.row(sample);
  const double h = a.dot(x.head(feat_dim_));
  const double yv = y(0);
  Vec g = Vec::Zero(dim_x_);
  if (ds.labels(sample) > 0) {
    const double c1 = x(feat_dim_);
    g.head(feat_dim_) =
        (2.0 * (1.0 - tau_) * (h - c1) - 2.0 * (1.0 + yv) * (1.0 - tau_)) *
        a.transpose();
    g(feat_dim_) = -2.0 * (1.0 - tau_) * (h - c1);
  } else {
    const double c2 = x(feat_dim_ + 1);
    g.head(feat_dim_) =
        (2.0 * tau_ * (h - c2) + 2.0 * (1.0 + yv) * tau_) * a.transpose();
    g(feat_dim_ + 1) = -2.0 * tau_ * (h - c2);
  }
  return g;
}

Vec AucProblem::grad_y_sample(int agent, int sample, const Vec& x,
                              const Vec& y) const {
  check_indices(agent, sample);
  const auto& ds = locals_[agent];
  const double h = ds.features.row(sample).dot(x.head(feat_dim_));
  Vec g(1);
  g(0) = -2.0 * tau_ * (1.0 - tau_) * y(0);
  if (ds.labels(sample) > 0)
    g(0) -= 2.0 * (1.0 - tau_) * h;
  else
    g(0) += 2.0 * tau_ * h;
  return g;
}

Vec AucProblem::closed_form_y_star(const Vec& x_bar) const {
  double s = 0.0;
  for (int i = 0; i < m_; ++i) {
    const auto& ds = locals_[i];
    for (int j = 0; j < n_; ++j) {
      const double h = ds.features.row(j).dot(x_bar.head(feat_dim_));
      s += (ds.labels(j) > 0) ? -2.0 * (1.0 - tau_) * h : 2.0 * tau_ * h;
    }
  }
  s /= static_cast<double>(m_) * n_;
  Vec y(1);
  y(0) = s / (2.0 * tau_ * (1.0 - tau_));
  return y_box_.clip(y);
}

// ---------------------------------------------------------------------------
// Synthetic saddle
// ---------------------------------------------------------------------------

SyntheticSaddleProblem::SyntheticSaddleProblem(int m, int n, int dim_x,
                                               int dim_y, std::uint64_t seed,
                                               SyntheticSaddleParams params)
    : params_(params) {
  if (m < 1 || n < 1 || dim_x < 1 || dim_y < 1)
    throw std::invalid_argument("SyntheticSaddleProblem: dimensions must be positive");
  if (!(params_.mu_s > 0.0))
    throw std::invalid_argument("SyntheticSaddleProblem: mu_s must be positive");
  m_ = m;
  n_ = n;
  dim_x_ = dim_x;
  dim_y_ = dim_y;
  mu_ = params_.mu_s;
  x_box_ = BoxSet::unbounded(dim_x);
  y_box_ = BoxSet::unbounded(dim_y);

  std::mt19937_64 rng(splitmix64(seed));
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto gauss_mat = [&](int r, int c) {
    Mat g(r, c);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < c; ++b) g(a, b) = gauss(rng);
    return g;
  };

  const Mat b_base = 2.0 * params_.scale_b * gauss_mat(dim_x, dim_y);
  Vec c_base(dim_x);
  for (int k = 0; k < dim_x; ++k) c_base(k) = params_.scale_c * gauss(rng);

  a_.reserve(static_cast<std::size_t>(m) * n);
  b_.reserve(static_cast<std::size_t>(m) * n);
  c_.reserve(static_cast<std::size_t>(m) * n);
  a_mean_ = Mat::Zero(dim_x, dim_x);
  b_mean_ = Mat::Zero(dim_x, dim_y);
  c_mean_ = Vec::Zero(dim_x);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const Mat g = gauss_mat(dim_x, dim_x);
      Mat aij = params_.base_curvature * Mat::Identity(dim_x, dim_x) +
                params_.noise_a * 0.5 * (g + g.transpose());
      Mat bij = b_base + params_.scale_b * gauss_mat(dim_x, dim_y);
      Vec cij(dim_x);
      for (int k = 0; k < dim_x; ++k)
        cij(k) = c_base(k) + 0.5 * params_.scale_c * gauss(rng);
      a_mean_ += aij;
      b_mean_ += bij;
      c_mean_ += cij;
      a_.push_back(std::move(aij));
      b_.push_back(std::move(bij));
      c_.push_back(std::move(cij));
    }
  }
  const double total = static_cast<double>(m) * n;
  a_mean_ /= total;
  b_mean_ /= total;
  c_mean_ /= total;

  // Exact per-sample smoothness: max spectral norm of the joint Hessian
  // [[A, B], [B^T, -mu I]].
  double lf = 0.0;
  Mat hess = Mat::Zero(dim_x + dim_y, dim_x + dim_y);
  for (std::size_t s = 0; s < a_.size(); ++s) {
    hess.topLeftCorner(dim_x, dim_x) = a_[s];
    hess.topRightCorner(dim_x, dim_y) = b_[s];
    hess.bottomLeftCorner(dim_y, dim_x) = b_[s].transpose();
    hess.bottomRightCorner(dim_y, dim_y) =
        -params_.mu_s * Mat::Identity(dim_y, dim_y);
    Eigen::SelfAdjointEigenSolver<Mat> eig(hess);
    lf = std::max(lf, std::max(std::abs(eig.eigenvalues()(0)),
                               std::abs(eig.eigenvalues()(dim_x + dim_y - 1))));
  }
  lf_ = lf;
}

double SyntheticSaddleProblem::sample_value(int agent, int sample, const Vec& x,
                                            const Vec& y) const {
  check_indices(agent, sample);
  return 0.5 * x.dot(a(agent, sample) * x) + x.dot(b(agent, sample) * y) -
         0.5 * params_.mu_s * y.squaredNorm() + c(agent, sample).dot(x);
}

Vec SyntheticSaddleProblem::grad_x_sample(int agent, int sample, const Vec& x,
                                          const Vec& y) const {
  check_indices(agent, sample);
  return a(agent, sample) * x + b(agent, sample) * y + c(agent, sample);
}

Vec SyntheticSaddleProblem::grad_y_sample(int agent, int sample, const Vec& x,
                                          const Vec& y) const {
  check_indices(agent, sample);
  return b(agent, sample).transpose() * x - params_.mu_s * y;
}

Vec SyntheticSaddleProblem::closed_form_y_star(const Vec& x_bar) const {
  return (b_mean_.transpose() * x_bar) / params_.mu_s;
}

std::pair<Vec, Vec> SyntheticSaddleProblem::saddle_point() const {
  const Mat q =
      a_mean_ + b_mean_ * b_mean_.transpose() / params_.mu_s;
  const Vec x = q.ldlt().solve(-c_mean_);
  return {x, closed_form_y_star(x)};
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

std::unique_ptr<RobustRegressionProblem> build_robust_regression(
    const Dataset& ds, int m, std::optional<double> lambda1, double lambda2,
    double alpha_reg, std::uint64_t partition_seed) {
  auto locals = partition_equal(ds, m, partition_seed);
  const int n = locals[0].size();
  const double l1 = lambda1.value_or(1.0 / (static_cast<double>(n) * n));
  return std::make_unique<RobustRegressionProblem>(std::move(locals), l1,
                                                   lambda2, alpha_reg);
}

std::unique_ptr<AucProblem> build_auc_maximization(const Dataset& ds, int m,
                                                   std::uint64_t partition_seed) {
  int pos = 0;
  for (int i = 0; i < ds.size(); ++i)
    if (ds.labels(i) > 0) ++pos;
  const double tau = static_cast<double>(pos) / ds.size();
  if (pos == 0 || pos == ds.size())
    throw std::invalid_argument(
        "build_auc_maximization: dataset must contain both classes");
  return std::make_unique<AucProblem>(partition_equal(ds, m, partition_seed),
                                      tau);
}

std::unique_ptr<SyntheticSaddleProblem> build_synthetic_saddle(
    int m, int n, int dim_x, int dim_y, std::uint64_t seed,
    SyntheticSaddleParams params) {
  return std::make_unique<SyntheticSaddleProblem>(m, n, dim_x, dim_y, seed,
                                                  params);
}

}  // namespace decmm
