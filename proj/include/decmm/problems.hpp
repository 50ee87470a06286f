#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "decmm/common.hpp"
#include "decmm/data.hpp"

namespace decmm {

// Coordinatewise box; bounds may be +-infinity.
struct BoxSet {
  Vec lower;
  Vec upper;

  static BoxSet uniform(int dim, double lo, double hi);
  static BoxSet unbounded(int dim);

  int dim() const { return static_cast<int>(lower.size()); }
  Vec clip(const Vec& v) const;
  bool contains(const Vec& v, double tol = 0.0) const;
};

enum class RegularizerKind { None, ScaledL1 };

// Nonsmooth term h(x), absorbed by the proximal step.
struct Regularizer {
  RegularizerKind kind = RegularizerKind::None;
  double weight = 0.0;

  double value(const Vec& x) const;
};

// Local finite-sum min-max objective: each agent i holds n per-sample
// functions f_ij with F_i = (1/n) sum_j f_ij. Immutable after construction;
// gradient evaluations are pure and never touch complexity counters.
class Problem {
 public:
  virtual ~Problem() = default;

  int num_agents() const { return m_; }
  int local_samples() const { return n_; }
  int dim_x() const { return dim_x_; }
  int dim_y() const { return dim_y_; }
  double mu() const { return mu_; }
  double lf() const { return lf_; }
  const BoxSet& x_box() const { return x_box_; }
  const BoxSet& y_box() const { return y_box_; }
  const Regularizer& regularizer() const { return h_; }

  virtual double sample_value(int agent, int sample, const Vec& x,
                              const Vec& y) const = 0;
  virtual Vec grad_x_sample(int agent, int sample, const Vec& x,
                            const Vec& y) const = 0;
  virtual Vec grad_y_sample(int agent, int sample, const Vec& x,
                            const Vec& y) const = 0;

  // F_i and its exact gradients, averaged over the n local samples.
  double local_value(int agent, const Vec& x, const Vec& y) const;
  std::pair<Vec, Vec> full_local_grads(int agent, const Vec& x,
                                       const Vec& y) const;

  // Closed-form maximizer of (1/m) sum_i F_i(x_bar, .) over the y box,
  // when the problem has one.
  virtual bool has_closed_form_y_star() const { return false; }
  virtual Vec closed_form_y_star(const Vec& x_bar) const;

 protected:
  int m_ = 0, n_ = 0, dim_x_ = 0, dim_y_ = 0;
  double mu_ = 0.0, lf_ = 0.0;
  BoxSet x_box_, y_box_;
  Regularizer h_;

  void check_indices(int agent, int sample) const;
};

// Robust logistic regression with per-sample weights y_ij, nonconvex
// regularizer g and quadratic penalty V. X = [0,10]^d, Y = [0,10]^n,
// mu = lambda1 * n^2.
class RobustRegressionProblem : public Problem {
 public:
  RobustRegressionProblem(std::vector<Dataset> locals, double lambda1,
                          double lambda2, double alpha_reg);

  double sample_value(int agent, int sample, const Vec& x,
                      const Vec& y) const override;
  Vec grad_x_sample(int agent, int sample, const Vec& x,
                    const Vec& y) const override;
  Vec grad_y_sample(int agent, int sample, const Vec& x,
                    const Vec& y) const override;

  bool has_closed_form_y_star() const override { return true; }
  Vec closed_form_y_star(const Vec& x_bar) const override;

  double lambda1() const { return lambda1_; }
  double lambda2() const { return lambda2_; }
  double alpha_reg() const { return alpha_reg_; }
  double logistic_loss(int agent, int sample, const Vec& x) const;

 private:
  std::vector<Dataset> locals_;
  double lambda1_, lambda2_, alpha_reg_;
};

// AUC maximization with a linear scorer: x = (w, c1, c2), scalar dual y,
// tau = positive-class ratio, mu = 2*tau*(1-tau). Boxes are [-10,10].
class AucProblem : public Problem {
 public:
  AucProblem(std::vector<Dataset> locals, double tau);

  double sample_value(int agent, int sample, const Vec& x,
                      const Vec& y) const override;
  Vec grad_x_sample(int agent, int sample, const Vec& x,
                    const Vec& y) const override;
  Vec grad_y_sample(int agent, int sample, const Vec& x,
                    const Vec& y) const override;

  bool has_closed_form_y_star() const override { return true; }
  Vec closed_form_y_star(const Vec& x_bar) const override;

  double tau() const { return tau_; }

 private:
  std::vector<Dataset> locals_;
  double tau_;
  int feat_dim_;
};

struct SyntheticSaddleParams {
  double mu_s = 1.0;            // strong-concavity constant
  double base_curvature = 1.0;  // mean x-curvature
  double noise_a = 0.02;        // scale of the symmetric A_ij noise
  double scale_b = 0.02;        // entry scale of the coupling B_ij
  double scale_c = 0.05;        // entry scale of the shared linear term
};

// Per-sample quadratic saddle with randomly perturbed (possibly indefinite)
// curvature blocks and a closed-form maximizer y*(x_bar). Unconstrained.
class SyntheticSaddleProblem : public Problem {
 public:
  SyntheticSaddleProblem(int m, int n, int dim_x, int dim_y,
                         std::uint64_t seed,
                         SyntheticSaddleParams params = {});

  double sample_value(int agent, int sample, const Vec& x,
                      const Vec& y) const override;
  Vec grad_x_sample(int agent, int sample, const Vec& x,
                    const Vec& y) const override;
  Vec grad_y_sample(int agent, int sample, const Vec& x,
                    const Vec& y) const override;

  bool has_closed_form_y_star() const override { return true; }
  Vec closed_form_y_star(const Vec& x_bar) const override;

  double mu_s() const { return params_.mu_s; }
  const Mat& mean_coupling() const { return b_mean_; }
  // Unique global saddle point of the averaged objective.
  std::pair<Vec, Vec> saddle_point() const;

 private:
  const Mat& a(int agent, int sample) const { return a_[agent * n_ + sample]; }
  const Mat& b(int agent, int sample) const { return b_[agent * n_ + sample]; }
  const Vec& c(int agent, int sample) const { return c_[agent * n_ + sample]; }

  SyntheticSaddleParams params_;
  std::vector<Mat> a_, b_;
  std::vector<Vec> c_;
  Mat a_mean_, b_mean_;
  Vec c_mean_;
};

// Builders. Regression defaults follow the benchmark constants:
// lambda1 = 1/n^2 (when unset), lambda2 = 1e-3, alpha_reg = 10.
std::unique_ptr<RobustRegressionProblem> build_robust_regression(
    const Dataset& ds, int m, std::optional<double> lambda1,
    double lambda2, double alpha_reg, std::uint64_t partition_seed);

std::unique_ptr<AucProblem> build_auc_maximization(const Dataset& ds, int m,
                                                   std::uint64_t partition_seed);

std::unique_ptr<SyntheticSaddleProblem> build_synthetic_saddle(
    int m, int n, int dim_x, int dim_y, std::uint64_t seed,
    SyntheticSaddleParams params = {});

}  // namespace decmm
