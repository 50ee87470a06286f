#include "decmm/config.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "decmm/data.hpp"
#include "decmm/metrics.hpp"

namespace decmm {

namespace {

struct RawConfig {
  ExperimentConfig cfg;
  bool has_T = false;
};

double to_double(const std::string& key, const std::string& val) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(val, &pos);
    if (pos == val.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: key '" + key + "' has non-numeric value '" + val + "'");
}

long to_long(const std::string& key, const std::string& val) {
  const double v = to_double(key, val);
  if (v != std::floor(v))
    throw ConfigError("config: key '" + key + "' must be an integer");
  return static_cast<long>(v);
}

void apply(RawConfig& raw, const std::string& key, const std::string& val) {
  ExperimentConfig& c = raw.cfg;
  if (key == "problem.type") {
    if (val == "regression")
      c.problem = ProblemKind::Regression;
    else if (val == "auc")
      c.problem = ProblemKind::Auc;
    else if (val == "synthetic" || val == "synthetic_saddle")
      c.problem = ProblemKind::SyntheticSaddle;
    else
      throw ConfigError("config: unknown problem.type '" + val + "'");
  } else if (key == "algo") {
    if (val == "precision")
      c.algo = AlgorithmKind::Precision;
    else if (val == "precision_plus")
      c.algo = AlgorithmKind::PrecisionPlus;
    else if (val == "prox_dsgda")
      c.algo = AlgorithmKind::ProxDsgda;
    else if (val == "prox_gt_sgda")
      c.algo = AlgorithmKind::ProxGtSgda;
    else
      throw ConfigError("config: unknown algo '" + val + "'");
  } else if (key == "data.path") {
    c.data_path = val;
  } else if (key == "data.synthetic_samples") {
    c.synthetic_samples = static_cast<int>(to_long(key, val));
  } else if (key == "data.synthetic_features") {
    c.synthetic_features = static_cast<int>(to_long(key, val));
  } else if (key == "data.seed") {
    c.data_seed = static_cast<std::uint64_t>(to_long(key, val));
  } else if (key == "problem.lambda1") {
    c.lambda1 = to_double(key, val);
  } else if (key == "problem.lambda2") {
    c.lambda2 = to_double(key, val);
  } else if (key == "problem.alpha_reg") {
    c.alpha_reg = to_double(key, val);
  } else if (key == "problem.n") {
    c.saddle_n = static_cast<int>(to_long(key, val));
  } else if (key == "problem.dim_x") {
    c.saddle_dim_x = static_cast<int>(to_long(key, val));
  } else if (key == "problem.dim_y") {
    c.saddle_dim_y = static_cast<int>(to_long(key, val));
  } else if (key == "problem.mu_s") {
    c.saddle_params.mu_s = to_double(key, val);
  } else if (key == "problem.base_curvature") {
    c.saddle_params.base_curvature = to_double(key, val);
  } else if (key == "problem.noise_a") {
    c.saddle_params.noise_a = to_double(key, val);
  } else if (key == "problem.scale_b") {
    c.saddle_params.scale_b = to_double(key, val);
  } else if (key == "problem.scale_c") {
    c.saddle_params.scale_c = to_double(key, val);
  } else if (key == "topology.m") {
    c.m = static_cast<int>(to_long(key, val));
  } else if (key == "topology.p_c") {
    c.p_c = to_double(key, val);
  } else if (key == "topology.seed") {
    c.topology_seed = static_cast<std::uint64_t>(to_long(key, val));
  } else if (key == "topology.dump") {
    c.topology_dump = val;
  } else if (key == "hp.nu") {
    c.hp.nu = to_double(key, val);
  } else if (key == "hp.eta") {
    c.hp.eta = to_double(key, val);
  } else if (key == "hp.alpha") {
    c.hp.alpha = to_double(key, val);
  } else if (key == "hp.tau") {
    c.hp.tau = to_double(key, val);
  } else if (key == "hp.beta") {
    c.hp.beta = to_double(key, val);
  } else if (key == "hp.q") {
    c.hp.q = static_cast<int>(to_long(key, val));
  } else if (key == "hp.T") {
    c.hp.T = to_long(key, val);
    raw.has_T = true;
  } else if (key == "batch") {
    c.batch = static_cast<int>(to_long(key, val));
  } else if (key == "adaptive.c_gamma") {
    c.adaptive.c_gamma = to_double(key, val);
  } else if (key == "adaptive.c_epsilon") {
    c.adaptive.c_epsilon = to_double(key, val);
  } else if (key == "adaptive.sigma2") {
    c.adaptive.sigma2 = to_double(key, val);
  } else if (key == "adaptive.epsilon") {
    c.adaptive.epsilon = to_double(key, val);
  } else if (key == "run.seed") {
    c.run_seed = static_cast<std::uint64_t>(to_long(key, val));
  } else if (key == "run.stride") {
    c.record_stride = static_cast<int>(to_long(key, val));
  } else if (key == "run.out") {
    c.out_path = val;
  } else if (key == "init.kind") {
    if (val == "zero")
      c.init = InitKind::Zero;
    else if (val == "gaussian")
      c.init = InitKind::Gaussian;
    else
      throw ConfigError("config: unknown init.kind '" + val + "'");
  } else if (key == "init.scale") {
    c.init_scale = to_double(key, val);
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  RawConfig raw;
  // hp.q = 0 means "derive ceil(sqrt(n)) at run time"
  raw.cfg.hp.q = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(line_no) +
                        " is not key=value");
    apply(raw, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  if (!raw.has_T) throw ConfigError("config: missing required key 'hp.T'");
  if (raw.cfg.hp.T < 0) throw ConfigError("config: hp.T must be >= 0");
  if (raw.cfg.m < 1) throw ConfigError("config: topology.m must be >= 1");
  return raw.cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  return parse_config(in);
}

namespace {

std::unique_ptr<Problem> build_problem(const ExperimentConfig& cfg) {
  switch (cfg.problem) {
    case ProblemKind::SyntheticSaddle:
      return build_synthetic_saddle(cfg.m, cfg.saddle_n, cfg.saddle_dim_x,
                                    cfg.saddle_dim_y, cfg.data_seed,
                                    cfg.saddle_params);
    case ProblemKind::Regression:
    case ProblemKind::Auc: {
      Dataset ds = cfg.data_path.empty()
                       ? generate_synthetic_classification(
                             cfg.synthetic_samples, cfg.synthetic_features,
                             cfg.data_seed)
                       : load_libsvm(cfg.data_path);
      if (cfg.problem == ProblemKind::Regression)
        return build_robust_regression(ds, cfg.m, cfg.lambda1, cfg.lambda2,
                                       cfg.alpha_reg, cfg.data_seed);
      return build_auc_maximization(ds, cfg.m, cfg.data_seed);
    }
  }
  throw ConfigError("config: unreachable problem kind");
}

Vec initial_vector(const BoxSet& box, InitKind kind, double scale,
                   std::mt19937_64& rng) {
  Vec v = Vec::Zero(box.dim());
  if (kind == InitKind::Gaussian) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int k = 0; k < v.size(); ++k) v(k) = scale * gauss(rng);
  }
  return box.clip(v);
}

void write_trace(const std::string& path,
                 const std::vector<IterationRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("run_experiment: cannot write " + path);
  out.precision(17);
  out << "iter,ifo_calls,comm_rounds,loss,metric_paper,metric_stationarity,"
         "consensus_x,consensus_y,saddle_err,grad_norm2,batch_size\n";
  for (const auto& r : records) {
    out << r.iter << ',' << r.ifo_calls << ',' << r.comm_rounds << ','
        << r.loss << ',' << r.metric.metric_paper << ','
        << r.metric.metric_stationarity << ',' << r.metric.consensus_x << ','
        << r.metric.consensus_y << ',' << r.metric.saddle_err << ','
        << r.metric.grad_norm2 << ',' << r.batch_size << '\n';
  }
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  auto problem = build_problem(cfg);

  if (cfg.hp.q <= 0)
    cfg.hp.q = static_cast<int>(
        std::ceil(std::sqrt(static_cast<double>(problem->local_samples()))));
  if (cfg.batch <= 0) cfg.batch = cfg.hp.q;

  const auto topo = generate_erdos_renyi(cfg.m, cfg.p_c, cfg.topology_seed);
  if (!cfg.topology_dump.empty()) {
    std::ofstream out(cfg.topology_dump);
    if (!out)
      throw std::runtime_error("run_experiment: cannot write " + cfg.topology_dump);
    write_edge_list(topo, out);
  }
  const auto cm = laplacian_consensus_matrix(topo);

  RunOptions opts;
  opts.seed = cfg.run_seed;
  opts.record_stride = cfg.record_stride;
  std::mt19937_64 init_rng(splitmix64(cfg.run_seed ^ 0x1d2c3b4a59687786ULL));
  opts.x0 = initial_vector(problem->x_box(), cfg.init, cfg.init_scale, init_rng);
  opts.y0 = initial_vector(problem->y_box(), cfg.init, cfg.init_scale, init_rng);

  try {
    RunResult result;
    switch (cfg.algo) {
      case AlgorithmKind::Precision:
        result = run_precision(*problem, cm.entries, cfg.hp,
                               EstimatorMode::Precision, nullptr, opts);
        break;
      case AlgorithmKind::PrecisionPlus:
        result = run_precision(*problem, cm.entries, cfg.hp,
                               EstimatorMode::PrecisionPlus, &cfg.adaptive, opts);
        break;
      case AlgorithmKind::ProxDsgda:
        result = run_prox_dsgda(*problem, cm.entries, cfg.hp.nu, cfg.hp.eta,
                                cfg.batch, cfg.hp.T, opts);
        break;
      case AlgorithmKind::ProxGtSgda:
        result = run_prox_gt_sgda(*problem, cm.entries, cfg.hp, cfg.batch, opts);
        break;
    }
    write_trace(cfg.out_path, result.records);
    return 0;
  } catch (const DivergenceError& e) {
    std::cerr << "run_experiment: " << e.what() << '\n';
    write_trace(cfg.out_path, {});
    return 2;
  }
}

}  // namespace decmm
