#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "decmm/algorithms.hpp"
#include "decmm/problems.hpp"
#include "decmm/topology.hpp"

namespace decmm {

enum class AlgorithmKind { Precision, PrecisionPlus, ProxDsgda, ProxGtSgda };
enum class ProblemKind { Regression, Auc, SyntheticSaddle };
enum class InitKind { Zero, Gaussian };

// Flat key=value experiment description; see README for the schema.
struct ExperimentConfig {
  ProblemKind problem = ProblemKind::SyntheticSaddle;
  AlgorithmKind algo = AlgorithmKind::Precision;

  // data source (regression / auc)
  std::string data_path;            // LIBSVM file; empty => synthetic
  int synthetic_samples = 2000;
  int synthetic_features = 10;
  std::uint64_t data_seed = 7;

  // problem constants
  std::optional<double> lambda1;    // default 1/n^2
  double lambda2 = 1e-3;
  double alpha_reg = 10.0;
  int saddle_n = 200;
  int saddle_dim_x = 10;
  int saddle_dim_y = 5;
  SyntheticSaddleParams saddle_params;

  // topology
  int m = 5;
  double p_c = 0.6;
  std::uint64_t topology_seed = 1;
  std::string topology_dump;        // optional edge-list output path

  HyperParams hp;                   // hp.q <= 0 => ceil(sqrt(n))
  int batch = 0;                    // baselines; 0 => q
  AdaptiveBatchConfig adaptive;

  std::uint64_t run_seed = 1;
  int record_stride = 0;            // 0 = auto
  std::string out_path = "trace.csv";
  InitKind init = InitKind::Gaussian;
  double init_scale = 1.0;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses "key=value" lines ('#' comments allowed). Unknown or malformed
// keys raise ConfigError naming the key.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(std::istream& in);

// Builds the problem and topology, runs the selected algorithm and writes
// the CSV trace. Returns 0 on success, 2 on divergence.
int run_experiment(const ExperimentConfig& cfg);

}  // namespace decmm
