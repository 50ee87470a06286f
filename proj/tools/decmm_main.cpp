#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "decmm/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Decentralized constrained min-max optimization simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment from a config file");
  std::string config_path;
  run->add_option("--config", config_path, "Path to key=value config file")
      ->required();
  std::string out_override, algo_override;
  long seed_override = -1, T_override = -1;
  run->add_option("--seed", seed_override, "Override run.seed");
  run->add_option("--out", out_override, "Override run.out");
  run->add_option("--algo", algo_override,
                  "Override algo (precision|precision_plus|prox_dsgda|prox_gt_sgda)");
  run->add_option("--T", T_override, "Override hp.T");

  CLI11_PARSE(app, argc, argv);

  try {
    decmm::ExperimentConfig cfg = decmm::load_config(config_path);
    if (seed_override >= 0)
      cfg.run_seed = static_cast<std::uint64_t>(seed_override);
    if (!out_override.empty()) cfg.out_path = out_override;
    if (T_override >= 0) cfg.hp.T = T_override;
    if (!algo_override.empty()) {
      if (algo_override == "precision")
        cfg.algo = decmm::AlgorithmKind::Precision;
      else if (algo_override == "precision_plus")
        cfg.algo = decmm::AlgorithmKind::PrecisionPlus;
      else if (algo_override == "prox_dsgda")
        cfg.algo = decmm::AlgorithmKind::ProxDsgda;
      else if (algo_override == "prox_gt_sgda")
        cfg.algo = decmm::AlgorithmKind::ProxGtSgda;
      else
        throw decmm::ConfigError("unknown algo '" + algo_override + "'");
    }
    return decmm::run_experiment(cfg);
  } catch (const decmm::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
}
