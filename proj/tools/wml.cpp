#include <iostream>

#include "CLI11.hpp"
#include "wml/cli.hpp"
#include "wml/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"wml: weighted mean-value experiments on polynomial exponential sums"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::string> out_dir;
  auto* run = app.add_subcommand("run", "Run an experiment from a config file (.cfg or a JSON summary)");
  run->add_option("config", config_path, "Experiment config")->required();
  run->add_option("--seed", seed, "Override params.seed");
  run->add_option("--threads", threads, "Worker threads");
  run->add_option("--out", out_dir, "Output directory");

  auto* oracle = app.add_subcommand("oracle", "Reference computations");
  oracle->require_subcommand(1);
  std::string sequence_path;
  auto* disc = oracle->add_subcommand("discrepancy", "Exact and brute-force discrepancy of a sequence file");
  disc->add_option("file", sequence_path, "One value in [0,1) per line")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  wml::RunResult result;
  if (*run) {
    try {
      wml::RunOptions opt;
      opt.seed = seed;
      opt.threads = threads;
      if (out_dir) opt.out_dir = *out_dir;
      result = wml::run_experiment(wml::ExperimentConfig::load(config_path), opt);
    } catch (const wml::Error& e) {
      result.exit_code = 1;
      result.error = e.what();
    }
    if (result.exit_code != 1) {
      for (const auto& f : result.files) std::cout << f.string() << "\n";
      std::cout << "status: " << result.summary.value("status", "") << "\n";
    }
  } else {
    result = wml::run_discrepancy_oracle(sequence_path);
    if (result.exit_code != 1) std::cout << result.summary.dump(2) << "\n";
  }
  if (result.exit_code == 1) std::cerr << "error: " << result.error << "\n";
  return result.exit_code;
}
