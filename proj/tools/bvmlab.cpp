// bvmlab: run experiments, print condition diagnostics, summarize results.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bvm/config.hpp"
#include "bvm/errors.hpp"
#include "bvm/experiments.hpp"
#include "bvm/results_io.hpp"

namespace {

std::string summary_path(const std::string& results_path) { return results_path + ".summary.csv"; }

void apply_overrides(bvm::ExperimentConfig& config, const std::optional<std::uint64_t>& seed,
                     const std::optional<long>& replicates, const std::string& output) {
  if (seed) config.seed = *seed;
  if (replicates) config.replicates = *replicates;
  if (!output.empty()) config.output = output;
  bvm::validate_config(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sieve-prior posterior simulation laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string results_path;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::optional<long> replicates;
  int jobs = 1;
  std::size_t probes = 4096;

  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--seed", seed, "Override the base seed");
  run->add_option("--replicates", replicates, "Override the number of replicates");
  run->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--output", output, "Results file (default: config 'output')");

  auto* check = app.add_subcommand("check-conditions", "Print per-n condition diagnostics");
  check->add_option("config", config_path, "Experiment config (JSON)")->required();
  check->add_option("--seed", seed, "Override the base seed");
  check->add_option("--probes", probes, "Ellipsoid probe points");
  check->add_option("--output", output, "Write the table here instead of stdout");

  auto* summarize = app.add_subcommand("summarize", "Recompute per-n summaries from a results file");
  summarize->add_option("results", results_path, "Results file written by 'run'")->required();
  summarize->add_option("--output", output, "Summary file (default: <results>.summary.csv)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      bvm::ExperimentConfig config = bvm::load_config(config_path);
      apply_overrides(config, seed, replicates, output);
      if (config.output.empty()) throw bvm::ConfigError("no output path (use --output)");
      const bvm::ExperimentResult result = bvm::run_experiment(config, {jobs});
      bvm::write_results(result, config.output);
      const bvm::SummaryTable summary = bvm::summarize(result);
      bvm::write_summary(summary, summary_path(config.output));
      std::cout << bvm::summary_to_csv(summary);
    } else if (check->parsed()) {
      bvm::ExperimentConfig config = bvm::load_config(config_path);
      apply_overrides(config, seed, std::nullopt, "");
      const bvm::SummaryTable table = bvm::check_conditions(config, probes);
      if (output.empty()) {
        std::cout << bvm::summary_to_csv(table);
      } else {
        bvm::write_summary(table, output);
      }
    } else if (summarize->parsed()) {
      const bvm::ExperimentResult result = bvm::read_results(results_path);
      const bvm::SummaryTable summary = bvm::summarize(result);
      bvm::write_summary(summary, output.empty() ? summary_path(results_path) : output);
      std::cout << bvm::summary_to_csv(summary);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "bvmlab: %s\n", e.what());
    return 1;
  }
  return 0;
}
