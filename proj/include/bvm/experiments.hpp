#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "bvm/config.hpp"
#include "bvm/results_io.hpp"

namespace bvm {

/// Y = F_0 + sigma * standard normal noise, deterministic in the seed.
Eigen::VectorXd generate_data(const Eigen::VectorXd& f0, double sigma, std::uint64_t seed);

/// Stream key of replicate r at grid point i.
std::uint64_t replicate_seed(std::uint64_t base, std::size_t grid_index, long replicate);

struct RunOptions {
  int jobs = 1;
};

/// Metric columns produced for an experiment kind.
std::vector<std::string> metric_columns(const ExperimentConfig& config);

/// Posterior versus N(theta_Y, sigma^2 (Phi^T Phi)^{-1}) in total variation.
ExperimentResult run_bvm_experiment(const ExperimentConfig& config, const RunOptions& options = {});
/// Posterior mass outside balls of radius lambda * rate(n).
ExperimentResult run_contraction_experiment(const ExperimentConfig& config,
                                            const RunOptions& options = {});
/// Posterior and sampling laws of a standardized functional.
ExperimentResult run_functional_experiment(const ExperimentConfig& config,
                                           const RunOptions& options = {});
/// Dispatches on config.kind.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Per-n mean and standard error of every metric (non-finite values skipped).
/// Functional results also get the interval-sup distance between the
/// replicate distribution of freq_stat and N(0, 1).
SummaryTable summarize(const ExperimentResult& result);

/// Per-n condition diagnostics: condition ratios for the configured prior
/// and functional, design regularity constants and the projection bias.
SummaryTable check_conditions(const ExperimentConfig& config, std::size_t n_probe = 4096);

/// Column index of a metric; throws if absent.
std::size_t metric_index(const ExperimentResult& result, const std::string& name);
std::size_t column_index(const SummaryTable& table, const std::string& name);

/// Name of the outside-mass column for a given lambda.
std::string outside_column(double lambda);

}  // namespace bvm
