#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bvm/bayes.hpp"
#include "bvm/design.hpp"
#include "bvm/functionals.hpp"
#include "bvm/truths.hpp"

namespace bvm {

enum class ExperimentKind { bvm, contraction, functional };
enum class ModelKind { gaussian_sequence, fourier_regression, spline_regression };

struct KRule {
  enum class Kind { fixed, minimax, sqrt_n_over_ln_n, n_over_ln_n, power, custom };
  Kind kind = Kind::minimax;
  double value = 0.0;          ///< fixed k, minimax alpha, or power exponent
  std::vector<long> custom;    ///< one k per grid point
};

struct SigmaRule {
  bool inv_sqrt_n = true;
  double value = 1.0;  ///< constant sigma
};

/// tau_n = scale * n^exponent, or +infinity (flat).
struct TauRule {
  bool flat = false;
  double scale = 1.0;
  double exponent = 0.0;
};

struct PriorConfig {
  enum class Kind { isotropic_gaussian, coordinate_gaussian, smooth };
  Kind kind = Kind::isotropic_gaussian;
  TauRule tau;
  /// coordinate-gaussian: "split" (1/k for j <= k/2, 4^alpha sigma^2 above)
  /// or "constant".
  std::string variances_rule = "split";
  double variances_alpha = 1.0;
  double variance_value = 1.0;
  std::string density;  ///< smooth: density name
  SmoothPriorParams params;
};

struct TruthConfig {
  std::string truth_class = "sobolev";  ///< sobolev | holder
  double alpha = 1.0;
  double radius = 1.0;
  std::string rule = "power-decay";  ///< power-decay | explicit
  double exponent = 2.0;
  std::vector<double> coefficients;
  std::string name;         ///< holder catalogue name
  long prefix_length = 0;   ///< 0 = default
};

struct FunctionalConfig {
  std::string kind = "linear";  ///< linear | quadratic-norm | theta-quadratic
  std::optional<TruthConfig> g;  ///< linear: weight function, default g = 1
  std::vector<double> b;         ///< default (1, ..., 1)
  double level = 0.95;
  bool plug_in = false;          ///< standardize with Gamma at Y_Phi instead of F_Phi
  /// "integral" (closed-form integral when available) or "discrete" (G F_0).
  std::string true_value = "integral";
};

struct RateRule {
  std::string kind = "sqrt-k-over-n";  ///< sqrt-k-over-n | minimax | k-over-sqrt-n | constant
  double value = 1.0;                  ///< alpha for minimax, radius for constant
};

struct MRule {
  std::string kind = "k-ln2-n";  ///< k-ln2-n | constant | k-ln-k
  double value = 1.0;            ///< constant M, or multiplier
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::bvm;
  ModelKind model = ModelKind::gaussian_sequence;
  std::vector<long> n_grid;
  KRule k_rule;
  SigmaRule sigma_rule;
  PriorConfig prior;
  TruthConfig truth;
  std::optional<FunctionalConfig> functional;
  int spline_order = 4;
  std::string design_points = "uniform";
  long replicates = 200;
  std::uint64_t seed = 1;
  long mc_draws = 20000;
  bool mc_check = true;  ///< bvm: Monte Carlo cross-check of exact TVs
  std::vector<double> lambda_grid{1.0, 2.0, 3.0, 5.0, 8.0};
  RateRule rate;
  bool center_truth = false;
  MRule m_rule;
  std::string output;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Throws ConfigError on inconsistent settings.
void validate_config(const ExperimentConfig& config);

std::string to_string(ExperimentKind kind);
std::string to_string(ModelKind kind);

/// k for the i-th grid point: floor of the rule, at least 2, capped at n
/// (n - 1 for even-n Fourier designs).
Eigen::Index k_for(const ExperimentConfig& config, std::size_t grid_index);
double sigma_for(const ExperimentConfig& config, Eigen::Index n);
double tau_for(const ExperimentConfig& config, Eigen::Index n);
double M_for(const ExperimentConfig& config, Eigen::Index n, Eigen::Index k);
double rate_for(const ExperimentConfig& config, Eigen::Index n, Eigen::Index k);

Design build_design_for(const ExperimentConfig& config, Eigen::Index n, Eigen::Index k);
Truth build_truth(const TruthConfig& config, Eigen::Index prefix_length);
/// Truth with the default or configured prefix length for the whole grid.
Truth build_truth_for(const ExperimentConfig& config);
/// Split variances use the per-coordinate noise variance sigma^2 / G_jj.
PriorSpec build_prior(const ExperimentConfig& config, const Design& design);
FunctionalSpec build_functional(const ExperimentConfig& config, const Design& design);

}  // namespace bvm
