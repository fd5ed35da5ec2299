#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>

#include "bvm/design.hpp"
#include "bvm/distances.hpp"
#include "bvm/gaussian.hpp"

namespace bvm {

/// F ~ N(0, tau^2 Sigma_Phi), equivalently theta ~ N(0, tau^2 (Phi^T Phi)^{-1}).
/// tau = +infinity is the flat prior.
struct IsotropicGaussianPrior {
  double tau = 1.0;
};

/// Independent theta_j ~ N(0, variances_j).
struct CoordinateGaussianPrior {
  Eigen::VectorXd variances;
};

/// Prior with a Lebesgue density w on theta, known through log w.
struct SmoothDensityPrior {
  std::string description;
  std::function<double(const Eigen::VectorXd&)> log_density;
};

using PriorSpec = std::variant<IsotropicGaussianPrior, CoordinateGaussianPrior, SmoothDensityPrior>;

/// Parameters of the named smooth densities. Only the fields a density uses
/// are read.
struct SmoothPriorParams {
  double tau = 1.0;         ///< gaussian-iso: theta ~ N(0, tau^2 I)
  Eigen::VectorXd variances;  ///< gaussian-diag
  double half_width = 10.0;   ///< uniform-box on [-h, h]^k
  double dof = 3.0;           ///< product-student-t
  double scale = 1.0;         ///< product-student-t
};

/// Named densities: gaussian-iso, gaussian-diag, uniform-box,
/// product-student-t, flat.
SmoothDensityPrior make_smooth_prior(const std::string& name, const SmoothPriorParams& params);

/// Throws when a prior is unusable in dimension k.
void validate_prior(const PriorSpec& prior, Eigen::Index k);

/// N(c theta_Y, sigma^2 c (Phi^T Phi)^{-1}) with c = tau^2 / (sigma^2 + tau^2).
GaussianDist conjugate_posterior(const Design& design, double tau, double sigma,
                                 const Eigen::VectorXd& y);
/// Same, from a precomputed theta_Y.
GaussianDist conjugate_posterior_from_estimate(const Design& design, double tau, double sigma,
                                               const Eigen::VectorXd& theta_hat);

/// tau^2 / (sigma^2 + tau^2), computed as 1 / (1 + (sigma / tau)^2).
double shrinkage_factor(double tau, double sigma);

/// Coordinatewise N(v_j / (s^2 + v_j) Y_j, s^2 v_j / (s^2 + v_j)) with s = sigma_n.
GaussianDist coordinate_posterior(const Eigen::VectorXd& variances, double sigma_n,
                                  const Eigen::VectorXd& theta_hat);
/// Design form: requires a diagonal Gram matrix; coordinate j sees noise
/// variance sigma^2 / G_jj.
GaussianDist coordinate_posterior(const Design& design, const Eigen::VectorXd& variances,
                                  double sigma, const Eigen::VectorXd& y);

struct PosteriorSample {
  Eigen::MatrixXd draws;         ///< k x n_draws
  Eigen::VectorXd log_weights;   ///< log of the self-normalized weights
  GaussianDist proposal;
  double ess = 0.0;
  bool degenerate = false;  ///< ess < 0.01 n_draws

  Eigen::Index size() const { return draws.cols(); }
  Eigen::VectorXd weights() const { return log_weights.array().exp(); }
  Eigen::VectorXd weighted_mean() const;
};

/// Importance sample of the posterior under a smooth prior. Proposal is
/// N(theta_Y, sigma^2 (Phi^T Phi)^{-1}), the posterior under a flat prior, so
/// the weight of a draw is the prior density there. Draw i uses the stream
/// derive_seed(seed, {i}).
PosteriorSample smooth_posterior_sample(const Design& design, const SmoothDensityPrior& prior,
                                        double sigma, const Eigen::VectorXd& y,
                                        std::size_t n_draws, std::uint64_t seed);

/// E_Q[(1 - p/q)_+] for the sampled posterior p against the target Q, with a
/// bootstrap standard error (200 resamples by default).
TVResult posterior_tv_to_target(const PosteriorSample& sample, const GaussianDist& target,
                                std::size_t bootstrap_resamples = 200, std::uint64_t seed = 0);

struct InvarianceReport {
  double max_mean_difference = 0.0;
  double max_cov_difference = 0.0;
  double max_weight_difference = 0.0;
  bool identical = true;
};

struct InvarianceOptions {
  double tolerance = 1e-10;
  std::size_t n_draws = 256;  ///< smooth priors
  std::uint64_t seed = 0;
};

/// Compares the posterior given y with the posterior given y + a for a
/// translation a orthogonal to the regressor span.
InvarianceReport check_translation_invariance(const Design& design, const PriorSpec& prior,
                                              double sigma, const Eigen::VectorXd& y,
                                              const Eigen::VectorXd& a,
                                              const InvarianceOptions& options = {});

struct IsotropicPriorConditions {
  double sigma_over_tau;      ///< sigma / tau
  double f0_ratio;            ///< ||F_0|| sigma / tau^2
  double dimension_ratio;     ///< k sigma^4 / tau^4
};
IsotropicPriorConditions check_isotropic_prior_conditions(double sigma, double tau, double f0_norm, Eigen::Index k);

struct SmoothPriorConditions {
  double log_ratio_spread = 0.0;       ///< max - min of log w over the probes
  double max_log_ratio_from_center = 0.0;  ///< max |log w(theta0 + h) - log w(theta0)|
  double max_probe_norm = 0.0;         ///< largest ||h|| probed
  double ellipsoid_radius = 0.0;       ///< sup ||h|| over the ellipsoid
  bool condition1_finite = true;
  double dimension_ratio = 0.0;        ///< k ln k / M
  double determinant_ratio = 0.0;      ///< max(0, ln(sqrt det G / (sigma^k w(theta0)))) / M
};

/// Probes log w on the ellipsoid (theta - theta0)^T G (theta - theta0) <= sigma^2 M
/// with n_probe points uniform in the ellipsoid.
SmoothPriorConditions check_smooth_prior_conditions(const Design& design, const SmoothDensityPrior& prior,
                                         const Eigen::VectorXd& theta0, double sigma, double M,
                                         std::size_t n_probe = 4096, std::uint64_t seed = 0);

}  // namespace bvm
