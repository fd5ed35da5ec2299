#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>

#include "bvm/law1d.hpp"
#include "bvm/rng.hpp"

namespace bvm {

enum class TVMethod { exact_shift, exact_scale, exact_shift_scale, truncation, monte_carlo };

std::string_view to_string(TVMethod method);

struct TVResult {
  double value = 0.0;
  TVMethod method = TVMethod::exact_shift;
  std::optional<double> se;     ///< Monte Carlo standard error
  std::optional<double> bound;  ///< closed-form upper bound, when one applies
  double ess = 0.0;             ///< effective sample size (Monte Carlo only)
  bool reliable = true;
};

/// ||N(0, I) - N(z, I)||_TV = P(|U| <= ||z|| / 2). bound = ||z|| / sqrt(2 pi).
TVResult tv_gaussian_shift(const Eigen::VectorXd& z);
TVResult tv_gaussian_shift_norm(double z_norm);

/// ||N(0, I_k) - N(0, c I_k)||_TV. The densities cross on the sphere
/// ||x||^2 = t with t = k c ln(1/c) / (1 - c), giving
/// F_k(t / c) - F_k(t) for c < 1; c > 1 is reduced to 1/c.
TVResult tv_gaussian_scale(Eigen::Index k, double c);

/// ||N(0, I_k) - N(z, c I_k)||_TV in closed form. The densities cross on a
/// sphere centred at z / (1 - c), so both masses are noncentral chi-square
/// probabilities.
TVResult tv_gaussian_shift_scale(Eigen::Index k, double c, double z_norm);

/// Mass of N(mu, I_k) outside the ball of squared radius M around the origin,
/// with noncentrality = ||mu||^2. This is the TV between a law and its
/// restriction to the ball. For a centred law with M > 4k the tail bound
/// 2 exp(-(sqrt M - 2 sqrt k)^2 / 8) is attached.
TVResult tv_truncation(Eigen::Index k, double M, double noncentrality);

/// 2 exp(-(sqrt M - 2 sqrt k)^2 / 8)
double truncation_tail_bound(Eigen::Index k, double M);

struct TailCheck {
  double exact;
  double bound;
};
/// Exact P(sqrt U > sqrt k + sqrt(2x)) for U ~ chi2_k, with the bound e^{-x}.
TailCheck cirelson_tail(Eigen::Index k, double x);

/// sup over intervals I of |P(I) - Q(I)|, i.e. sup D - inf D with D = F_P - F_Q
/// (D vanishes at +-infinity, so both extremes include 0).
double interval_sup_distance(const Law1D& p, const Law1D& q, std::size_t grid_points = 512);

/// Root mean square of interval_sup_distance between bootstrap resamples of
/// the sample and the sample itself: the size of the statistic expected from
/// sampling noise alone.
double interval_sup_bootstrap_scale(const WeightedSampleLaw& sample, std::size_t resamples,
                                    std::uint64_t seed);

using LogDensity = std::function<double(const Eigen::VectorXd&)>;
using Sampler = std::function<Eigen::VectorXd(CounterRng&)>;

struct MonteCarloOptions {
  std::size_t n_draws = 20000;
  std::uint64_t seed = 0;
  /// log_p known only up to an additive constant; triggers self-normalization
  /// and a bootstrap standard error.
  bool self_normalize = false;
  std::size_t bootstrap_resamples = 200;
};

/// Estimates E_Q[(1 - p/q)_+] from draws of Q. Draw i uses its own stream
/// derive_seed(seed, {i}).
TVResult tv_monte_carlo(const LogDensity& log_p, const LogDensity& log_q, const Sampler& sample_q,
                        const MonteCarloOptions& options);

/// The estimator on precomputed log ratios log p(x_i) - log q(x_i), x_i ~ Q.
TVResult tv_from_log_ratios(const Eigen::VectorXd& log_ratios, bool self_normalize,
                            std::size_t bootstrap_resamples, std::uint64_t seed);

}  // namespace bvm
