#include "bvm/bayes.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "bvm/errors.hpp"

namespace bvm {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("noise sd must be positive");
}
}  // namespace

SmoothDensityPrior make_smooth_prior(const std::string& name, const SmoothPriorParams& params) {
  SmoothDensityPrior prior;
  prior.description = name;
  if (name == "flat") {
    prior.log_density = [](const Eigen::VectorXd&) { return 0.0; };
  } else if (name == "gaussian-iso") {
    const double tau = params.tau;
    if (!(tau > 0.0)) throw InputError("gaussian-iso needs tau > 0");
    prior.log_density = [tau](const Eigen::VectorXd& t) {
      const auto k = static_cast<double>(t.size());
      return -0.5 * (t.squaredNorm() / (tau * tau) + k * (kLogTwoPi + 2.0 * std::log(tau)));
    };
  } else if (name == "gaussian-diag") {
    const Eigen::VectorXd v = params.variances;
    if (v.size() == 0 || !(v.array() > 0.0).all()) {
      throw InputError("gaussian-diag needs positive variances");
    }
    prior.log_density = [v](const Eigen::VectorXd& t) {
      if (t.size() != v.size()) throw InvalidDimension("gaussian-diag dimension mismatch");
      return -0.5 * ((t.array().square() / v.array()).sum() + v.array().log().sum() +
                     static_cast<double>(t.size()) * kLogTwoPi);
    };
  } else if (name == "uniform-box") {
    const double h = params.half_width;
    if (!(h > 0.0)) throw InputError("uniform-box needs a positive half width");
    prior.log_density = [h](const Eigen::VectorXd& t) {
      if (t.cwiseAbs().maxCoeff() > h) return -kInf;
      return -static_cast<double>(t.size()) * std::log(2.0 * h);
    };
  } else if (name == "product-student-t") {
    const double nu = params.dof;
    const double s = params.scale;
    if (!(nu > 0.0) || !(s > 0.0)) throw InputError("product-student-t needs dof > 0, scale > 0");
    const double log_norm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                            0.5 * std::log(nu * std::numbers::pi) - std::log(s);
    prior.log_density = [nu, s, log_norm](const Eigen::VectorXd& t) {
      double sum = 0.0;
      for (Eigen::Index j = 0; j < t.size(); ++j) {
        const double u = t[j] / s;
        sum += log_norm - 0.5 * (nu + 1.0) * std::log1p(u * u / nu);
      }
      return sum;
    };
  } else {
    throw UnsupportedError("unknown smooth prior '" + name + "'");
  }
  return prior;
}

void validate_prior(const PriorSpec& prior, Eigen::Index k) {
  if (const auto* iso = std::get_if<IsotropicGaussianPrior>(&prior)) {
    if (!(iso->tau > 0.0)) throw InputError("prior scale tau must be > 0");
  } else if (const auto* coord = std::get_if<CoordinateGaussianPrior>(&prior)) {
    if (coord->variances.size() != k) throw InvalidDimension("prior variances do not match k");
    if (!(coord->variances.array() > 0.0).all()) throw InputError("prior variances must be > 0");
  } else {
    const auto& smooth = std::get<SmoothDensityPrior>(prior);
    if (!smooth.log_density) throw InputError("smooth prior has no density");
    if (!std::isfinite(smooth.log_density(Eigen::VectorXd::Zero(k)))) {
      throw InputError("smooth prior log density is not finite at 0");
    }
  }
}

double shrinkage_factor(double tau, double sigma) {
  if (std::isinf(tau)) return 1.0;
  const double r = sigma / tau;
  return 1.0 / (1.0 + r * r);
}

GaussianDist conjugate_posterior_from_estimate(const Design& design, double tau, double sigma,
                                               const Eigen::VectorXd& theta_hat) {
  check_sigma(sigma);
  if (!(tau > 0.0)) throw InputError("prior scale tau must be > 0");
  if (theta_hat.size() != design.k()) throw InvalidDimension("estimate does not match k");
  const double c = shrinkage_factor(tau, sigma);
  return GaussianDist(c * theta_hat, ScaledGramInverse{sigma * sigma * c, design});
}

GaussianDist conjugate_posterior(const Design& design, double tau, double sigma,
                                 const Eigen::VectorXd& y) {
  return conjugate_posterior_from_estimate(design, tau, sigma, project(design, y).theta_hat);
}

GaussianDist coordinate_posterior(const Eigen::VectorXd& variances, double sigma_n,
                                  const Eigen::VectorXd& theta_hat) {
  check_sigma(sigma_n);
  if (variances.size() != theta_hat.size()) throw InvalidDimension("variances do not match k");
  if (!(variances.array() > 0.0).all()) throw InputError("prior variances must be > 0");
  const double s2 = sigma_n * sigma_n;
  Eigen::VectorXd mean(variances.size());
  Eigen::VectorXd var(variances.size());
  for (Eigen::Index j = 0; j < variances.size(); ++j) {
    const double v = variances[j];
    // v / (s2 + v), written to stay exact as v -> infinity.
    const double shrink = std::isinf(v) ? 1.0 : 1.0 / (1.0 + s2 / v);
    mean[j] = shrink * theta_hat[j];
    var[j] = s2 * shrink;
  }
  return GaussianDist(std::move(mean), DiagonalCov{std::move(var)});
}

GaussianDist coordinate_posterior(const Design& design, const Eigen::VectorXd& variances,
                                  double sigma, const Eigen::VectorXd& y) {
  check_sigma(sigma);
  const Eigen::MatrixXd& g = design.gram();
  const Eigen::VectorXd diag = g.diagonal();
  const double off = (g - Eigen::MatrixXd(diag.asDiagonal())).cwiseAbs().maxCoeff();
  if (off > 1e-9 * diag.maxCoeff()) {
    throw UnsupportedError("coordinate posterior needs a diagonal Gram matrix");
  }
  const Eigen::VectorXd theta_hat = project(design, y).theta_hat;
  if (variances.size() != theta_hat.size()) throw InvalidDimension("variances do not match k");
  Eigen::VectorXd mean(theta_hat.size());
  Eigen::VectorXd var(theta_hat.size());
  for (Eigen::Index j = 0; j < theta_hat.size(); ++j) {
    const double noise_sd = sigma / std::sqrt(diag[j]);
    const GaussianDist one = coordinate_posterior(variances.segment(j, 1), noise_sd,
                                                  theta_hat.segment(j, 1));
    mean[j] = one.mean()[0];
    var[j] = std::get<DiagonalCov>(one.cov()).variances[0];
  }
  return GaussianDist(std::move(mean), DiagonalCov{std::move(var)});
}

Eigen::VectorXd PosteriorSample::weighted_mean() const { return draws * weights(); }

PosteriorSample smooth_posterior_sample(const Design& design, const SmoothDensityPrior& prior,
                                        double sigma, const Eigen::VectorXd& y,
                                        std::size_t n_draws, std::uint64_t seed) {
  check_sigma(sigma);
  if (n_draws == 0) throw InputError("posterior sample needs at least one draw");
  const Eigen::VectorXd theta_hat = project(design, y).theta_hat;
  GaussianDist proposal(theta_hat, ScaledGramInverse{sigma * sigma, design});
  const auto m = static_cast<Eigen::Index>(n_draws);
  Eigen::MatrixXd draws(design.k(), m);
  Eigen::VectorXd log_w(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    CounterRng rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    draws.col(i) = proposal.sample(rng);
    const double lw = prior.log_density(draws.col(i));
    log_w[i] = std::isnan(lw) ? -kInf : lw;
  }
  const double max_log = log_w.maxCoeff();
  if (!std::isfinite(max_log)) throw InputError("prior density vanishes on every draw");
  const double log_total = max_log + std::log((log_w.array() - max_log).exp().sum());
  log_w.array() -= log_total;
  const double ess = 1.0 / (2.0 * log_w.array()).exp().sum();
  PosteriorSample sample{std::move(draws), std::move(log_w), std::move(proposal), ess, false};
  sample.degenerate = ess < 0.01 * static_cast<double>(n_draws);
  return sample;
}

TVResult posterior_tv_to_target(const PosteriorSample& sample, const GaussianDist& target,
                                std::size_t bootstrap_resamples, std::uint64_t seed) {
  const Eigen::Index m = sample.size();
  if (m == 0) throw InputError("posterior sample is empty");
  if (target.dim() != sample.draws.rows()) throw InvalidDimension("target dimension mismatch");
  const auto nd = static_cast<double>(m);
  // With draws x_i from the proposal r, ||P - T|| = E_r[(t/r - p/r)_+], and
  // p/r at x_i is estimated by m times the normalized weight.
  Eigen::VectorXd target_ratio(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::VectorXd x = sample.draws.col(i);
    target_ratio[i] = std::exp(target.log_density(x) - sample.proposal.log_density(x));
  }
  const Eigen::VectorXd w = sample.weights();
  auto estimate = [&](const std::vector<Eigen::Index>* idx) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) total += w[idx ? (*idx)[i] : i];
    double sum = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index j = idx ? (*idx)[i] : i;
      sum += std::max(0.0, target_ratio[j] - nd * w[j] / total);
    }
    return sum / nd;
  };

  TVResult r;
  r.method = TVMethod::monte_carlo;
  r.value = std::clamp(estimate(nullptr), 0.0, 1.0);
  r.ess = sample.ess;
  r.reliable = !sample.degenerate;
  if (bootstrap_resamples > 0) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(m));
    double mean = 0.0;
    double mean_sq = 0.0;
    for (std::size_t b = 0; b < bootstrap_resamples; ++b) {
      CounterRng rng(derive_seed(seed, {0xb007ULL, b}));
      std::uniform_int_distribution<Eigen::Index> pick(0, m - 1);
      for (auto& i : idx) i = pick(rng);
      const double v = estimate(&idx);
      mean += v;
      mean_sq += v * v;
    }
    const auto bd = static_cast<double>(bootstrap_resamples);
    mean /= bd;
    r.se = std::sqrt(std::max(0.0, mean_sq / bd - mean * mean) * bd / std::max(1.0, bd - 1.0));
  } else {
    r.se = 0.0;
  }
  return r;
}

namespace {

struct PosteriorParams {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

PosteriorParams gaussian_params(const Design& design, const PriorSpec& prior, double sigma,
                                const Eigen::VectorXd& y) {
  if (const auto* iso = std::get_if<IsotropicGaussianPrior>(&prior)) {
    const GaussianDist d = conjugate_posterior(design, iso->tau, sigma, y);
    return {d.mean(), d.covariance_matrix()};
  }
  const auto& coord = std::get<CoordinateGaussianPrior>(prior);
  const GaussianDist d = coordinate_posterior(design, coord.variances, sigma, y);
  return {d.mean(), d.covariance_matrix()};
}

}  // namespace

InvarianceReport check_translation_invariance(const Design& design, const PriorSpec& prior,
                                              double sigma, const Eigen::VectorXd& y,
                                              const Eigen::VectorXd& a,
                                              const InvarianceOptions& options) {
  if (y.size() != design.n() || a.size() != design.n()) {
    throw InvalidDimension("observation and translation must have length n");
  }
  const double phi_norm = std::sqrt(design.gram().selfadjointView<Eigen::Lower>()
                                        .eigenvalues()
                                        .maxCoeff());
  const double leak = (design.columns().transpose() * a).norm();
  if (leak > 1e-8 * a.norm() * phi_norm) {
    throw PreconditionViolation("translation is not orthogonal to the regressor span");
  }
  validate_prior(prior, design.k());
  const Eigen::VectorXd shifted = y + a;
  InvarianceReport report;
  if (const auto* smooth = std::get_if<SmoothDensityPrior>(&prior)) {
    const PosteriorSample s1 =
        smooth_posterior_sample(design, *smooth, sigma, y, options.n_draws, options.seed);
    const PosteriorSample s2 =
        smooth_posterior_sample(design, *smooth, sigma, shifted, options.n_draws, options.seed);
    report.max_mean_difference = (s1.draws - s2.draws).cwiseAbs().maxCoeff();
    report.max_weight_difference = (s1.weights() - s2.weights()).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, s1.draws.cwiseAbs().maxCoeff());
    report.identical = report.max_mean_difference <= options.tolerance * scale &&
                       report.max_weight_difference <= options.tolerance;
    return report;
  }
  const PosteriorParams p1 = gaussian_params(design, prior, sigma, y);
  const PosteriorParams p2 = gaussian_params(design, prior, sigma, shifted);
  report.max_mean_difference = (p1.mean - p2.mean).cwiseAbs().maxCoeff();
  report.max_cov_difference = (p1.cov - p2.cov).cwiseAbs().maxCoeff();
  const double mean_scale = std::max(1.0, p1.mean.cwiseAbs().maxCoeff());
  const double cov_scale = std::max(1.0, p1.cov.cwiseAbs().maxCoeff());
  report.identical = report.max_mean_difference <= options.tolerance * mean_scale &&
                     report.max_cov_difference <= options.tolerance * cov_scale;
  return report;
}

IsotropicPriorConditions check_isotropic_prior_conditions(double sigma, double tau, double f0_norm,
                                         Eigen::Index k) {
  if (!(sigma > 0.0) || !(tau > 0.0) || !(f0_norm >= 0.0) || k < 1) {
    throw InputError("condition check needs positive sigma, tau, k and ||F_0|| >= 0");
  }
  const double r = sigma / tau;
  return {r, f0_norm * sigma / (tau * tau), static_cast<double>(k) * r * r * r * r};
}

SmoothPriorConditions check_smooth_prior_conditions(const Design& design, const SmoothDensityPrior& prior,
                                         const Eigen::VectorXd& theta0, double sigma, double M,
                                         std::size_t n_probe, std::uint64_t seed) {
  check_sigma(sigma);
  if (!(M > 0.0)) throw InputError("ellipsoid radius M must be > 0");
  const Eigen::Index k = design.k();
  if (theta0.size() != k) throw InvalidDimension("theta0 does not match k");
  SmoothPriorConditions report;
  const auto kd = static_cast<double>(k);
  report.dimension_ratio = kd * std::log(kd) / M;

  const double center = prior.log_density(theta0);
  const double lambda_min =
      design.gram().selfadjointView<Eigen::Lower>().eigenvalues().minCoeff();
  report.ellipsoid_radius = sigma * std::sqrt(M / lambda_min);
  const double log_det_term = 0.5 * design.log_det_gram() - kd * std::log(sigma) - center;
  report.determinant_ratio = std::isfinite(center) ? std::max(0.0, log_det_term) / M : kInf;
  if (!std::isfinite(center)) {
    report.condition1_finite = false;
    report.log_ratio_spread = kInf;
    report.max_log_ratio_from_center = kInf;
    return report;
  }

  double lo = center;
  double hi = center;
  const double radius = sigma * std::sqrt(M);
  for (std::size_t i = 0; i < n_probe; ++i) {
    CounterRng rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    Eigen::VectorXd u = standard_normal_vector(rng, k);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double norm = u.norm();
    if (norm == 0.0) continue;
    u *= std::pow(unif(rng), 1.0 / kd) / norm;
    // h^T G h = sigma^2 M ||u||^2 <= sigma^2 M
    const Eigen::VectorXd h = radius * design.chol().matrixU().solve(u);
    report.max_probe_norm = std::max(report.max_probe_norm, h.norm());
    const double v = prior.log_density(theta0 + h);
    if (!std::isfinite(v)) {
      report.condition1_finite = false;
      report.log_ratio_spread = kInf;
      report.max_log_ratio_from_center = kInf;
      return report;
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    report.max_log_ratio_from_center = std::max(report.max_log_ratio_from_center,
                                                std::abs(v - center));
  }
  report.log_ratio_spread = hi - lo;
  return report;
}

}  // namespace bvm
