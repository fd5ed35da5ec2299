#include "bvm/distances.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "bvm/errors.hpp"
#include "bvm/special_functions.hpp"

namespace bvm {

std::string_view to_string(TVMethod method) {
  switch (method) {
    case TVMethod::exact_shift: return "exact-shift";
    case TVMethod::exact_scale: return "exact-scale";
    case TVMethod::exact_shift_scale: return "exact-shift-scale";
    case TVMethod::truncation: return "truncation";
    case TVMethod::monte_carlo: return "monte-carlo";
  }
  return "unknown";
}

namespace {
double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void check_dimension(Eigen::Index k) {
  if (k < 1) throw InvalidDimension("dimension must be >= 1");
}
}  // namespace

TVResult tv_gaussian_shift_norm(double z_norm) {
  if (!std::isfinite(z_norm) || z_norm < 0.0) throw InputError("shift norm must be finite");
  TVResult r;
  r.method = TVMethod::exact_shift;
  // P(|U| <= a) = erf(a / sqrt 2), here a = ||z|| / 2.
  r.value = clamp01(std::erf(z_norm / (2.0 * std::numbers::sqrt2)));
  r.bound = z_norm / std::sqrt(2.0 * std::numbers::pi);
  return r;
}

TVResult tv_gaussian_shift(const Eigen::VectorXd& z) {
  if (!z.allFinite()) throw InputError("shift vector must be finite");
  return tv_gaussian_shift_norm(z.norm());
}

TVResult tv_gaussian_scale(Eigen::Index k, double c) {
  check_dimension(k);
  if (!(c > 0.0) || !std::isfinite(c)) throw InputError("variance ratio must be positive");
  TVResult r;
  r.method = TVMethod::exact_scale;
  if (c == 1.0) return r;
  if (c > 1.0) c = 1.0 / c;
  const double kd = static_cast<double>(k);
  const double t = kd * c * -std::log(c) / (1.0 - c);
  r.value = clamp01(special::chi2_cdf(kd, t / c) - special::chi2_cdf(kd, t));
  return r;
}

TVResult tv_gaussian_shift_scale(Eigen::Index k, double c, double z_norm) {
  check_dimension(k);
  if (!(c > 0.0) || !std::isfinite(c)) throw InputError("variance ratio must be positive");
  if (!std::isfinite(z_norm) || z_norm < 0.0) throw InputError("shift norm must be finite");
  if (std::abs(1.0 - c) < 1e-9) {
    TVResult r = tv_gaussian_shift_norm(z_norm);
    r.bound.reset();
    r.method = TVMethod::exact_shift_scale;
    return r;
  }
  if (c > 1.0) {
    // Map x -> (x - z) / sqrt c: the pair becomes N(-z / sqrt c, I / c) and N(0, I).
    z_norm /= std::sqrt(c);
    c = 1.0 / c;
  }
  TVResult r;
  r.method = TVMethod::exact_shift_scale;
  if (z_norm == 0.0) {
    r.value = tv_gaussian_scale(k, c).value;
    return r;
  }
  const double kd = static_cast<double>(k);
  const double z2 = z_norm * z_norm;
  const double one_minus_c = 1.0 - c;
  // {x : q(x) > p(x)} = {||x - z / (1 - c)||^2 < R2}
  const double r2 = (kd * c * -std::log(c) + c * z2 / one_minus_c) / one_minus_c;
  const double lambda_p = z2 / (one_minus_c * one_minus_c);
  const double lambda_q = c * lambda_p;
  const double mass_q = special::noncentral_chi2_cdf(kd, lambda_q, r2 / c);
  const double mass_p = special::noncentral_chi2_cdf(kd, lambda_p, r2);
  r.value = clamp01(mass_q - mass_p);
  return r;
}

double truncation_tail_bound(Eigen::Index k, double M) {
  const double d = std::sqrt(M) - 2.0 * std::sqrt(static_cast<double>(k));
  return 2.0 * std::exp(-d * d / 8.0);
}

TVResult tv_truncation(Eigen::Index k, double M, double noncentrality) {
  check_dimension(k);
  if (!(M > 0.0)) throw InputError("truncation radius must be positive");
  if (!(noncentrality >= 0.0)) throw InputError("noncentrality must be >= 0");
  TVResult r;
  r.method = TVMethod::truncation;
  if (std::isinf(M)) return r;
  r.value = clamp01(special::noncentral_chi2_sf(static_cast<double>(k), noncentrality, M));
  // The bound needs sqrt M > 2 sqrt k; below that the exponent no longer controls the tail.
  if (noncentrality == 0.0 && M > 4.0 * static_cast<double>(k)) {
    r.bound = truncation_tail_bound(k, M);
  }
  return r;
}

TailCheck cirelson_tail(Eigen::Index k, double x) {
  check_dimension(k);
  if (!(x >= 0.0)) throw InputError("tail level must be >= 0");
  const double root = std::sqrt(static_cast<double>(k)) + std::sqrt(2.0 * x);
  return {special::chi2_sf(static_cast<double>(k), root * root), std::exp(-x)};
}

namespace {

struct Extremes {
  double sup = 0.0;
  double inf = 0.0;
  double arg_sup = 0.0;
  double arg_inf = 0.0;
};

double difference(const Law1D& p, const Law1D& q, double x) { return law_cdf(p, x) - law_cdf(q, x); }

// Golden-section search for an extremum of D on [a, b].
double golden_refine(const Law1D& p, const Law1D& q, double a, double b, bool maximize) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  const double sign = maximize ? 1.0 : -1.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = sign * difference(p, q, x1);
  double f2 = sign * difference(p, q, x2);
  for (int it = 0; it < 80 && b - a > 1e-12 * std::max(1.0, std::abs(a)); ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = sign * difference(p, q, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = sign * difference(p, q, x1);
    }
  }
  return sign * std::max(f1, f2);
}

}  // namespace

double interval_sup_distance(const Law1D& p, const Law1D& q, std::size_t grid_points) {
  std::vector<double> grid = law_grid_points(p, grid_points);
  const std::vector<double> grid_q = law_grid_points(q, grid_points);
  grid.insert(grid.end(), grid_q.begin(), grid_q.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  Extremes e;
  std::size_t i_sup = 0;
  std::size_t i_inf = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    const double right = difference(p, q, x);
    const double left = law_cdf_left(p, x) - law_cdf_left(q, x);
    for (double v : {right, left}) {
      if (v > e.sup) {
        e.sup = v;
        i_sup = i;
      }
      if (v < e.inf) {
        e.inf = v;
        i_inf = i;
      }
    }
  }
  // Between grid points a difference of two continuous CDFs can still peak.
  if (law_is_continuous(p) && law_is_continuous(q) && grid.size() >= 3) {
    auto bracket = [&](std::size_t i) {
      const std::size_t lo = i == 0 ? 0 : i - 1;
      const std::size_t hi = std::min(i + 1, grid.size() - 1);
      return std::pair{grid[lo], grid[hi]};
    };
    if (e.sup > 0.0) {
      auto [a, b] = bracket(i_sup);
      e.sup = std::max(e.sup, golden_refine(p, q, a, b, true));
    }
    if (e.inf < 0.0) {
      auto [a, b] = bracket(i_inf);
      e.inf = std::min(e.inf, golden_refine(p, q, a, b, false));
    }
  }
  return clamp01(e.sup - e.inf);
}

double interval_sup_bootstrap_scale(const WeightedSampleLaw& sample, std::size_t resamples,
                                    std::uint64_t seed) {
  if (sample.values.empty()) throw InputError("weighted sample is empty");
  if (resamples == 0) throw InputError("bootstrap needs at least one resample");
  const std::size_t n = sample.values.size();
  const Law1D base = sample;
  double sum_sq = 0.0;
  for (std::size_t b = 0; b < resamples; ++b) {
    CounterRng rng(derive_seed(seed, {b}));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Weighted resampling by inverting the cumulative weights.
      const double u = unif(rng);
      auto it = std::lower_bound(sample.cumulative.begin(), sample.cumulative.end(), u);
      if (it == sample.cumulative.end()) --it;
      values[i] = sample.values[static_cast<std::size_t>(it - sample.cumulative.begin())];
    }
    const double d = interval_sup_distance(make_weighted_sample(std::move(values)), base);
    sum_sq += d * d;
  }
  return std::sqrt(sum_sq / static_cast<double>(resamples));
}

TVResult tv_from_log_ratios(const Eigen::VectorXd& log_ratios, bool self_normalize,
                            std::size_t bootstrap_resamples, std::uint64_t seed) {
  const Eigen::Index n = log_ratios.size();
  if (n == 0) throw InputError("no draws for the Monte Carlo estimator");
  TVResult r;
  r.method = TVMethod::monte_carlo;
  const auto nd = static_cast<double>(n);

  if (!self_normalize) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ratio = std::isfinite(log_ratios[i]) ? std::exp(log_ratios[i]) : 0.0;
      const double term = std::max(0.0, 1.0 - ratio);
      sum += term;
      sum_sq += term * term;
    }
    const double mean = sum / nd;
    const double var = n > 1 ? std::max(0.0, (sum_sq - nd * mean * mean) / (nd - 1.0)) : 0.0;
    r.value = clamp01(mean);
    r.se = std::sqrt(var / nd);
    r.ess = nd;
    return r;
  }

  const double max_log = log_ratios.maxCoeff();
  if (!std::isfinite(max_log)) {
    r.value = 1.0;
    r.se = 0.0;
    r.ess = 0.0;
    r.reliable = false;
    return r;
  }
  Eigen::VectorXd w = (log_ratios.array() - max_log).exp();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(w[i])) w[i] = 0.0;
  }

  // p / q at x_i is estimated by n * normalized weight.
  auto estimate = [nd](const Eigen::VectorXd& weights, const std::vector<Eigen::Index>* idx) {
    double total = 0.0;
    const Eigen::Index m = weights.size();
    for (Eigen::Index i = 0; i < m; ++i) total += weights[idx ? (*idx)[i] : i];
    double sum = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      sum += std::max(0.0, 1.0 - nd * weights[idx ? (*idx)[i] : i] / total);
    }
    return sum / nd;
  };

  const double total = w.sum();
  r.ess = total * total / w.squaredNorm();
  r.reliable = r.ess >= 0.01 * nd;
  r.value = clamp01(estimate(w, nullptr));

  if (bootstrap_resamples > 0) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    double mean = 0.0;
    double mean_sq = 0.0;
    for (std::size_t b = 0; b < bootstrap_resamples; ++b) {
      CounterRng rng(derive_seed(seed, {0xb007ULL, b}));
      std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
      for (auto& i : idx) i = pick(rng);
      const double v = estimate(w, &idx);
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

TVResult tv_monte_carlo(const LogDensity& log_p, const LogDensity& log_q, const Sampler& sample_q,
                        const MonteCarloOptions& options) {
  if (options.n_draws == 0) throw InputError("Monte Carlo TV needs at least one draw");
  const auto n = static_cast<Eigen::Index>(options.n_draws);
  Eigen::VectorXd log_ratios(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    CounterRng rng(derive_seed(options.seed, {static_cast<std::uint64_t>(i)}));
    const Eigen::VectorXd x = sample_q(rng);
    log_ratios[i] = log_p(x) - log_q(x);
  }
  return tv_from_log_ratios(log_ratios, options.self_normalize, options.bootstrap_resamples,
                            options.seed);
}

}  // namespace bvm
