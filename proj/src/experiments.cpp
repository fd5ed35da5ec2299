#include "bvm/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <thread>

#include "bvm/distances.hpp"
#include "bvm/errors.hpp"
#include "bvm/special_functions.hpp"

namespace bvm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kLogTwoPi = 1.8378770664093454836;

// Sub-stream tags inside a replicate.
enum Stream : std::uint64_t { kData = 0, kPosterior = 1, kBootstrap = 2, kCheck = 3 };

struct GridContext {
  explicit GridContext(Design d) : design(std::move(d)) {}

  std::size_t index = 0;
  Eigen::Index n = 0;
  Eigen::Index k = 0;
  double sigma = 1.0;
  double tau = 0.0;
  double M = 0.0;
  double rate = 0.0;
  Design design;
  Eigen::VectorXd f0;
  Eigen::VectorXd theta0;  // (Phi^T Phi)^{-1} Phi^T F_0
  Eigen::VectorXd f_proj;
  std::optional<PriorSpec> prior;

  Eigen::VectorXd center;       // contraction ball centre
  double center_offset2 = 0.0;  // squared distance lost to the truncated tail
  double projection_bias = 0.0;

  SmoothPriorConditions smooth_conditions;  // determinant and dimension ratios only

  std::optional<FunctionalSpec> functional;
  Eigen::VectorXd b;
  double true_value = 0.0;
  double functional_at_projection = 0.0;
  std::optional<DeltaMethodQuantities> dq;
  FunctionalConditions functional_conditions;
};

double vector_l2_tail(const Truth& truth, Eigen::Index k) {
  const auto* sob = std::get_if<SobolevTruth>(&truth);
  if (!sob || sob->prefix_length() <= k) return 0.0;
  return sob->coeffs.tail(sob->prefix_length() - k).squaredNorm();
}

SmoothDensityPrior as_smooth_density(const PriorSpec& prior, const Design& design) {
  if (const auto* smooth = std::get_if<SmoothDensityPrior>(&prior)) return *smooth;
  if (const auto* coord = std::get_if<CoordinateGaussianPrior>(&prior)) {
    SmoothPriorParams p;
    p.variances = coord->variances;
    return make_smooth_prior("gaussian-diag", p);
  }
  const double tau = std::get<IsotropicGaussianPrior>(prior).tau;
  if (std::isinf(tau)) return make_smooth_prior("flat", {});
  // theta ~ N(0, tau^2 G^{-1})
  SmoothDensityPrior s;
  s.description = "isotropic-gaussian";
  const double log_det = design.log_det_gram();
  s.log_density = [design, tau, log_det](const Eigen::VectorXd& t) {
    const Eigen::VectorXd v = design.chol().matrixU() * t;
    const auto k = static_cast<double>(t.size());
    return -0.5 * (v.squaredNorm() / (tau * tau) + k * (kLogTwoPi + 2.0 * std::log(tau)) -
                   log_det);
  };
  return s;
}

double functional_true_value(const ExperimentConfig& config, const Truth& truth,
                             const GridContext& ctx) {
  const FunctionalConfig& fc = *config.functional;
  const FunctionalSpec& spec = *ctx.functional;
  const double discrete = ctx.b.dot(functional_value(spec, ctx.design, ctx.f0));
  if (fc.true_value == "discrete") return discrete;
  const bool sobolev = std::holds_alternative<SobolevTruth>(truth);
  const bool function_model = config.model != ModelKind::gaussian_sequence;
  if (std::holds_alternative<ThetaQuadraticFunctional>(spec)) {
    if (sobolev && config.model != ModelKind::spline_regression) {
      return ctx.b[0] * truth_l2_norm_squared(truth);
    }
    return discrete;
  }
  if (std::holds_alternative<QuadraticNormFunctional>(spec)) {
    return function_model ? ctx.b[0] * truth_l2_norm_squared(truth) : discrete;
  }
  // Linear: integral of f g when both are Fourier-synthesised.
  if (!function_model || !sobolev) return discrete;
  if (!fc.g) return ctx.b[0] * std::get<SobolevTruth>(truth).coeffs[0];
  const Truth g = build_truth(*fc.g, default_prefix_length(ctx.k));
  if (!std::holds_alternative<SobolevTruth>(g)) return discrete;
  return ctx.b[0] * exact_inner_product(truth, g);
}

std::vector<GridContext> build_contexts(const ExperimentConfig& config) {
  validate_config(config);
  const Truth truth = build_truth_for(config);
  std::vector<GridContext> contexts;
  contexts.reserve(config.n_grid.size());
  for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
    const auto n = static_cast<Eigen::Index>(config.n_grid[i]);
    const Eigen::Index k = k_for(config, i);
    GridContext ctx(build_design_for(config, n, k));
    ctx.index = i;
    ctx.n = n;
    ctx.k = k;
    ctx.sigma = sigma_for(config, n);
    ctx.tau = config.prior.kind == PriorConfig::Kind::isotropic_gaussian ? tau_for(config, n) : kNaN;
    ctx.M = M_for(config, n, k);
    ctx.rate = rate_for(config, n, k);
    ctx.f0 = render_truth_vector(truth, ctx.design);
    const ProjectionOutput proj = project(ctx.design, ctx.f0);
    ctx.theta0 = proj.theta_hat;
    ctx.f_proj = proj.f_proj;
    ctx.projection_bias = (ctx.f0 - ctx.f_proj).norm();
    ctx.prior = build_prior(config, ctx.design);
    validate_prior(*ctx.prior, k);

    ctx.center = ctx.theta0;
    if (config.center_truth) {
      const auto* sob = std::get_if<SobolevTruth>(&truth);
      if (!sob || config.model == ModelKind::spline_regression) {
        throw ConfigError("center 'truth' needs a sobolev truth and a non-spline model");
      }
      ctx.center = sob->coeffs.head(k);
      ctx.center_offset2 = vector_l2_tail(truth, k);
    }

    ctx.smooth_conditions = check_smooth_prior_conditions(ctx.design, as_smooth_density(*ctx.prior, ctx.design),
                                             ctx.theta0, ctx.sigma, ctx.M, 0, config.seed);

    if (config.functional) {
      ctx.functional = build_functional(config, ctx.design);
      const Eigen::Index p = functional_dimension(*ctx.functional);
      ctx.b = Eigen::VectorXd::Ones(p);
      if (!config.functional->b.empty()) {
        if (static_cast<Eigen::Index>(config.functional->b.size()) != p) {
          throw ConfigError("functional b must have length " + std::to_string(p));
        }
        ctx.b = Eigen::Map<const Eigen::VectorXd>(config.functional->b.data(), p);
      }
      ctx.functional_at_projection =
          ctx.b.dot(functional_value(*ctx.functional, ctx.design, ctx.f_proj));
      ctx.true_value = functional_true_value(config, truth, ctx);
      ctx.dq = delta_quantities(*ctx.functional, ctx.design, ctx.sigma, ctx.f_proj, ctx.M);
      ctx.functional_conditions = check_functional_conditions(*ctx.dq, k, ctx.M);
    }
    contexts.push_back(std::move(ctx));
  }
  return contexts;
}

// Runs body(t) for t in [0, count) on up to `jobs` threads. Results must be
// written by index; the first failing task (lowest index) is rethrown.
template <class Body>
void parallel_for(std::size_t count, int jobs, Body&& body) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t t = 0; t < count; ++t) body(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_index = count;
  std::exception_ptr error;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t t = next.fetch_add(1); t < count; t = next.fetch_add(1)) {
        try {
          body(t);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (t < error_index) {
            error_index = t;
            error = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  if (error) std::rethrow_exception(error);
}

template <class ReplicateFn>
ExperimentResult run_grid(const ExperimentConfig& config, const RunOptions& options,
                          ReplicateFn&& replicate) {
  const std::vector<GridContext> contexts = build_contexts(config);
  ExperimentResult result;
  result.metrics = metric_columns(config);
  const auto reps = static_cast<std::size_t>(config.replicates);
  result.rows.resize(contexts.size() * reps);
  parallel_for(result.rows.size(), options.jobs, [&](std::size_t t) {
    const GridContext& ctx = contexts[t / reps];
    const long r = static_cast<long>(t % reps);
    ResultRow row;
    row.n = static_cast<long>(ctx.n);
    row.k = static_cast<long>(ctx.k);
    row.replicate = r;
    row.seed = replicate_seed(config.seed, ctx.index, r);
    row.values.assign(result.metrics.size(), kNaN);
    replicate(ctx, row);
    result.rows[t] = std::move(row);
  });
  return result;
}

// ||N(0, I) - N(z, diag d)||_TV by sampling the first law.
TVResult whitened_diag_mc(const Eigen::VectorXd& z, const Eigen::VectorXd& d, std::size_t draws,
                          std::uint64_t seed) {
  const Eigen::Index k = z.size();
  const double log_det = d.array().log().sum();
  auto log_post = [&](const Eigen::VectorXd& x) {
    return -0.5 * (((x - z).array().square() / d.array()).sum() + log_det);
  };
  auto log_target = [](const Eigen::VectorXd& x) { return -0.5 * x.squaredNorm(); };
  auto sampler = [k](CounterRng& rng) { return standard_normal_vector(rng, k); };
  MonteCarloOptions opt;
  opt.n_draws = draws;
  opt.seed = seed;
  return tv_monte_carlo(log_post, log_target, sampler, opt);
}

struct Columns {
  const std::vector<std::string>& names;
  std::vector<double>& values;
  void set(const std::string& name, double v) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw Error("internal: unknown metric column '" + name + "'");
    values[static_cast<std::size_t>(it - names.begin())] = v;
  }
};

GaussianDist gaussian_posterior(const GridContext& ctx, const Eigen::VectorXd& y) {
  if (const auto* iso = std::get_if<IsotropicGaussianPrior>(&*ctx.prior)) {
    return conjugate_posterior(ctx.design, iso->tau, ctx.sigma, y);
  }
  return coordinate_posterior(ctx.design, std::get<CoordinateGaussianPrior>(*ctx.prior).variances,
                              ctx.sigma, y);
}

}  // namespace

Eigen::VectorXd generate_data(const Eigen::VectorXd& f0, double sigma, std::uint64_t seed) {
  if (!(sigma > 0.0)) throw InputError("noise sd must be positive");
  CounterRng rng(seed);
  return f0 + sigma * standard_normal_vector(rng, f0.size());
}

std::uint64_t replicate_seed(std::uint64_t base, std::size_t grid_index, long replicate) {
  return derive_seed(base, {static_cast<std::uint64_t>(grid_index),
                            static_cast<std::uint64_t>(replicate)});
}

std::string outside_column(double lambda) { return "outside_l" + format_number(lambda); }

std::vector<std::string> metric_columns(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::bvm:
      return {"tv_estimate", "tv_se",     "tv_exact",  "tv_mc",          "tv_mc_se",
              "tv_lower",    "tv_upper",  "tv_scale",  "tv_shift",       "ess",
              "shrinkage",   "cond_sigma_tau", "cond_f0", "cond_dim", "smooth_dim",
              "smooth_det"};
    case ExperimentKind::contraction: {
      std::vector<std::string> cols;
      for (double l : config.lambda_grid) cols.push_back(outside_column(l));
      cols.insert(cols.end(), {"rate", "projection_bias", "center_distance", "exact"});
      return cols;
    }
    case ExperimentKind::functional:
      return {"posterior_interval_sup", "freq_stat", "bias_term", "coverage", "ci_lo",
              "ci_hi",      "true_value", "center",   "gamma",     "ess",      "b_ratio",
              "gamma_min",  "degenerate"};
  }
  return {};
}

ExperimentResult run_bvm_experiment(const ExperimentConfig& config, const RunOptions& options) {
  if (config.kind != ExperimentKind::bvm) throw ConfigError("not a bvm experiment");
  const auto draws = static_cast<std::size_t>(config.mc_draws);
  const auto metrics = metric_columns(config);
  return run_grid(config, options, [&](const GridContext& ctx, ResultRow& row) {
    Columns col{metrics, row.values};
    const Eigen::VectorXd y = generate_data(ctx.f0, ctx.sigma, derive_seed(row.seed, {kData}));
    const Eigen::VectorXd theta_hat = project(ctx.design, y).theta_hat;
    col.set("smooth_dim", ctx.smooth_conditions.dimension_ratio);
    col.set("smooth_det", ctx.smooth_conditions.determinant_ratio);

    if (const auto* iso = std::get_if<IsotropicGaussianPrior>(&*ctx.prior)) {
      const double c = shrinkage_factor(iso->tau, ctx.sigma);
      // Whitened by the target, the posterior is N(z, c I) with
      // ||z|| = (1 - c) ||Phi theta_Y|| / sigma.
      const double z = (1.0 - c) * (ctx.design.columns() * theta_hat).norm() / ctx.sigma;
      const TVResult exact = tv_gaussian_shift_scale(ctx.k, c, z);
      const double scale = tv_gaussian_scale(ctx.k, c).value;
      const double shift = tv_gaussian_shift_norm(z).value;
      col.set("tv_estimate", exact.value);
      col.set("tv_se", 0.0);
      col.set("tv_exact", exact.value);
      col.set("tv_lower", exact.value);
      col.set("tv_upper", std::min(1.0, scale + shift));
      col.set("tv_scale", scale);
      col.set("tv_shift", shift);
      col.set("shrinkage", c);
      if (!std::isinf(iso->tau)) {
        const IsotropicPriorConditions t1 =
            check_isotropic_prior_conditions(ctx.sigma, iso->tau, ctx.f0.norm(), ctx.k);
        col.set("cond_sigma_tau", t1.sigma_over_tau);
        col.set("cond_f0", t1.f0_ratio);
        col.set("cond_dim", t1.dimension_ratio);
      } else {
        col.set("cond_sigma_tau", 0.0);
        col.set("cond_f0", 0.0);
        col.set("cond_dim", 0.0);
      }
      if (config.mc_check) {
        Eigen::VectorXd zv = Eigen::VectorXd::Zero(ctx.k);
        zv[0] = z;
        const TVResult mc = whitened_diag_mc(zv, Eigen::VectorXd::Constant(ctx.k, c), draws,
                                             derive_seed(row.seed, {kCheck}));
        col.set("tv_mc", mc.value);
        col.set("tv_mc_se", *mc.se);
        col.set("ess", mc.ess);
      }
      return;
    }

    if (const auto* coord = std::get_if<CoordinateGaussianPrior>(&*ctx.prior)) {
      const GaussianDist post = coordinate_posterior(ctx.design, coord->variances, ctx.sigma, y);
      const Eigen::VectorXd g = ctx.design.gram().diagonal();
      const Eigen::VectorXd& var = std::get<DiagonalCov>(post.cov()).variances;
      Eigen::VectorXd z(ctx.k);
      Eigen::VectorXd d(ctx.k);
      for (Eigen::Index j = 0; j < ctx.k; ++j) {
        const double noise_var = ctx.sigma * ctx.sigma / g[j];
        z[j] = (post.mean()[j] - theta_hat[j]) / std::sqrt(noise_var);
        d[j] = var[j] / noise_var;
      }
      // Coordinates sharing a variance ratio form isotropic blocks with exact
      // marginal TVs: the joint TV lies between their max and their sum.
      std::vector<bool> used(static_cast<std::size_t>(ctx.k), false);
      double lower = 0.0;
      double upper = 0.0;
      for (Eigen::Index j = 0; j < ctx.k; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        double z2 = 0.0;
        Eigen::Index size = 0;
        for (Eigen::Index i = j; i < ctx.k; ++i) {
          if (!used[static_cast<std::size_t>(i)] && std::abs(d[i] - d[j]) <= 1e-12 * d[j]) {
            used[static_cast<std::size_t>(i)] = true;
            z2 += z[i] * z[i];
            ++size;
          }
        }
        const double block = tv_gaussian_shift_scale(size, d[j], std::sqrt(z2)).value;
        lower = std::max(lower, block);
        upper += block;
      }
      const TVResult mc = whitened_diag_mc(z, d, draws, derive_seed(row.seed, {kCheck}));
      col.set("tv_estimate", mc.value);
      col.set("tv_se", *mc.se);
      col.set("tv_mc", mc.value);
      col.set("tv_mc_se", *mc.se);
      col.set("tv_lower", lower);
      col.set("tv_upper", std::min(1.0, upper));
      col.set("ess", mc.ess);
      return;
    }

    const auto& smooth = std::get<SmoothDensityPrior>(*ctx.prior);
    const PosteriorSample sample = smooth_posterior_sample(ctx.design, smooth, ctx.sigma, y, draws,
                                                           derive_seed(row.seed, {kPosterior}));
    const GaussianDist target(theta_hat, ScaledGramInverse{ctx.sigma * ctx.sigma, ctx.design});
    const TVResult tv = posterior_tv_to_target(sample, target, 200, derive_seed(row.seed, {kBootstrap}));
    col.set("tv_estimate", tv.value);
    col.set("tv_se", *tv.se);
    col.set("tv_mc", tv.value);
    col.set("tv_mc_se", *tv.se);
    col.set("ess", tv.ess);
  });
}

ExperimentResult run_contraction_experiment(const ExperimentConfig& config,
                                            const RunOptions& options) {
  if (config.kind != ExperimentKind::contraction) throw ConfigError("not a contraction experiment");
  const auto metrics = metric_columns(config);
  return run_grid(config, options, [&](const GridContext& ctx, ResultRow& row) {
    Columns col{metrics, row.values};
    const Eigen::VectorXd y = generate_data(ctx.f0, ctx.sigma, derive_seed(row.seed, {kData}));
    const GaussianDist post = gaussian_posterior(ctx, y);
    const double center_dist2 = (post.mean() - ctx.center).squaredNorm();
    col.set("rate", ctx.rate);
    col.set("projection_bias", ctx.projection_bias);
    col.set("center_distance", std::sqrt(center_dist2));

    const std::optional<double> iso = post.isotropic_scale();
    std::vector<double> sq_dist;
    if (!iso) {
      const auto draws = static_cast<std::size_t>(config.mc_draws);
      sq_dist.resize(draws);
      for (std::size_t i = 0; i < draws; ++i) {
        CounterRng rng(derive_seed(row.seed, {kPosterior, i}));
        sq_dist[i] = (post.sample(rng) - ctx.center).squaredNorm();
      }
    }
    col.set("exact", iso ? 1.0 : 0.0);
    for (double lambda : config.lambda_grid) {
      const double r = lambda * ctx.rate;
      // In L2 the truncated tail adds a fixed squared offset.
      const double threshold = r * r - ctx.center_offset2;
      double mass = 1.0;
      if (threshold > 0.0) {
        if (iso) {
          mass = special::noncentral_chi2_sf(static_cast<double>(ctx.k), center_dist2 / *iso,
                                             threshold / *iso);
        } else {
          std::size_t outside = 0;
          for (double d2 : sq_dist) outside += d2 > threshold ? 1 : 0;
          mass = static_cast<double>(outside) / static_cast<double>(sq_dist.size());
        }
      }
      col.set(outside_column(lambda), mass);
    }
  });
}

ExperimentResult run_functional_experiment(const ExperimentConfig& config,
                                           const RunOptions& options) {
  if (config.kind != ExperimentKind::functional) throw ConfigError("not a functional experiment");
  const auto metrics = metric_columns(config);
  const FunctionalConfig& fc = *config.functional;
  return run_grid(config, options, [&](const GridContext& ctx, ResultRow& row) {
    Columns col{metrics, row.values};
    const FunctionalSpec& spec = *ctx.functional;
    const Eigen::VectorXd y = generate_data(ctx.f0, ctx.sigma, derive_seed(row.seed, {kData}));
    const ProjectionOutput proj = project(ctx.design, y);

    PushforwardOptions push;
    push.n_draws = static_cast<std::size_t>(config.mc_draws);
    push.seed = derive_seed(row.seed, {kPosterior});
    Law1D law = NormalLaw{};
    if (const auto* smooth = std::get_if<SmoothDensityPrior>(&*ctx.prior)) {
      PosteriorSample sample = smooth_posterior_sample(ctx.design, *smooth, ctx.sigma, y,
                                                       push.n_draws, push.seed);
      law = functional_posterior_1d(spec, std::move(sample), ctx.design, ctx.b, push);
    } else {
      law = functional_posterior_1d(spec, gaussian_posterior(ctx, y), ctx.design, ctx.b, push);
    }

    const double center = ctx.b.dot(functional_value(spec, ctx.design, proj.f_proj));
    const Eigen::MatrixXd gamma =
        fc.plug_in ? delta_quantities(spec, ctx.design, ctx.sigma, proj.f_proj, ctx.M).gamma
                   : ctx.dq->gamma;
    const double var = ctx.b.dot(gamma * ctx.b);
    const double truth_var = ctx.b.dot(ctx.dq->gamma * ctx.b);
    const CredibleInterval ci = credible_interval(law, fc.level);

    col.set("ci_lo", ci.lo);
    col.set("ci_hi", ci.hi);
    col.set("coverage", ci.lo <= ctx.true_value && ctx.true_value <= ci.hi ? 1.0 : 0.0);
    col.set("true_value", ctx.true_value);
    col.set("center", center);
    col.set("gamma", var);
    col.set("ess", law_effective_size(law));
    col.set("b_ratio", ctx.functional_conditions.b_ratio);
    col.set("gamma_min", ctx.functional_conditions.gamma_min_eigenvalue);
    if (!(var > 0.0) || !(truth_var > 0.0)) {
      col.set("degenerate", 1.0);
      return;
    }
    col.set("degenerate", 0.0);
    const Law1D standardized = standardize(law, center, gamma, ctx.b);
    col.set("posterior_interval_sup", interval_sup_distance(standardized, NormalLaw{0.0, 1.0}));
    col.set("freq_stat", (center - ctx.functional_at_projection) / std::sqrt(var));
    col.set("bias_term", (ctx.functional_at_projection - ctx.true_value) / std::sqrt(truth_var));
  });
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  switch (config.kind) {
    case ExperimentKind::bvm: return run_bvm_experiment(config, options);
    case ExperimentKind::contraction: return run_contraction_experiment(config, options);
    case ExperimentKind::functional: return run_functional_experiment(config, options);
  }
  throw ConfigError("unknown experiment kind");
}

std::size_t metric_index(const ExperimentResult& result, const std::string& name) {
  const auto it = std::find(result.metrics.begin(), result.metrics.end(), name);
  if (it == result.metrics.end()) throw InputError("no metric column '" + name + "'");
  return static_cast<std::size_t>(it - result.metrics.begin());
}

std::size_t column_index(const SummaryTable& table, const std::string& name) {
  const auto it = std::find(table.columns.begin(), table.columns.end(), name);
  if (it == table.columns.end()) throw InputError("no summary column '" + name + "'");
  return static_cast<std::size_t>(it - table.columns.begin());
}

SummaryTable summarize(const ExperimentResult& result) {
  SummaryTable table;
  table.columns = {"n", "k", "replicates"};
  for (const auto& m : result.metrics) {
    table.columns.push_back(m + "_mean");
    table.columns.push_back(m + "_se");
  }
  const auto freq = std::find(result.metrics.begin(), result.metrics.end(), "freq_stat");
  const bool has_freq = freq != result.metrics.end();
  if (has_freq) table.columns.push_back("freq_interval_sup");

  std::size_t start = 0;
  while (start < result.rows.size()) {
    std::size_t end = start;
    while (end < result.rows.size() && result.rows[end].n == result.rows[start].n) ++end;
    std::vector<double> out{static_cast<double>(result.rows[start].n),
                            static_cast<double>(result.rows[start].k),
                            static_cast<double>(end - start)};
    for (std::size_t m = 0; m < result.metrics.size(); ++m) {
      double sum = 0.0;
      double count = 0.0;
      for (std::size_t r = start; r < end; ++r) {
        const double v = result.rows[r].values[m];
        if (std::isfinite(v)) {
          sum += v;
          count += 1.0;
        }
      }
      const double mean = count > 0.0 ? sum / count : kNaN;
      double ss = 0.0;
      for (std::size_t r = start; r < end; ++r) {
        const double v = result.rows[r].values[m];
        if (std::isfinite(v)) ss += (v - mean) * (v - mean);
      }
      const double se = count > 1.0 ? std::sqrt(ss / (count - 1.0) / count) : kNaN;
      out.push_back(mean);
      out.push_back(se);
    }
    if (has_freq) {
      const auto fi = static_cast<std::size_t>(freq - result.metrics.begin());
      std::vector<double> stats;
      for (std::size_t r = start; r < end; ++r) {
        const double v = result.rows[r].values[fi];
        if (std::isfinite(v)) stats.push_back(v);
      }
      out.push_back(stats.empty() ? kNaN
                                  : interval_sup_distance(make_weighted_sample(std::move(stats)),
                                                          NormalLaw{0.0, 1.0}));
    }
    table.rows.push_back(std::move(out));
    start = end;
  }
  return table;
}

SummaryTable check_conditions(const ExperimentConfig& config, std::size_t n_probe) {
  const std::vector<GridContext> contexts = build_contexts(config);
  SummaryTable table;
  table.columns = {"n",          "k",          "sigma",      "tau",          "M",
                   "c_min",      "c_max",      "projection_bias", "iso_sigma_tau", "iso_f0",
                   "iso_dim",     "smooth_spread",  "smooth_center",  "smooth_dim",       "smooth_det",
                   "func_gamma_min", "func_b_ratio", "func_k_over_M"};
  for (const GridContext& ctx : contexts) {
    const auto [c_min, c_max] = design_regularity_ratio(ctx.design);
    double t1[3] = {kNaN, kNaN, kNaN};
    if (const auto* iso = std::get_if<IsotropicGaussianPrior>(&*ctx.prior);
        iso && !std::isinf(iso->tau)) {
      const IsotropicPriorConditions r = check_isotropic_prior_conditions(ctx.sigma, iso->tau, ctx.f0.norm(), ctx.k);
      t1[0] = r.sigma_over_tau;
      t1[1] = r.f0_ratio;
      t1[2] = r.dimension_ratio;
    }
    const SmoothPriorConditions t2 =
        check_smooth_prior_conditions(ctx.design, as_smooth_density(*ctx.prior, ctx.design), ctx.theta0,
                                  ctx.sigma, ctx.M, n_probe, derive_seed(config.seed, {ctx.index}));
    std::vector<double> row{static_cast<double>(ctx.n),
                            static_cast<double>(ctx.k),
                            ctx.sigma,
                            ctx.tau,
                            ctx.M,
                            c_min,
                            c_max,
                            ctx.projection_bias,
                            t1[0],
                            t1[1],
                            t1[2],
                            t2.log_ratio_spread,
                            t2.max_log_ratio_from_center,
                            t2.dimension_ratio,
                            t2.determinant_ratio,
                            ctx.dq ? ctx.functional_conditions.gamma_min_eigenvalue : kNaN,
                            ctx.dq ? ctx.functional_conditions.b_ratio : kNaN,
                            ctx.dq ? ctx.functional_conditions.k_over_M : kNaN};
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace bvm
