#include "bvm/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "bvm/errors.hpp"

namespace bvm {

using nlohmann::json;

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

std::string require_string(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_string()) throw ConfigError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

TruthConfig parse_truth(const json& j) {
  if (!j.is_object()) throw ConfigError("truth must be an object");
  TruthConfig t;
  t.truth_class = get_or<std::string>(j, "class", "sobolev");
  t.alpha = get_or<double>(j, "alpha", 1.0);
  t.radius = get_or<double>(j, "L", 1.0);
  t.prefix_length = get_or<long>(j, "J", 0);
  if (t.truth_class == "sobolev") {
    if (j.contains("coefficients")) {
      t.rule = "explicit";
      t.coefficients = j.at("coefficients").get<std::vector<double>>();
    } else {
      t.rule = "power-decay";
      t.exponent = get_or<double>(j, "exponent", 2.0);
    }
  } else if (t.truth_class == "holder") {
    t.name = require_string(j, "name");
  } else {
    throw ConfigError("truth class must be 'sobolev' or 'holder'");
  }
  return t;
}

KRule parse_k_rule(const json& j) {
  KRule r;
  const std::string kind = j.is_string() ? j.get<std::string>() : require_string(j, "kind");
  const json empty = json::object();
  const json& body = j.is_object() ? j : empty;
  if (kind == "fixed") {
    r.kind = KRule::Kind::fixed;
    r.value = get_or<double>(body, "value", 0.0);
  } else if (kind == "minimax") {
    r.kind = KRule::Kind::minimax;
    r.value = get_or<double>(body, "alpha", 1.0);
  } else if (kind == "sqrt-n-over-ln-n") {
    r.kind = KRule::Kind::sqrt_n_over_ln_n;
  } else if (kind == "n-over-ln-n") {
    r.kind = KRule::Kind::n_over_ln_n;
  } else if (kind == "power") {
    r.kind = KRule::Kind::power;
    r.value = get_or<double>(body, "exponent", 0.5);
  } else if (kind == "custom") {
    r.kind = KRule::Kind::custom;
    r.custom = get_or<std::vector<long>>(body, "values", {});
  } else {
    throw ConfigError("unknown k_rule '" + kind + "'");
  }
  return r;
}

PriorConfig parse_prior(const json& j) {
  PriorConfig p;
  const std::string kind = require_string(j, "kind");
  if (kind == "isotropic-gaussian" || kind == "flat") {
    p.kind = PriorConfig::Kind::isotropic_gaussian;
    if (kind == "flat" || get_or<bool>(j, "flat", false)) {
      p.tau.flat = true;
    } else {
      const json& tau = require(j, "tau");
      if (tau.is_number()) {
        p.tau.scale = tau.get<double>();
      } else {
        p.tau.scale = get_or<double>(tau, "scale", 1.0);
        p.tau.exponent = get_or<double>(tau, "exponent", 0.0);
      }
    }
  } else if (kind == "coordinate-gaussian") {
    p.kind = PriorConfig::Kind::coordinate_gaussian;
    p.variances_rule = get_or<std::string>(j, "variances", "split");
    p.variances_alpha = get_or<double>(j, "alpha", 1.0);
    p.variance_value = get_or<double>(j, "value", 1.0);
    if (p.variances_rule != "split" && p.variances_rule != "constant") {
      throw ConfigError("coordinate-gaussian variances must be 'split' or 'constant'");
    }
  } else if (kind == "smooth") {
    p.kind = PriorConfig::Kind::smooth;
    p.density = require_string(j, "density");
    p.params.tau = get_or<double>(j, "tau", 1.0);
    p.params.half_width = get_or<double>(j, "half_width", 10.0);
    p.params.dof = get_or<double>(j, "dof", 3.0);
    p.params.scale = get_or<double>(j, "scale", 1.0);
    if (j.contains("variances")) {
      const auto v = j.at("variances").get<std::vector<double>>();
      p.params.variances = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
  } else {
    throw ConfigError("unknown prior kind '" + kind + "'");
  }
  return p;
}

FunctionalConfig parse_functional(const json& j) {
  FunctionalConfig f;
  f.kind = require_string(j, "kind");
  if (f.kind != "linear" && f.kind != "quadratic-norm" && f.kind != "theta-quadratic") {
    throw ConfigError("unknown functional kind '" + f.kind + "'");
  }
  if (j.contains("g")) f.g = parse_truth(j.at("g"));
  f.b = get_or<std::vector<double>>(j, "b", {});
  f.level = get_or<double>(j, "level", 0.95);
  const std::string standardization = get_or<std::string>(j, "standardization", "truth");
  if (standardization != "truth" && standardization != "plug-in") {
    throw ConfigError("standardization must be 'truth' or 'plug-in'");
  }
  f.plug_in = standardization == "plug-in";
  f.true_value = get_or<std::string>(j, "true_value", "integral");
  if (f.true_value != "integral" && f.true_value != "discrete") {
    throw ConfigError("true_value must be 'integral' or 'discrete'");
  }
  return f;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::bvm: return "bvm";
    case ExperimentKind::contraction: return "contraction";
    case ExperimentKind::functional: return "functional";
  }
  return "unknown";
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::gaussian_sequence: return "gaussian-sequence";
    case ModelKind::fourier_regression: return "fourier-regression";
    case ModelKind::spline_regression: return "spline-regression";
  }
  return "unknown";
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  ExperimentConfig c;
  const std::string kind = require_string(j, "kind");
  if (kind == "bvm") {
    c.kind = ExperimentKind::bvm;
  } else if (kind == "contraction") {
    c.kind = ExperimentKind::contraction;
  } else if (kind == "functional") {
    c.kind = ExperimentKind::functional;
  } else {
    throw ConfigError("unknown experiment kind '" + kind + "'");
  }

  const std::string model = require_string(j, "model");
  if (model == "gaussian-sequence") {
    c.model = ModelKind::gaussian_sequence;
  } else if (model == "fourier-regression") {
    c.model = ModelKind::fourier_regression;
  } else if (model == "spline-regression") {
    c.model = ModelKind::spline_regression;
  } else {
    throw ConfigError("unknown model '" + model + "'");
  }

  c.n_grid = get_or<std::vector<long>>(j, "n_grid", {});
  c.k_rule = parse_k_rule(require(j, "k_rule"));

  if (j.contains("sigma_rule")) {
    const json& s = j.at("sigma_rule");
    const std::string sk = s.is_string() ? s.get<std::string>() : require_string(s, "kind");
    if (sk == "inv-sqrt-n") {
      c.sigma_rule.inv_sqrt_n = true;
    } else if (sk == "constant") {
      c.sigma_rule.inv_sqrt_n = false;
      c.sigma_rule.value = s.is_object() ? get_or<double>(s, "value", 1.0) : 1.0;
    } else {
      throw ConfigError("sigma_rule must be 'inv-sqrt-n' or 'constant'");
    }
  } else {
    c.sigma_rule.inv_sqrt_n = c.model == ModelKind::gaussian_sequence;
  }

  c.prior = parse_prior(require(j, "prior"));
  c.truth = parse_truth(require(j, "truth"));
  if (j.contains("functional")) c.functional = parse_functional(j.at("functional"));
  if (j.contains("design")) {
    const json& d = j.at("design");
    c.spline_order = get_or<int>(d, "q", 4);
    c.design_points = get_or<std::string>(d, "points", "uniform");
  }
  c.replicates = get_or<long>(j, "replicates", 200);
  c.seed = get_or<std::uint64_t>(j, "seed", 1);
  c.mc_draws = get_or<long>(j, "mc_draws", 20000);
  c.mc_check = get_or<bool>(j, "mc_check", true);
  c.lambda_grid = get_or<std::vector<double>>(j, "lambda_grid", c.lambda_grid);
  if (j.contains("rate")) {
    const json& r = j.at("rate");
    c.rate.kind = r.is_string() ? r.get<std::string>() : require_string(r, "kind");
    if (r.is_object()) c.rate.value = get_or<double>(r, "value", get_or<double>(r, "alpha", 1.0));
  }
  const std::string center = get_or<std::string>(j, "center", "projection");
  if (center != "projection" && center != "truth") {
    throw ConfigError("center must be 'projection' or 'truth'");
  }
  c.center_truth = center == "truth";
  if (j.contains("M_rule")) {
    const json& m = j.at("M_rule");
    c.m_rule.kind = m.is_string() ? m.get<std::string>() : require_string(m, "kind");
    if (m.is_object()) c.m_rule.value = get_or<double>(m, "value", 1.0);
  }
  c.output = get_or<std::string>(j, "output", "");
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void validate_config(const ExperimentConfig& c) {
  if (c.n_grid.empty()) throw ConfigError("n_grid must not be empty");
  for (std::size_t i = 0; i < c.n_grid.size(); ++i) {
    if (c.n_grid[i] < 2) throw ConfigError("every n must be >= 2");
    if (i > 0 && c.n_grid[i] <= c.n_grid[i - 1]) throw ConfigError("n_grid must be increasing");
  }
  if (c.replicates < 1) throw ConfigError("replicates must be >= 1");
  if (c.mc_draws < 1) throw ConfigError("mc_draws must be >= 1");
  if (c.k_rule.kind == KRule::Kind::custom && c.k_rule.custom.size() != c.n_grid.size()) {
    throw ConfigError("custom k_rule needs one value per grid point");
  }
  if (c.k_rule.kind == KRule::Kind::fixed && c.k_rule.value < 1) {
    throw ConfigError("fixed k_rule needs a value >= 1");
  }
  if (c.k_rule.kind == KRule::Kind::minimax && !(c.k_rule.value > 0.0)) {
    throw ConfigError("minimax k_rule needs alpha > 0");
  }
  if (!c.sigma_rule.inv_sqrt_n && !(c.sigma_rule.value > 0.0)) {
    throw ConfigError("constant sigma must be > 0");
  }
  if (c.prior.kind == PriorConfig::Kind::isotropic_gaussian && !c.prior.tau.flat &&
      !(c.prior.tau.scale > 0.0)) {
    throw ConfigError("tau scale must be > 0");
  }
  if (c.prior.kind == PriorConfig::Kind::coordinate_gaussian &&
      c.model == ModelKind::spline_regression) {
    throw ConfigError("coordinate-gaussian priors need a diagonal Gram matrix (not splines)");
  }
  if (c.model == ModelKind::gaussian_sequence && c.truth.truth_class != "sobolev") {
    throw ConfigError("the gaussian sequence model takes a sobolev truth");
  }
  if (c.kind == ExperimentKind::functional && !c.functional) {
    throw ConfigError("functional experiments need a 'functional' section");
  }
  if (c.functional) {
    if (!(c.functional->level > 0.0 && c.functional->level < 1.0)) {
      throw ConfigError("functional level must lie in (0, 1)");
    }
    if (c.functional->kind != "linear" && c.functional->b.size() > 1) {
      throw ConfigError("quadratic functionals are scalar; b must have length 1");
    }
  }
  if (c.kind == ExperimentKind::contraction) {
    if (c.lambda_grid.empty()) throw ConfigError("lambda_grid must not be empty");
    for (double l : c.lambda_grid) {
      if (!(l > 0.0)) throw ConfigError("lambda values must be > 0");
    }
    if (c.prior.kind == PriorConfig::Kind::smooth) {
      throw ConfigError("contraction experiments take Gaussian priors");
    }
  }
  const auto& rk = c.rate.kind;
  if (rk != "sqrt-k-over-n" && rk != "minimax" && rk != "k-over-sqrt-n" && rk != "constant") {
    throw ConfigError("unknown rate rule '" + rk + "'");
  }
  const auto& mk = c.m_rule.kind;
  if (mk != "k-ln2-n" && mk != "constant" && mk != "k-ln-k") {
    throw ConfigError("unknown M_rule '" + mk + "'");
  }
  if (c.design_points != "uniform") throw ConfigError("design points must be 'uniform'");
  if (c.model == ModelKind::spline_regression && c.spline_order < 1) {
    throw ConfigError("spline order q must be >= 1");
  }
  for (std::size_t i = 0; i < c.n_grid.size(); ++i) {
    const Eigen::Index k = k_for(c, i);
    if (c.model == ModelKind::spline_regression && k < c.spline_order) {
      throw ConfigError("spline designs need k >= q at n = " + std::to_string(c.n_grid[i]));
    }
    if (c.truth.truth_class == "sobolev" && c.truth.rule == "explicit" &&
        static_cast<Eigen::Index>(c.truth.coefficients.size()) < k &&
        c.model == ModelKind::gaussian_sequence && c.truth.prefix_length == 0) {
      // Explicit lists shorter than k are padded only when J is given.
      throw ConfigError("explicit truth coefficients are shorter than k = " + std::to_string(k));
    }
  }
}

Eigen::Index k_for(const ExperimentConfig& c, std::size_t grid_index) {
  const double n = static_cast<double>(c.n_grid.at(grid_index));
  double raw = 0.0;
  switch (c.k_rule.kind) {
    case KRule::Kind::fixed: raw = c.k_rule.value; break;
    case KRule::Kind::minimax: raw = std::pow(n, 1.0 / (1.0 + 2.0 * c.k_rule.value)); break;
    case KRule::Kind::sqrt_n_over_ln_n: raw = std::sqrt(n) / std::log(n); break;
    case KRule::Kind::n_over_ln_n: raw = n / std::log(n); break;
    case KRule::Kind::power: raw = std::pow(n, c.k_rule.value); break;
    case KRule::Kind::custom: raw = static_cast<double>(c.k_rule.custom.at(grid_index)); break;
  }
  // Guard against pow() landing a hair below an exact integer.
  auto k = static_cast<Eigen::Index>(std::floor(raw * (1.0 + 1e-12)));
  k = std::max<Eigen::Index>(k, 2);
  const auto ni = static_cast<Eigen::Index>(c.n_grid[grid_index]);
  Eigen::Index cap = ni;
  if (c.model == ModelKind::fourier_regression && ni % 2 == 0) cap = ni - 1;
  return std::min(k, cap);
}

double sigma_for(const ExperimentConfig& c, Eigen::Index n) {
  return c.sigma_rule.inv_sqrt_n ? 1.0 / std::sqrt(static_cast<double>(n)) : c.sigma_rule.value;
}

double tau_for(const ExperimentConfig& c, Eigen::Index n) {
  if (c.prior.tau.flat) return std::numeric_limits<double>::infinity();
  return c.prior.tau.scale * std::pow(static_cast<double>(n), c.prior.tau.exponent);
}

double M_for(const ExperimentConfig& c, Eigen::Index n, Eigen::Index k) {
  const double kd = static_cast<double>(k);
  const double ln_n = std::log(static_cast<double>(n));
  if (c.m_rule.kind == "constant") return c.m_rule.value;
  if (c.m_rule.kind == "k-ln-k") return c.m_rule.value * kd * std::log(std::max(kd, 2.0));
  return c.m_rule.value * kd * ln_n * ln_n;
}

double rate_for(const ExperimentConfig& c, Eigen::Index n, Eigen::Index k) {
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  if (c.rate.kind == "minimax") return std::pow(nd, -c.rate.value / (1.0 + 2.0 * c.rate.value));
  if (c.rate.kind == "k-over-sqrt-n") return kd / std::sqrt(nd);
  if (c.rate.kind == "constant") return c.rate.value;
  return std::sqrt(kd / nd);
}

Design build_design_for(const ExperimentConfig& c, Eigen::Index n, Eigen::Index k) {
  switch (c.model) {
    case ModelKind::gaussian_sequence: return build_identity_design(n, k);
    case ModelKind::fourier_regression: return build_fourier_design(n, k);
    case ModelKind::spline_regression: {
      const std::vector<double> pts = uniform_points(n);
      return build_bspline_design(pts, k, c.spline_order);
    }
  }
  throw ConfigError("unknown model");
}

Truth build_truth(const TruthConfig& t, Eigen::Index prefix_length) {
  if (t.truth_class == "holder") return make_holder_truth(t.name, t.alpha);
  const Eigen::Index J = t.prefix_length > 0 ? t.prefix_length : prefix_length;
  if (t.rule == "explicit") {
    std::vector<double> coeffs = t.coefficients;
    if (static_cast<Eigen::Index>(coeffs.size()) < J) coeffs.resize(static_cast<std::size_t>(J), 0.0);
    return make_sobolev_truth(t.alpha, t.radius, ExplicitCoefficients{std::move(coeffs)}, J);
  }
  return make_sobolev_truth(t.alpha, t.radius, PowerDecay{t.exponent}, J);
}

Truth build_truth_for(const ExperimentConfig& c) {
  Eigen::Index k_max = 1;
  for (std::size_t i = 0; i < c.n_grid.size(); ++i) k_max = std::max(k_max, k_for(c, i));
  return build_truth(c.truth, default_prefix_length(k_max));
}

PriorSpec build_prior(const ExperimentConfig& c, const Design& design) {
  const Eigen::Index n = design.n();
  const Eigen::Index k = design.k();
  const double sigma = sigma_for(c, n);
  switch (c.prior.kind) {
    case PriorConfig::Kind::isotropic_gaussian: return IsotropicGaussianPrior{tau_for(c, n)};
    case PriorConfig::Kind::coordinate_gaussian: {
      Eigen::VectorXd v(k);
      const Eigen::VectorXd g = design.gram().diagonal();
      for (Eigen::Index j = 0; j < k; ++j) {
        if (c.prior.variances_rule == "constant") {
          v[j] = c.prior.variance_value;
        } else if (2 * (j + 1) <= k) {
          v[j] = 1.0 / static_cast<double>(k);
        } else {
          // 4^alpha times the noise variance of coordinate j.
          v[j] = std::pow(4.0, c.prior.variances_alpha) * sigma * sigma / g[j];
        }
      }
      return CoordinateGaussianPrior{std::move(v)};
    }
    case PriorConfig::Kind::smooth: {
      SmoothPriorParams params = c.prior.params;
      if (c.prior.density == "gaussian-diag" && params.variances.size() != k) {
        throw ConfigError("gaussian-diag prior needs k variances");
      }
      return make_smooth_prior(c.prior.density, params);
    }
  }
  throw ConfigError("unknown prior kind");
}

FunctionalSpec build_functional(const ExperimentConfig& c, const Design& design) {
  if (!c.functional) throw ConfigError("no functional configured");
  const FunctionalConfig& f = *c.functional;
  if (f.kind == "quadratic-norm") return QuadraticNormFunctional{};
  if (f.kind == "theta-quadratic") return ThetaQuadraticFunctional{};
  const Eigen::Index n = design.n();
  if (!f.g) {
    return LinearFunctional{Eigen::MatrixXd::Constant(1, n, 1.0 / static_cast<double>(n))};
  }
  const Truth g = build_truth(*f.g, default_prefix_length(design.k()));
  return riemann_linear_functional(g, n);
}

}  // namespace bvm
