#include "bvm/functionals.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "bvm/errors.hpp"

namespace bvm {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double min_eigenvalue(const Eigen::MatrixXd& m) {
  return m.selfadjointView<Eigen::Lower>().eigenvalues().minCoeff();
}

void check_linear(const LinearFunctional& spec, const Design& design) {
  if (spec.matrix.cols() != design.n() || spec.matrix.rows() == 0) {
    throw InvalidDimension("linear functional must be p x n");
  }
}
}  // namespace

Eigen::Index functional_dimension(const FunctionalSpec& spec) {
  if (const auto* lin = std::get_if<LinearFunctional>(&spec)) return lin->matrix.rows();
  return 1;
}

Eigen::VectorXd functional_value(const FunctionalSpec& spec, const Design& design,
                                 const Eigen::VectorXd& f) {
  if (f.size() != design.n()) throw InvalidDimension("mean vector must have length n");
  return std::visit(
      overloaded{
          [&](const LinearFunctional& l) -> Eigen::VectorXd {
            check_linear(l, design);
            return l.matrix * f;
          },
          [&](const QuadraticNormFunctional&) -> Eigen::VectorXd {
            return Eigen::VectorXd::Constant(1, f.squaredNorm() / static_cast<double>(f.size()));
          },
          [&](const ThetaQuadraticFunctional&) -> Eigen::VectorXd {
            const Eigen::VectorXd theta = design.solve_gram(design.columns().transpose() * f);
            return Eigen::VectorXd::Constant(1, theta.squaredNorm());
          },
      },
      spec);
}

Eigen::VectorXd functional_value_theta(const FunctionalSpec& spec, const Design& design,
                                       const Eigen::VectorXd& theta) {
  if (theta.size() != design.k()) throw InvalidDimension("parameter must have length k");
  if (std::holds_alternative<ThetaQuadraticFunctional>(spec)) {
    return Eigen::VectorXd::Constant(1, theta.squaredNorm());
  }
  return functional_value(spec, design, design.columns() * theta);
}

LinearFunctional riemann_linear_functional(const Truth& g, Eigen::Index n) {
  if (n < 1) throw InvalidDimension("functional needs n >= 1");
  Eigen::MatrixXd row(1, n);
  const auto nd = static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    row(0, i) = evaluate_truth(g, static_cast<double>(i + 1) / nd) / nd;
  }
  return LinearFunctional{std::move(row)};
}

DeltaMethodQuantities delta_quantities(const FunctionalSpec& spec, const Design& design,
                                       double sigma, const Eigen::VectorXd& expansion_point,
                                       double radius) {
  if (!(sigma > 0.0)) throw InputError("noise sd must be positive");
  if (!(radius > 0.0)) throw InputError("radius must be positive");
  if (expansion_point.size() != design.n()) {
    throw InvalidDimension("expansion point must have length n");
  }
  const Eigen::VectorXd& f = expansion_point;
  const Eigen::VectorXd projected = design.apply_projection(f);
  if ((f - projected).norm() > 1e-8 * std::max(1.0, f.norm())) {
    throw ProjectionError("expansion point is not in the regressor span");
  }
  const Eigen::MatrixXd& phi = design.columns();
  const double s2 = sigma * sigma;
  const auto nd = static_cast<double>(design.n());

  DeltaMethodQuantities dq;
  dq.radius = radius;
  dq.sigma = sigma;
  std::visit(
      overloaded{
          [&](const LinearFunctional& l) {
            check_linear(l, design);
            dq.jacobian = l.matrix;
            const Eigen::MatrixXd gphi = l.matrix * phi;  // p x k
            const Eigen::MatrixXd solved = design.chol().solve(gphi.transpose());
            dq.gamma = s2 * gphi * solved;
            dq.b_bound = 0.0;
          },
          [&](const QuadraticNormFunctional&) {
            dq.jacobian = (2.0 / nd) * f.transpose();
            const Eigen::VectorXd jt = dq.jacobian.transpose();
            dq.gamma = Eigen::MatrixXd::Constant(1, 1, s2 * jt.dot(design.apply_projection(jt)));
            // D^2 G(h, h) = 2 ||h||^2 / n
            dq.b_bound = 2.0 * s2 * radius / nd;
          },
          [&](const ThetaQuadraticFunctional&) {
            const Eigen::VectorXd theta = design.solve_gram(phi.transpose() * f);
            dq.jacobian = 2.0 * theta.transpose();
            dq.gamma = Eigen::MatrixXd::Constant(1, 1, 4.0 * s2 * theta.dot(design.solve_gram(theta)));
            // h = Phi eta with eta^T G eta <= sigma^2 a, and D^2 G = 2 ||eta||^2.
            dq.b_bound = 2.0 * s2 * radius / min_eigenvalue(design.gram());
          },
      },
      spec);
  dq.gamma = 0.5 * (dq.gamma + dq.gamma.transpose()).eval();
  return dq;
}

FunctionalConditions check_functional_conditions(const DeltaMethodQuantities& dq, Eigen::Index k,
                                         double M) {
  if (!(M > 0.0)) throw InputError("M must be positive");
  FunctionalConditions report;
  const auto eig = dq.gamma.selfadjointView<Eigen::Lower>().eigenvalues();
  report.gamma_min_eigenvalue = eig.minCoeff();
  const double max_eig = eig.maxCoeff();
  report.nonsingular = max_eig > 0.0 && report.gamma_min_eigenvalue > 1e-12 * max_eig;
  const double b = dq.b_bound_at(M);
  report.b_ratio = report.nonsingular ? b * b / report.gamma_min_eigenvalue
                                      : std::numeric_limits<double>::infinity();
  report.k_over_M = static_cast<double>(k) / M;
  return report;
}

namespace {

// Covariance s (Phi^T Phi)^{-1}, if the descriptor is one.
bool gram_inverse_scale(const GaussianDist& d, const Design& design, double* s) {
  if (const auto* c = std::get_if<ScaledGramInverse>(&d.cov())) {
    *s = c->scale;
    return true;
  }
  double g = 0.0;
  if (!design.gram_is_scaled_identity(&g)) return false;
  const auto iso = d.isotropic_scale();
  if (!iso) return false;
  *s = *iso * g;
  return true;
}

Law1D draws_law(const FunctionalSpec& spec, const Design& design, const Eigen::VectorXd& b,
                const Eigen::MatrixXd& draws, std::vector<double> weights) {
  std::vector<double> values(static_cast<std::size_t>(draws.cols()));
  for (Eigen::Index i = 0; i < draws.cols(); ++i) {
    values[static_cast<std::size_t>(i)] =
        b.dot(functional_value_theta(spec, design, draws.col(i)));
  }
  return make_weighted_sample(std::move(values), std::move(weights));
}

}  // namespace

Law1D functional_posterior_1d(const FunctionalSpec& spec, const PosteriorHandle& posterior,
                              const Design& design, const Eigen::VectorXd& b,
                              const PushforwardOptions& options) {
  if (b.size() != functional_dimension(spec)) throw InvalidDimension("b must have length p");

  if (const auto* sample = std::get_if<PosteriorSample>(&posterior)) {
    const Eigen::VectorXd w = sample->weights();
    return draws_law(spec, design, b, sample->draws, std::vector<double>(w.data(), w.data() + w.size()));
  }
  const auto& gauss = std::get<GaussianDist>(posterior);
  if (gauss.dim() != design.k()) throw InvalidDimension("posterior dimension must be k");

  if (const auto* lin = std::get_if<LinearFunctional>(&spec)) {
    check_linear(*lin, design);
    const Eigen::VectorXd a = (b.transpose() * lin->matrix * design.columns()).transpose();
    const double mean = a.dot(gauss.mean());
    const double var = a.dot(gauss.covariance_matrix() * a);
    return NormalLaw{mean, std::sqrt(std::max(0.0, var))};
  }

  const double bb = b[0];
  double s = 0.0;
  if (std::holds_alternative<QuadraticNormFunctional>(spec) &&
      gram_inverse_scale(gauss, design, &s)) {
    // ||Phi theta||^2 / s ~ chi2_k(||Phi mu||^2 / s) when Cov = s G^{-1}.
    const double lambda = (design.columns() * gauss.mean()).squaredNorm() / s;
    const double scale = s / static_cast<double>(design.n());
    return ScaledNoncentralChi2Law{0.0, bb * scale, static_cast<double>(design.k()), lambda};
  }
  if (const auto iso = gauss.isotropic_scale();
      std::holds_alternative<ThetaQuadraticFunctional>(spec) && iso) {
    const double lambda = gauss.mean().squaredNorm() / *iso;
    return ScaledNoncentralChi2Law{0.0, bb * *iso, static_cast<double>(design.k()), lambda};
  }

  if (options.n_draws == 0) throw InputError("pushforward needs draws");
  Eigen::MatrixXd draws(gauss.dim(), static_cast<Eigen::Index>(options.n_draws));
  for (Eigen::Index i = 0; i < draws.cols(); ++i) {
    CounterRng rng(derive_seed(options.seed, {static_cast<std::uint64_t>(i)}));
    draws.col(i) = gauss.sample(rng);
  }
  return draws_law(spec, design, b, draws, {});
}

Law1D standardize(const Law1D& law, double center, const Eigen::MatrixXd& gamma,
                  const Eigen::VectorXd& b) {
  if (gamma.rows() != b.size() || gamma.cols() != b.size()) {
    throw InvalidDimension("Gamma and b dimensions differ");
  }
  const double var = b.dot(gamma * b);
  if (!(var > 0.0) || !std::isfinite(var)) {
    throw DegenerateScaleError("standardizing scale b^T Gamma b is zero");
  }
  const double scale = std::sqrt(var);
  return law_affine(law, -center / scale, 1.0 / scale);
}

CredibleInterval credible_interval(const Law1D& law, double level) {
  if (!(level > 0.0 && level < 1.0)) throw InputError("credible level must lie in (0, 1)");
  const double tail = 0.5 * (1.0 - level);
  CredibleInterval ci;
  ci.lo = law_quantile(law, tail);
  ci.hi = law_quantile(law, 1.0 - tail);
  ci.low_effective_size = law_effective_size(law) * tail < 10.0;
  return ci;
}

}  // namespace bvm
