#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <variant>

#include "bvm/bayes.hpp"
#include "bvm/design.hpp"
#include "bvm/gaussian.hpp"
#include "bvm/law1d.hpp"
#include "bvm/truths.hpp"

namespace bvm {

/// F -> G F for a p x n matrix G.
struct LinearFunctional {
  Eigen::MatrixXd matrix;
};
/// F -> ||F||^2 / n
struct QuadraticNormFunctional {};
/// F -> theta^T theta with theta = (Phi^T Phi)^{-1} Phi^T F.
struct ThetaQuadraticFunctional {};

using FunctionalSpec = std::variant<LinearFunctional, QuadraticNormFunctional,
                                    ThetaQuadraticFunctional>;

Eigen::Index functional_dimension(const FunctionalSpec& spec);

/// G(F) for a mean vector F of length n.
Eigen::VectorXd functional_value(const FunctionalSpec& spec, const Design& design,
                                 const Eigen::VectorXd& f);
/// G(Phi theta)
Eigen::VectorXd functional_value_theta(const FunctionalSpec& spec, const Design& design,
                                       const Eigen::VectorXd& theta);

/// 1 x n matrix with entries g(i/n) / n.
LinearFunctional riemann_linear_functional(const Truth& g, Eigen::Index n);

struct DeltaMethodQuantities {
  Eigen::MatrixXd gamma;     ///< sigma^2 Gdot Sigma_Phi Gdot^T
  double b_bound = 0.0;      ///< sup of ||D^2 G(h, h)|| over ||h||^2 <= sigma^2 a in the span
  double radius = 0.0;       ///< a
  Eigen::MatrixXd jacobian;  ///< p x n, or 1 x k for the theta functional
  double sigma = 0.0;

  /// b_bound at another radius; B is linear in a for every supported kind.
  double b_bound_at(double a) const { return radius > 0.0 ? b_bound * a / radius : 0.0; }
};

/// Derivative quantities at an expansion point in the regressor span.
DeltaMethodQuantities delta_quantities(const FunctionalSpec& spec, const Design& design,
                                       double sigma, const Eigen::VectorXd& expansion_point,
                                       double radius);

struct FunctionalConditions {
  double gamma_min_eigenvalue = 0.0;
  bool nonsingular = false;
  double b_ratio = 0.0;  ///< B(M)^2 ||Gamma^{-1}||
  double k_over_M = 0.0;
};
FunctionalConditions check_functional_conditions(const DeltaMethodQuantities& dq, Eigen::Index k,
                                         double M);

using PosteriorHandle = std::variant<GaussianDist, PosteriorSample>;

struct PushforwardOptions {
  std::size_t n_draws = 20000;  ///< when the pushforward has no closed form
  std::uint64_t seed = 0;
};

/// Law of b^T G(F) under the posterior. Closed forms: linear functionals of
/// Gaussian posteriors (normal), quadratic functionals of Gaussian posteriors
/// whose covariance is a multiple of the matching metric (scaled noncentral
/// chi-square). Everything else goes through posterior draws.
Law1D functional_posterior_1d(const FunctionalSpec& spec, const PosteriorHandle& posterior,
                              const Design& design, const Eigen::VectorXd& b,
                              const PushforwardOptions& options = {});

/// Law of (X - center) / sqrt(b^T Gamma b).
Law1D standardize(const Law1D& law, double center, const Eigen::MatrixXd& gamma,
                  const Eigen::VectorXd& b);

struct CredibleInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool low_effective_size = false;
};

/// Equal-tailed interval. Flags weighted samples with fewer than ten
/// effective draws in either tail.
CredibleInterval credible_interval(const Law1D& law, double level);

}  // namespace bvm
