#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "bvm/design.hpp"

namespace bvm {

/// Fourier basis function phi_j (1-based) on [0, 1].
double fourier_basis(Eigen::Index j, double x);

/// Ellipsoid weight a_j: j^alpha for even j, (j-1)^alpha for odd j.
double sobolev_weight(Eigen::Index j, double alpha);

/// Coefficient sequence of a periodic Sobolev function f = sum theta_j phi_j,
/// stored as a finite prefix.
struct SobolevTruth {
  double alpha = 1.0;
  double radius = 1.0;  ///< L
  Eigen::VectorXd coeffs;
  Eigen::VectorXd a_weights;

  Eigen::Index prefix_length() const { return coeffs.size(); }
  /// sum_j a_j^2 theta_j^2
  double ellipsoid_sum() const;
  /// L^2 / pi^(2 alpha)
  double ellipsoid_bound() const;
  double operator()(double x) const;
  /// integral of f^2 over [0, 1] = sum theta_j^2
  double l2_norm_squared() const { return coeffs.squaredNorm(); }
};

/// Closed-form functions with a known Holder seminorm bound.
struct HolderTruth {
  std::string name;
  double alpha = 1.0;
  double seminorm_bound = 0.0;
  std::function<double(double)> evaluator;
  double l2_norm_squared = 0.0;  ///< integral of f^2 over [0, 1]

  double operator()(double x) const { return evaluator(x); }
};

using Truth = std::variant<SobolevTruth, HolderTruth>;

struct PowerDecay {
  double exponent;  ///< theta_j proportional to j^-exponent
};
struct ExplicitCoefficients {
  std::vector<double> values;
};
using DecayRule = std::variant<PowerDecay, ExplicitCoefficients>;

/// Power-decay coefficients are scaled so that the ellipsoid sum equals
/// 0.9 L^2 / pi^(2 alpha); explicit lists are stored as given after a
/// membership check.
SobolevTruth make_sobolev_truth(double alpha, double radius, const DecayRule& rule,
                                Eigen::Index prefix_length);

/// Default prefix length max(4k, 256).
Eigen::Index default_prefix_length(Eigen::Index k);

/// Catalogue: "abs-power" x -> |x - 1/2|^alpha (alpha <= 1),
/// "sine" x -> sin(2 pi x) (any alpha).
HolderTruth make_holder_truth(const std::string& name, double alpha);

/// The true mean vector F_0 under the model attached to the design family.
Eigen::VectorXd render_truth_vector(const Truth& truth, const Design& design);

/// ||F_0 - Sigma_Phi F_0||
double projection_bias(const Eigen::VectorXd& f0, const Design& design);

/// |(1/n) sum f(i/n) g(i/n) - integral f g| for Fourier-synthesised truths.
double riemann_bias(const Truth& f, const Truth& g, Eigen::Index n);

/// integral_0^1 f g for Fourier-synthesised truths (orthonormal coefficients).
double exact_inner_product(const Truth& f, const Truth& g);

/// integral_0^1 f^2
double truth_l2_norm_squared(const Truth& f);

/// Evaluates a truth at a point.
double evaluate_truth(const Truth& truth, double x);

}  // namespace bvm
