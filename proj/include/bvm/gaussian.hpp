#pragma once

#include <Eigen/Dense>
#include <optional>
#include <variant>

#include "bvm/design.hpp"
#include "bvm/rng.hpp"

namespace bvm {

/// s I
struct ScaledIdentity {
  double scale;
};
/// s (Phi^T Phi)^{-1}
struct ScaledGramInverse {
  double scale;
  Design design;
};
struct DiagonalCov {
  Eigen::VectorXd variances;
};
struct FullCov {
  Eigen::MatrixXd matrix;
};
using CovarianceDescriptor = std::variant<ScaledIdentity, ScaledGramInverse, DiagonalCov, FullCov>;

/// Multivariate normal given by its mean and a structured covariance.
class GaussianDist {
 public:
  GaussianDist(Eigen::VectorXd mean, CovarianceDescriptor cov);

  const Eigen::VectorXd& mean() const { return mean_; }
  const CovarianceDescriptor& cov() const { return cov_; }
  Eigen::Index dim() const { return mean_.size(); }

  Eigen::MatrixXd covariance_matrix() const;
  double log_density(const Eigen::VectorXd& x) const;
  /// mean + A u with A A^T = covariance and u standard normal.
  Eigen::VectorXd sample(CounterRng& rng) const;
  /// A u for a given standard normal vector u.
  Eigen::VectorXd transform_standard(const Eigen::VectorXd& u) const;
  /// Mahalanobis form (x - mean)^T Cov^{-1} (x - mean).
  double mahalanobis_squared(const Eigen::VectorXd& x) const;
  double log_det_cov() const;
  /// s when the covariance equals s I (checked structurally, not numerically
  /// beyond the Gram-matrix and diagonal tests).
  std::optional<double> isotropic_scale() const;

 private:
  Eigen::VectorXd mean_;
  CovarianceDescriptor cov_;
  Eigen::LLT<Eigen::MatrixXd> full_chol_;  // only for FullCov
};

/// Fills a vector with independent standard normals.
Eigen::VectorXd standard_normal_vector(CounterRng& rng, Eigen::Index dim);

}  // namespace bvm
