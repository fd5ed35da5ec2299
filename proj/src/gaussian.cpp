#include "bvm/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "bvm/errors.hpp"

namespace bvm {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kLogTwoPi = 1.8378770664093454836;
}  // namespace

Eigen::VectorXd standard_normal_vector(CounterRng& rng, Eigen::Index dim) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd u(dim);
  for (Eigen::Index i = 0; i < dim; ++i) u[i] = normal(rng);
  return u;
}

GaussianDist::GaussianDist(Eigen::VectorXd mean, CovarianceDescriptor cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (mean_.size() == 0) throw InvalidDimension("gaussian needs dimension >= 1");
  const Eigen::Index m = mean_.size();
  std::visit(overloaded{
                 [&](const ScaledIdentity& c) {
                   if (!(c.scale > 0.0)) throw InputError("covariance scale must be > 0");
                 },
                 [&](const ScaledGramInverse& c) {
                   if (!(c.scale > 0.0)) throw InputError("covariance scale must be > 0");
                   if (c.design.k() != m) throw InvalidDimension("covariance dimension mismatch");
                 },
                 [&](const DiagonalCov& c) {
                   if (c.variances.size() != m) {
                     throw InvalidDimension("covariance dimension mismatch");
                   }
                   if (!(c.variances.array() > 0.0).all()) {
                     throw InputError("diagonal variances must be > 0");
                   }
                 },
                 [&](const FullCov& c) {
                   if (c.matrix.rows() != m || c.matrix.cols() != m) {
                     throw InvalidDimension("covariance dimension mismatch");
                   }
                   full_chol_.compute(c.matrix);
                   if (full_chol_.info() != Eigen::Success) {
                     throw InputError("covariance matrix is not positive definite");
                   }
                 },
             },
             cov_);
}

Eigen::MatrixXd GaussianDist::covariance_matrix() const {
  const Eigen::Index m = dim();
  return std::visit(
      overloaded{
          [&](const ScaledIdentity& c) -> Eigen::MatrixXd {
            return c.scale * Eigen::MatrixXd::Identity(m, m);
          },
          [&](const ScaledGramInverse& c) -> Eigen::MatrixXd {
            return c.scale * c.design.chol().solve(Eigen::MatrixXd::Identity(m, m));
          },
          [&](const DiagonalCov& c) -> Eigen::MatrixXd { return c.variances.asDiagonal(); },
          [&](const FullCov& c) -> Eigen::MatrixXd { return c.matrix; },
      },
      cov_);
}

double GaussianDist::mahalanobis_squared(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw InvalidDimension("point dimension mismatch");
  const Eigen::VectorXd d = x - mean_;
  return std::visit(
      overloaded{
          [&](const ScaledIdentity& c) { return d.squaredNorm() / c.scale; },
          // d^T G d / s = ||L^T d||^2 / s
          [&](const ScaledGramInverse& c) {
            const Eigen::VectorXd v = c.design.chol().matrixU() * d;
            return v.squaredNorm() / c.scale;
          },
          [&](const DiagonalCov& c) { return (d.array().square() / c.variances.array()).sum(); },
          [&](const FullCov&) {
            const Eigen::VectorXd v = full_chol_.matrixL().solve(d);
            return v.squaredNorm();
          },
      },
      cov_);
}

double GaussianDist::log_det_cov() const {
  const auto m = static_cast<double>(dim());
  return std::visit(
      overloaded{
          [&](const ScaledIdentity& c) { return m * std::log(c.scale); },
          [&](const ScaledGramInverse& c) {
            return m * std::log(c.scale) - c.design.log_det_gram();
          },
          [&](const DiagonalCov& c) { return c.variances.array().log().sum(); },
          [&](const FullCov&) {
            return 2.0 * full_chol_.matrixLLT().diagonal().array().log().sum();
          },
      },
      cov_);
}

double GaussianDist::log_density(const Eigen::VectorXd& x) const {
  return -0.5 * (static_cast<double>(dim()) * kLogTwoPi + log_det_cov() + mahalanobis_squared(x));
}

Eigen::VectorXd GaussianDist::transform_standard(const Eigen::VectorXd& u) const {
  if (u.size() != dim()) throw InvalidDimension("standard vector dimension mismatch");
  return std::visit(
      overloaded{
          [&](const ScaledIdentity& c) -> Eigen::VectorXd { return std::sqrt(c.scale) * u; },
          // Cov = s L^{-T} L^{-1}, so A = sqrt(s) L^{-T}.
          [&](const ScaledGramInverse& c) -> Eigen::VectorXd {
            return std::sqrt(c.scale) * c.design.chol().matrixU().solve(u);
          },
          [&](const DiagonalCov& c) -> Eigen::VectorXd {
            return c.variances.array().sqrt() * u.array();
          },
          [&](const FullCov&) -> Eigen::VectorXd { return full_chol_.matrixL() * u; },
      },
      cov_);
}

std::optional<double> GaussianDist::isotropic_scale() const {
  if (const auto* c = std::get_if<ScaledIdentity>(&cov_)) return c->scale;
  if (const auto* c = std::get_if<ScaledGramInverse>(&cov_)) {
    double g = 0.0;
    if (!c->design.gram_is_scaled_identity(&g)) return std::nullopt;
    return c->scale / g;
  }
  if (const auto* c = std::get_if<DiagonalCov>(&cov_)) {
    const double first = c->variances[0];
    if ((c->variances.array() - first).abs().maxCoeff() > 1e-12 * first) return std::nullopt;
    return first;
  }
  return std::nullopt;
}

Eigen::VectorXd GaussianDist::sample(CounterRng& rng) const {
  return mean_ + transform_standard(standard_normal_vector(rng, dim()));
}

}  // namespace bvm
