#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "bvm/design.hpp"
#include "bvm/errors.hpp"
#include "bvm/gaussian.hpp"
#include "bvm/rng.hpp"

using namespace bvm;

namespace {

double dense_log_density(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                         const Eigen::VectorXd& x) {
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  const Eigen::VectorXd d = x - mean;
  const double q = d.dot(ldlt.solve(d));
  const double logdet = ldlt.vectorD().array().log().sum();
  return -0.5 * (q + logdet + static_cast<double>(mean.size()) * std::log(2.0 * std::numbers::pi));
}

}  // namespace

TEST_CASE("log density matches a dense oracle for each descriptor") {
  const Design d = build_bspline_design(uniform_points(40), 5, 3);
  const Eigen::VectorXd mean = Eigen::VectorXd::LinSpaced(5, -1.0, 1.0);
  Eigen::MatrixXd full = Eigen::MatrixXd::Identity(5, 5);
  full(0, 1) = full(1, 0) = 0.3;
  const Eigen::VectorXd diag = Eigen::VectorXd::LinSpaced(5, 0.5, 2.0);
  const std::vector<CovarianceDescriptor> covs{ScaledIdentity{0.7}, ScaledGramInverse{0.2, d},
                                               DiagonalCov{diag}, FullCov{full}};
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(5, 0.4);
  for (const auto& c : covs) {
    const GaussianDist g(mean, c);
    const Eigen::MatrixXd m = g.covariance_matrix();
    CHECK(g.log_density(x) == doctest::Approx(dense_log_density(mean, m, x)).epsilon(1e-12));
    CHECK(g.log_det_cov() == doctest::Approx(std::log(m.determinant())).epsilon(1e-12));
  }
  CHECK(GaussianDist(mean, ScaledGramInverse{0.2, d}).covariance_matrix().isApprox(
      0.2 * d.gram().inverse()));
}

TEST_CASE("descriptor validation") {
  CHECK_THROWS_AS(GaussianDist(Eigen::VectorXd::Zero(3), ScaledIdentity{0.0}), InputError);
  CHECK_THROWS_AS(GaussianDist(Eigen::VectorXd::Zero(3), DiagonalCov{Eigen::VectorXd::Ones(2)}),
                  InvalidDimension);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(2, 2);
  bad(0, 0) = -1.0;
  CHECK_THROWS_AS(GaussianDist(Eigen::VectorXd::Zero(2), FullCov{bad}), InputError);
}

TEST_CASE("isotropic scale") {
  CHECK(*GaussianDist(Eigen::VectorXd::Zero(3), ScaledIdentity{2.0}).isotropic_scale() == 2.0);
  const Design f = build_fourier_design(9, 3);
  CHECK(*GaussianDist(Eigen::VectorXd::Zero(3), ScaledGramInverse{9.0, f}).isotropic_scale() ==
        doctest::Approx(1.0));
  CHECK_FALSE(GaussianDist(Eigen::VectorXd::Zero(2), DiagonalCov{Eigen::Vector2d(1, 2)})
                  .isotropic_scale()
                  .has_value());
}

TEST_CASE("sample moments") {
  const Design d = build_bspline_design(uniform_points(30), 4, 2);
  const Eigen::VectorXd mean = Eigen::Vector4d(1, -1, 0.5, 2);
  const GaussianDist g(mean, ScaledGramInverse{0.5, d});
  const int n = 40000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(4);
  Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(4, 4);
  for (int i = 0; i < n; ++i) {
    CounterRng rng(derive_seed(3, {static_cast<std::uint64_t>(i)}));
    const Eigen::VectorXd x = g.sample(rng) - mean;
    sum += x;
    outer += x * x.transpose();
  }
  const Eigen::MatrixXd cov = g.covariance_matrix();
  const Eigen::VectorXd se = (cov.diagonal() / n).cwiseSqrt();
  CHECK(((sum / n).cwiseAbs().array() < 4.0 * se.array()).all());
  const Eigen::MatrixXd emp = outer / n;
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      const double tol = 5.0 * std::sqrt((cov(i, i) * cov(j, j) + cov(i, j) * cov(i, j)) / n);
      CHECK(std::abs(emp(i, j) - cov(i, j)) < tol);
    }
  }
}

TEST_CASE("mahalanobis form of the transform") {
  const Design d = build_bspline_design(uniform_points(30), 4, 2);
  const GaussianDist g(Eigen::VectorXd::Zero(4), ScaledGramInverse{0.5, d});
  const Eigen::VectorXd u = Eigen::Vector4d(0.3, -1.2, 0.8, 0.1);
  CHECK(g.mahalanobis_squared(g.transform_standard(u)) == doctest::Approx(u.squaredNorm()));
}

TEST_CASE("rng streams are reproducible and distinct") {
  CounterRng a(derive_seed(1, {2, 3}));
  CounterRng b(derive_seed(1, {2, 3}));
  CounterRng c(derive_seed(1, {3, 2}));
  const auto first = a();
  CHECK(first == b());
  CHECK(first != c());
  CHECK(derive_seed(0, {0}) != derive_seed(0, {1}));
  CHECK(standard_normal_vector(a, 3).size() == 3);
}
