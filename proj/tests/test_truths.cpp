#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "bvm/design.hpp"
#include "bvm/errors.hpp"
#include "bvm/truths.hpp"

using namespace bvm;

namespace {

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto m = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

std::vector<double> bias_over_k(const SobolevTruth& t, Eigen::Index n,
                                const std::vector<double>& ks) {
  std::vector<double> out;
  for (double k : ks) {
    const Design d = build_fourier_design(n, static_cast<Eigen::Index>(k));
    out.push_back(projection_bias(render_truth_vector(t, d), d));
  }
  return out;
}

}  // namespace

TEST_CASE("sobolev weights") {
  CHECK(sobolev_weight(1, 1.0) == 0.0);
  CHECK(sobolev_weight(2, 1.0) == 2.0);
  CHECK(sobolev_weight(3, 1.0) == 2.0);
  CHECK(sobolev_weight(5, 2.0) == 16.0);
}

TEST_CASE("make_sobolev_truth examples") {
  // a_1 = 0, so any first coefficient is admissible.
  const SobolevTruth t =
      make_sobolev_truth(1.0, std::numbers::pi, ExplicitCoefficients{{1.0, 0.0, 0.0}}, 3);
  CHECK(t.coeffs[0] == 1.0);
  CHECK(t.ellipsoid_sum() == 0.0);

  const SobolevTruth p2 = make_sobolev_truth(1.0, 1.0, PowerDecay{2.0}, 64);
  double oracle = 0.0;
  for (Eigen::Index j = 1; j <= 64; ++j) {
    const double a = j % 2 == 0 ? static_cast<double>(j) : static_cast<double>(j - 1);
    oracle += a * a * p2.coeffs[j - 1] * p2.coeffs[j - 1];
  }
  CHECK(oracle == doctest::Approx(0.9 / (std::numbers::pi * std::numbers::pi)).epsilon(1e-12));
  // Power decay shape is preserved by the scaling.
  CHECK(p2.coeffs[3] / p2.coeffs[1] == doctest::Approx(0.25));

  CHECK_THROWS_AS(make_sobolev_truth(1.0, 1.0, PowerDecay{1.2}, 64), MembershipError);
  CHECK_THROWS_AS(make_sobolev_truth(1.0, 1.0, ExplicitCoefficients{{0.0, 5.0}}, 2),
                  MembershipError);
  CHECK_THROWS_AS(make_sobolev_truth(-1.0, 1.0, PowerDecay{2.0}, 64), InputError);
}

TEST_CASE("power decay partial sums diverge below the threshold") {
  // Oracle: with theta_j = j^-1.2 and alpha = 1 the partial ellipsoid sums
  // grow without bound, roughly like J^0.6.
  auto partial = [](Eigen::Index J) {
    double s = 0.0;
    for (Eigen::Index j = 1; j <= J; ++j) {
      const double a = j % 2 == 0 ? static_cast<double>(j) : static_cast<double>(j - 1);
      s += a * a * std::pow(static_cast<double>(j), -2.4);
    }
    return s;
  };
  CHECK(partial(1 << 16) > 3.5 * partial(1 << 12));
}

TEST_CASE("render_truth_vector examples") {
  const SobolevTruth t =
      make_sobolev_truth(1.0, 100.0, ExplicitCoefficients{{1.0, 2.0, 3.0, 0.0}}, 4);
  const Eigen::VectorXd f = render_truth_vector(t, build_identity_design(3, 3));
  CHECK(f.isApprox(Eigen::Vector3d(1, 2, 3)));

  const SobolevTruth e1 = make_sobolev_truth(1.0, 1.0, ExplicitCoefficients{{1.0}}, 1);
  CHECK(render_truth_vector(e1, build_fourier_design(7, 1)).isApprox(Eigen::VectorXd::Ones(7)));

  const SobolevTruth e2 = make_sobolev_truth(1.0, 10.0, ExplicitCoefficients{{0.0, 1.0}}, 2);
  const Eigen::VectorXd f2 = render_truth_vector(e2, build_fourier_design(5, 1));
  for (Eigen::Index i = 0; i < 5; ++i) {
    const double x = static_cast<double>(i + 1) / 5.0;
    CHECK(f2[i] == doctest::Approx(std::sqrt(2.0) * std::cos(2.0 * std::numbers::pi * x)));
  }
  CHECK_THROWS_AS(render_truth_vector(e2, build_identity_design(5, 3)), TruncationError);
}

TEST_CASE("projection bias") {
  const SobolevTruth t =
      make_sobolev_truth(1.0, 10.0, ExplicitCoefficients{{0.3, -0.2, 0.1, 0.05, 0.0}}, 5);
  const Design d = build_fourier_design(33, 5);
  CHECK(projection_bias(render_truth_vector(t, d), d) < 1e-9);

  const Eigen::VectorXd in_span = d.columns() * Eigen::VectorXd::LinSpaced(5, 1.0, 2.0);
  CHECK(projection_bias(in_span, d) < 1e-9);

  // Nested designs: bias is nonincreasing in k.
  const SobolevTruth p = make_sobolev_truth(1.0, 1.0, PowerDecay{1.8}, 512);
  double prev = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 1; k <= 101; k += 4) {
    const Design dk = build_fourier_design(257, k);
    const double b = projection_bias(render_truth_vector(p, dk), dk);
    CHECK(b <= prev + 1e-12);
    prev = b;
  }
}

TEST_CASE("projection bias rate against k") {
  const std::vector<double> ks{8, 16, 32};
  // With theta_j ~ j^-p the squared tail sum is of order k^(1 - 2p), so the
  // log-log slope is about 1/2 - p. A truth close to the boundary of the
  // alpha = 1 ellipsoid gives the slope of the worst case in the class.
  const SobolevTruth boundary = make_sobolev_truth(1.0, 1.0, PowerDecay{1.6}, 4096);
  const double s_boundary = slope(ks, bias_over_k(boundary, 513, ks));
  CHECK(s_boundary >= -1.2);
  CHECK(s_boundary <= -0.8);

  // Smoother members of the class converge faster than the worst case.
  const SobolevTruth smooth = make_sobolev_truth(1.0, 1.0, PowerDecay{2.0}, 4096);
  const double s_smooth = slope(ks, bias_over_k(smooth, 513, ks));
  CHECK(s_smooth == doctest::Approx(-1.5).epsilon(0.1));
}

TEST_CASE("fourier coefficients round trip") {
  const SobolevTruth t = make_sobolev_truth(1.0, 1.0, PowerDecay{2.0}, 8);
  const Design d = build_fourier_design(65, 8);
  const Eigen::VectorXd f0 = render_truth_vector(t, d);
  const Eigen::VectorXd back = d.columns().transpose() * f0 / 65.0;
  CHECK((back - t.coeffs).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("empirical norm approaches the L2 norm") {
  const SobolevTruth t = make_sobolev_truth(1.0, 1.0, PowerDecay{2.0}, 256);
  double prev = std::numeric_limits<double>::infinity();
  for (Eigen::Index n : {64, 256, 1024, 4096}) {
    const Design d = build_fourier_design(n, 1);
    const Eigen::VectorXd f0 = render_truth_vector(t, d);
    const double gap = std::abs(f0.squaredNorm() / static_cast<double>(n) - t.l2_norm_squared());
    CHECK(gap <= prev);
    prev = gap;
  }
  CHECK(prev < 1e-6);
}

TEST_CASE("riemann bias") {
  const SobolevTruth one = make_sobolev_truth(1.0, 1.0, ExplicitCoefficients{{1.0}}, 1);
  CHECK(riemann_bias(one, one, 17) < 1e-14);

  const SobolevTruth phi2 = make_sobolev_truth(1.0, 10.0, ExplicitCoefficients{{0.0, 1.0}}, 2);
  for (Eigen::Index n : {3, 4, 5, 10, 64}) {
    double oracle = 0.0;
    for (Eigen::Index i = 1; i <= n; ++i) {
      const double c = std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
      oracle += 2.0 * c * c;
    }
    oracle = std::abs(oracle / static_cast<double>(n) - 1.0);
    CHECK(riemann_bias(phi2, phi2, n) == doctest::Approx(oracle));
    CHECK(riemann_bias(phi2, phi2, n) < 1e-12);
  }

  // The discrete sum aliases frequencies above n; the aliasing error decays
  // with n at the smoothness rate.
  const SobolevTruth f = make_sobolev_truth(1.0, 1.0, PowerDecay{1.6}, 1 << 14);
  const SobolevTruth g = make_sobolev_truth(1.0, 1.0, PowerDecay{1.7}, 1 << 14);
  std::vector<double> ns{64, 128, 256, 512};
  std::vector<double> errs;
  for (double n : ns) errs.push_back(riemann_bias(f, g, static_cast<Eigen::Index>(n)));
  CHECK(slope(ns, errs) <= -0.8);

  const HolderTruth h = make_holder_truth("sine", 1.0);
  CHECK_THROWS_AS(riemann_bias(h, one, 16), UnsupportedError);
}

TEST_CASE("holder catalogue") {
  const HolderTruth a = make_holder_truth("abs-power", 0.5);
  CHECK(a(0.5) == 0.0);
  CHECK(a(0.75) == doctest::Approx(0.5));
  CHECK(a.seminorm_bound == 1.0);
  // Midpoint-rule oracle for the L2 norm.
  double integral = 0.0;
  const int m = 200000;
  for (int i = 0; i < m; ++i) {
    const double x = (i + 0.5) / m;
    integral += a(x) * a(x) / m;
  }
  CHECK(a.l2_norm_squared == doctest::Approx(integral).epsilon(1e-6));
  CHECK_THROWS_AS(make_holder_truth("abs-power", 1.5), UnsupportedError);
  CHECK_THROWS_AS(make_holder_truth("nope", 1.0), UnsupportedError);

  const HolderTruth s = make_holder_truth("sine", 2.0);
  CHECK(s(0.25) == doctest::Approx(1.0));
  CHECK(truth_l2_norm_squared(s) == doctest::Approx(0.5));
  const Eigen::VectorXd f = render_truth_vector(s, build_fourier_design(8, 3));
  CHECK(f[1] == doctest::Approx(1.0));
}
