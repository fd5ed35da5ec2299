#include <doctest.h>

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <cmath>
#include <vector>

#include "bvm/errors.hpp"
#include "bvm/law1d.hpp"
#include "bvm/special_functions.hpp"

using namespace bvm;

TEST_CASE("weighted sample law") {
  const WeightedSampleLaw s = make_weighted_sample({3.0, 1.0, 2.0}, {1.0, 2.0, 1.0});
  CHECK(s.values == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(s.weights[0] == doctest::Approx(0.5));
  CHECK(law_cdf(s, 1.0) == doctest::Approx(0.5));
  CHECK(law_cdf_left(s, 1.0) == 0.0);
  CHECK(law_cdf(s, 2.5) == doctest::Approx(0.75));
  CHECK(law_quantile(s, 0.5) == 1.0);
  CHECK(law_quantile(s, 0.51) == 2.0);
  CHECK(law_mean(s) == doctest::Approx(1.75));
  CHECK(law_effective_size(s) == doctest::Approx(1.0 / (0.25 + 0.0625 + 0.0625)));
  CHECK_FALSE(law_is_continuous(s));
  CHECK_THROWS_AS(make_weighted_sample({}), InputError);
  CHECK_THROWS_AS(make_weighted_sample({1.0}, {-1.0}), InputError);
}

TEST_CASE("normal law") {
  const NormalLaw n{1.0, 2.0};
  CHECK(law_cdf(n, 1.0) == doctest::Approx(0.5));
  CHECK(law_quantile(n, 0.975) == doctest::Approx(1.0 + 2.0 * 1.959963984540054));
  const Law1D m = law_affine(n, 3.0, -0.5);
  CHECK(std::get<NormalLaw>(m).mean == doctest::Approx(2.5));
  CHECK(std::get<NormalLaw>(m).sd == doctest::Approx(1.0));
  // Point mass.
  const NormalLaw pm{0.0, 0.0};
  CHECK(law_cdf(pm, 0.0) == 1.0);
  CHECK(law_cdf_left(pm, 0.0) == 0.0);
  CHECK_FALSE(law_is_continuous(pm));
}

TEST_CASE("scaled noncentral chi-square law") {
  const ScaledNoncentralChi2Law l{1.0, 2.0, 5.0, 3.0};
  const boost::math::non_central_chi_squared_distribution<double> nc(5.0, 3.0);
  for (double x : {2.0, 8.0, 20.0, 40.0}) {
    CHECK(law_cdf(l, x) == doctest::Approx(boost::math::cdf(nc, (x - 1.0) / 2.0)).epsilon(1e-10));
  }
  CHECK(law_mean(l) == doctest::Approx(1.0 + 2.0 * 8.0));
  // Negative scale flips the law.
  const Law1D neg = law_affine(l, 0.0, -1.0);
  CHECK(law_cdf(neg, -17.0) == doctest::Approx(1.0 - law_cdf(l, 17.0)).epsilon(1e-12));
  for (double p : {0.01, 0.3, 0.5, 0.9, 0.999}) {
    CHECK(noncentral_chi2_quantile(5.0, 3.0, p) ==
          doctest::Approx(boost::math::quantile(nc, p)).epsilon(1e-8));
    CHECK(law_cdf(l, law_quantile(l, p)) == doctest::Approx(p).epsilon(1e-9));
    CHECK(law_cdf(neg, law_quantile(neg, p)) == doctest::Approx(p).epsilon(1e-9));
  }
}

TEST_CASE("grid points") {
  const auto g = law_grid_points(NormalLaw{0.0, 1.0}, 8);
  CHECK(g.size() == 8);
  CHECK(g.front() == doctest::Approx(special::normal_quantile(1.0 / 16.0)));
  CHECK(std::is_sorted(g.begin(), g.end()));
}
