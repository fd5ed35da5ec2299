#pragma once

#include <cstddef>
#include <variant>
#include <vector>

namespace bvm {

/// N(mean, sd^2); sd = 0 is a point mass.
struct NormalLaw {
  double mean = 0.0;
  double sd = 1.0;
};

/// Discrete law on sorted support points with normalized weights.
struct WeightedSampleLaw {
  std::vector<double> values;
  std::vector<double> weights;
  std::vector<double> cumulative;  ///< cumulative[i] = sum of weights[0..i]
};

/// offset + scale * X with X ~ chi2_dof(noncentrality). scale may be negative;
/// scale = 0 is a point mass at offset.
struct ScaledNoncentralChi2Law {
  double offset = 0.0;
  double scale = 1.0;
  double dof = 1.0;
  double noncentrality = 0.0;
};

using Law1D = std::variant<NormalLaw, WeightedSampleLaw, ScaledNoncentralChi2Law>;

/// Sorts the draws and normalizes the weights (equal weights when empty).
WeightedSampleLaw make_weighted_sample(std::vector<double> values,
                                       std::vector<double> weights = {});

/// P(X <= x)
double law_cdf(const Law1D& law, double x);
/// P(X < x)
double law_cdf_left(const Law1D& law, double x);
/// Smallest x with P(X <= x) >= p.
double law_quantile(const Law1D& law, double p);
/// Law of a + b X.
Law1D law_affine(const Law1D& law, double a, double b);
bool law_is_continuous(const Law1D& law);
/// Kish effective sample size for weighted samples; infinity for analytic laws.
double law_effective_size(const Law1D& law);
double law_mean(const Law1D& law);

/// Quantiles at (i + 1/2) / count for continuous laws; the support points for
/// samples.
std::vector<double> law_grid_points(const Law1D& law, std::size_t count = 512);

/// Quantile of chi2_dof(noncentrality).
double noncentral_chi2_quantile(double dof, double noncentrality, double p);

}  // namespace bvm
