#pragma once

// Normal and chi-square distribution functions. Every exact total-variation
// formula in the library reduces to these.

namespace bvm::special {

double normal_cdf(double x);
/// Upper tail 1 - Phi(x), accurate for large x.
double normal_sf(double x);
double normal_pdf(double x);
/// Inverse of normal_cdf on (0, 1); returns -inf / +inf at 0 / 1.
double normal_quantile(double p);

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

double chi2_cdf(double dof, double x);
double chi2_sf(double dof, double x);

/// CDF of the noncentral chi-square law chi2_dof(noncentrality). Absolute
/// accuracy around 1e-14; use noncentral_chi2_sf for small upper tails.
double noncentral_chi2_cdf(double dof, double noncentrality, double x);
/// Upper tail with relative accuracy in the tail.
double noncentral_chi2_sf(double dof, double noncentrality, double x);

namespace detail {
// Exposed for cross-checking the two evaluation routes against each other.
double gamma_p_series(double a, double x);
double gamma_q_continued_fraction(double a, double x);
/// log(x^a e^-x / Gamma(a)), stable for large a.
double log_gamma_prefix(double a, double x);
}  // namespace detail

}  // namespace bvm::special
