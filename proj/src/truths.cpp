#include "bvm/truths.hpp"

#include <cmath>
#include <numbers>

#include "bvm/errors.hpp"

namespace bvm {

double fourier_basis(Eigen::Index j, double x) {
  if (j < 1) throw InvalidDimension("fourier basis index starts at 1");
  if (j == 1) return 1.0;
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(j / 2) * x;
  return std::numbers::sqrt2 * (j % 2 == 0 ? std::cos(angle) : std::sin(angle));
}

double sobolev_weight(Eigen::Index j, double alpha) {
  const auto base = static_cast<double>(j % 2 == 0 ? j : j - 1);
  return base == 0.0 ? 0.0 : std::pow(base, alpha);
}

double SobolevTruth::ellipsoid_sum() const {
  return (a_weights.array() * coeffs.array()).square().sum();
}

double SobolevTruth::ellipsoid_bound() const {
  return radius * radius / std::pow(std::numbers::pi, 2.0 * alpha);
}

double SobolevTruth::operator()(double x) const {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < coeffs.size(); ++j) {
    if (coeffs[j] != 0.0) sum += coeffs[j] * fourier_basis(j + 1, x);
  }
  return sum;
}

Eigen::Index default_prefix_length(Eigen::Index k) { return std::max<Eigen::Index>(4 * k, 256); }

SobolevTruth make_sobolev_truth(double alpha, double radius, const DecayRule& rule,
                                Eigen::Index prefix_length) {
  if (!(alpha > 0.0) || !(radius > 0.0)) {
    throw InputError("sobolev truth needs alpha > 0 and L > 0");
  }
  SobolevTruth truth;
  truth.alpha = alpha;
  truth.radius = radius;

  if (const auto* power = std::get_if<PowerDecay>(&rule)) {
    if (prefix_length < 1) throw InvalidDimension("sobolev truth needs a prefix length >= 1");
    // a_j^2 theta_j^2 ~ j^(2 alpha - 2 p) is summable iff p > alpha + 1/2.
    if (!(power->exponent > alpha + 0.5)) {
      throw MembershipError("power decay with exponent " + std::to_string(power->exponent) +
                            " leaves the Sobolev ellipsoid (needs exponent > alpha + 1/2)");
    }
    truth.coeffs.resize(prefix_length);
    for (Eigen::Index j = 0; j < prefix_length; ++j) {
      truth.coeffs[j] = std::pow(static_cast<double>(j + 1), -power->exponent);
    }
  } else {
    const auto& values = std::get<ExplicitCoefficients>(rule).values;
    if (values.empty()) throw InvalidDimension("explicit coefficient list is empty");
    truth.coeffs = Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                     static_cast<Eigen::Index>(values.size()));
  }
  if (!truth.coeffs.allFinite()) throw InputError("sobolev coefficients must be finite");

  truth.a_weights.resize(truth.coeffs.size());
  for (Eigen::Index j = 0; j < truth.coeffs.size(); ++j) {
    truth.a_weights[j] = sobolev_weight(j + 1, alpha);
  }

  if (std::holds_alternative<PowerDecay>(rule)) {
    const double sum = truth.ellipsoid_sum();
    if (sum > 0.0) truth.coeffs *= std::sqrt(0.9 * truth.ellipsoid_bound() / sum);
  } else if (truth.ellipsoid_sum() > truth.ellipsoid_bound()) {
    throw MembershipError("explicit coefficients lie outside the Sobolev ellipsoid");
  }
  return truth;
}

HolderTruth make_holder_truth(const std::string& name, double alpha) {
  if (!(alpha > 0.0)) throw InputError("holder truth needs alpha > 0");
  HolderTruth truth;
  truth.name = name;
  truth.alpha = alpha;
  if (name == "abs-power") {
    if (alpha > 1.0) throw UnsupportedError("abs-power truth is only catalogued for alpha <= 1");
    // ||a|^alpha - |b|^alpha| <= |a - b|^alpha
    truth.seminorm_bound = 1.0;
    truth.evaluator = [alpha](double x) { return std::pow(std::abs(x - 0.5), alpha); };
    truth.l2_norm_squared = std::pow(0.5, 2.0 * alpha) / (2.0 * alpha + 1.0);
  } else if (name == "sine") {
    // Interpolating the two bounds 2 (2 pi)^a0 and (2 pi)^(a0+1) |x - x'| on
    // the a0-th derivative gives 2 (2 pi)^alpha.
    truth.seminorm_bound = 2.0 * std::pow(2.0 * std::numbers::pi, alpha);
    truth.evaluator = [](double x) { return std::sin(2.0 * std::numbers::pi * x); };
    truth.l2_norm_squared = 0.5;
  } else {
    throw UnsupportedError("unknown holder truth '" + name + "'");
  }
  return truth;
}

double evaluate_truth(const Truth& truth, double x) {
  return std::visit([x](const auto& t) { return t(x); }, truth);
}

Eigen::VectorXd render_truth_vector(const Truth& truth, const Design& design) {
  const Eigen::Index n = design.n();
  const Eigen::Index k = design.k();
  if (const auto* sob = std::get_if<SobolevTruth>(&truth)) {
    if (sob->prefix_length() < k) {
      throw TruncationError("truth prefix of length " + std::to_string(sob->prefix_length()) +
                                " is shorter than k = " + std::to_string(k),
                            static_cast<std::size_t>(k));
    }
  }
  if (design.family() == DesignFamily::identity) {
    const auto* sob = std::get_if<SobolevTruth>(&truth);
    if (!sob) throw UnsupportedError("identity designs take coefficient-sequence truths");
    Eigen::VectorXd f0 = Eigen::VectorXd::Zero(n);
    const Eigen::Index m = std::min(n, sob->prefix_length());
    f0.head(m) = sob->coeffs.head(m);
    return f0;
  }
  const auto& pts = design.points();
  if (static_cast<Eigen::Index>(pts.size()) != n) {
    throw UnsupportedError("design has no design points to evaluate the truth at");
  }
  Eigen::VectorXd f0(n);
  for (Eigen::Index i = 0; i < n; ++i) f0[i] = evaluate_truth(truth, pts[i]);
  return f0;
}

double projection_bias(const Eigen::VectorXd& f0, const Design& design) {
  if (f0.size() != design.n()) throw InvalidDimension("projection_bias: wrong vector length");
  return (f0 - design.apply_projection(f0)).norm();
}

double exact_inner_product(const Truth& f, const Truth& g) {
  const auto* fs = std::get_if<SobolevTruth>(&f);
  const auto* gs = std::get_if<SobolevTruth>(&g);
  if (!fs || !gs) {
    throw UnsupportedError("closed-form integral only available for Fourier-synthesised truths");
  }
  const Eigen::Index m = std::min(fs->prefix_length(), gs->prefix_length());
  return fs->coeffs.head(m).dot(gs->coeffs.head(m));
}

double truth_l2_norm_squared(const Truth& f) {
  if (const auto* s = std::get_if<SobolevTruth>(&f)) return s->l2_norm_squared();
  return std::get<HolderTruth>(f).l2_norm_squared;
}

double riemann_bias(const Truth& f, const Truth& g, Eigen::Index n) {
  if (n < 1) throw InvalidDimension("riemann_bias needs n >= 1");
  const double exact = exact_inner_product(f, g);
  double sum = 0.0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(n);
    sum += evaluate_truth(f, x) * evaluate_truth(g, x);
  }
  return std::abs(sum / static_cast<double>(n) - exact);
}

}  // namespace bvm
