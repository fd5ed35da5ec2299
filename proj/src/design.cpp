#include "bvm/design.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "bvm/errors.hpp"

namespace bvm {

namespace {

constexpr double kPivotTolerance = 1e-10;

void require_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw InputError(std::string(what) + " contains non-finite entries");
}

}  // namespace

std::string_view to_string(DesignFamily family) {
  switch (family) {
    case DesignFamily::identity: return "identity";
    case DesignFamily::fourier: return "fourier";
    case DesignFamily::bspline: return "bspline";
    case DesignFamily::custom: return "custom";
  }
  return "unknown";
}

Design::Design(DesignFamily family, Eigen::MatrixXd columns, std::vector<double> points,
               int spline_order) {
  if (columns.cols() == 0 || columns.rows() == 0) {
    throw InvalidDimension("design needs at least one row and one column");
  }
  if (columns.cols() > columns.rows()) {
    throw InvalidDimension("design has more columns (" + std::to_string(columns.cols()) +
                           ") than rows (" + std::to_string(columns.rows()) + ")");
  }
  if (!columns.allFinite()) throw InputError("design matrix contains non-finite entries");

  auto state = std::make_shared<State>();
  state->family = family;
  state->points = std::move(points);
  state->spline_order = spline_order;
  const Eigen::Index k = columns.cols();
  state->gram = Eigen::MatrixXd::Zero(k, k);
  state->gram.selfadjointView<Eigen::Lower>().rankUpdate(columns.transpose());
  state->gram.triangularView<Eigen::StrictlyUpper>() =
      state->gram.transpose().triangularView<Eigen::StrictlyUpper>();
  state->columns = std::move(columns);

  state->chol.compute(state->gram);
  const double max_diag = state->gram.diagonal().maxCoeff();
  bool ok = state->chol.info() == Eigen::Success && max_diag > 0.0;
  if (ok) {
    const Eigen::VectorXd pivots = state->chol.matrixLLT().diagonal();
    ok = (pivots.array().square() >= kPivotTolerance * max_diag).all();
  }
  if (!ok) throw RankError("design matrix is not of full column rank");
  state_ = std::move(state);
}

Eigen::VectorXd Design::solve_gram(const Eigen::VectorXd& v) const {
  return state_->chol.solve(v);
}

Eigen::VectorXd Design::apply_projection(const Eigen::VectorXd& v) const {
  return state_->columns * solve_gram(state_->columns.transpose() * v);
}

Eigen::MatrixXd Design::projection_matrix(Eigen::Index max_n) const {
  if (n() > max_n) {
    throw PreconditionViolation("projection_matrix: n = " + std::to_string(n()) +
                                " exceeds the dense limit; use apply_projection");
  }
  const Eigen::MatrixXd& phi = state_->columns;
  return phi * state_->chol.solve(phi.transpose());
}

double Design::log_det_gram() const {
  return 2.0 * state_->chol.matrixLLT().diagonal().array().log().sum();
}

bool Design::gram_is_scaled_identity(double* scale, double rel_tol) const {
  const Eigen::MatrixXd& g = state_->gram;
  const double c = g.diagonal().mean();
  const double dev = (g - c * Eigen::MatrixXd::Identity(k(), k())).cwiseAbs().maxCoeff();
  if (scale) *scale = c;
  return dev <= rel_tol * c;
}

std::vector<double> uniform_points(Eigen::Index n) {
  std::vector<double> pts(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) pts[i] = static_cast<double>(i + 1) / static_cast<double>(n);
  return pts;
}

Design build_identity_design(Eigen::Index n, Eigen::Index k) {
  if (k < 1 || k > n) {
    throw InvalidDimension("identity design needs 1 <= k <= n (got n = " + std::to_string(n) +
                           ", k = " + std::to_string(k) + ")");
  }
  return Design(DesignFamily::identity, Eigen::MatrixXd::Identity(n, k), {}, 0);
}

Design build_fourier_design(Eigen::Index n, Eigen::Index k) {
  if (k < 1 || n < 1) throw InvalidDimension("fourier design needs n >= 1 and k >= 1");
  if (k > n) {
    throw InvalidDimension("fourier design needs k <= n (got n = " + std::to_string(n) +
                           ", k = " + std::to_string(k) + ")");
  }
  if (n % 2 == 0 && k == n) {
    throw PreconditionViolation("fourier design with even n requires k <= n - 1");
  }
  std::vector<double> pts = uniform_points(n);
  Eigen::MatrixXd phi(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = pts[i];
    phi(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < k; ++j) {
      // Column j (0-based) is phi_{j+1}: even index j+1 = 2m -> cosine.
      const Eigen::Index m = (j + 1) / 2;
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(m) * x;
      phi(i, j) = std::numbers::sqrt2 * ((j + 1) % 2 == 0 ? std::cos(angle) : std::sin(angle));
    }
  }
  return Design(DesignFamily::fourier, std::move(phi), std::move(pts), 0);
}

std::vector<double> clamped_uniform_knots(int q, Eigen::Index spans) {
  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(2 * q + spans - 1));
  for (int i = 0; i < q; ++i) knots.push_back(0.0);
  for (Eigen::Index j = 1; j < spans; ++j) {
    knots.push_back(static_cast<double>(j) / static_cast<double>(spans));
  }
  for (int i = 0; i < q; ++i) knots.push_back(1.0);
  return knots;
}

Eigen::VectorXd bspline_basis(const std::vector<double>& knots, int q, double x) {
  const auto count = static_cast<Eigen::Index>(knots.size()) - q;
  Eigen::VectorXd values = Eigen::VectorXd::Zero(count);
  const int p = q - 1;
  // Span s with knots[s] <= x < knots[s+1], right-continuous; x at the right
  // end belongs to the last non-degenerate span.
  Eigen::Index s;
  if (x >= knots[count]) {
    s = count - 1;
  } else {
    const auto it = std::upper_bound(knots.begin() + p, knots.begin() + count + 1, x);
    s = std::max<Eigen::Index>(p, static_cast<Eigen::Index>(it - knots.begin()) - 1);
  }
  std::vector<double> n_vals(static_cast<std::size_t>(q), 0.0);
  std::vector<double> left(static_cast<std::size_t>(q), 0.0);
  std::vector<double> right(static_cast<std::size_t>(q), 0.0);
  n_vals[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - knots[s + 1 - j];
    right[j] = knots[s + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = n_vals[r] / (right[r + 1] + left[j - r]);
      n_vals[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    n_vals[j] = saved;
  }
  for (int r = 0; r <= p; ++r) values[s - p + r] = n_vals[r];
  return values;
}

Design build_bspline_design(std::span<const double> points, Eigen::Index k, int q) {
  if (q < 1 || k < q) throw InvalidDimension("bspline design needs k >= q >= 1");
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < k) throw InvalidDimension("bspline design needs at least k design points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i]) || points[i] < 0.0 || points[i] > 1.0) {
      throw InputError("bspline design points must lie in [0, 1]");
    }
    if (i > 0 && points[i] < points[i - 1]) {
      throw InputError("bspline design points must be sorted increasingly");
    }
  }
  const Eigen::Index spans = k + 1 - q;
  const std::vector<double> knots = clamped_uniform_knots(q, spans);
  Eigen::MatrixXd phi(n, k);
  for (Eigen::Index i = 0; i < n; ++i) phi.row(i) = bspline_basis(knots, q, points[i]).transpose();

  try {
    return Design(DesignFamily::bspline, std::move(phi),
                  std::vector<double>(points.begin(), points.end()), q);
  } catch (const RankError&) {
    std::vector<Eigen::Index> occupancy(static_cast<std::size_t>(spans), 0);
    for (double x : points) {
      auto s = static_cast<Eigen::Index>(std::floor(x * static_cast<double>(spans)));
      occupancy[static_cast<std::size_t>(std::clamp<Eigen::Index>(s, 0, spans - 1))]++;
    }
    std::ostringstream msg;
    msg << "rank-deficient B-spline design";
    bool first = true;
    for (Eigen::Index s = 0; s < spans; ++s) {
      if (occupancy[s] > 0) continue;
      msg << (first ? ": empty knot span " : ", ") << "[" << static_cast<double>(s) / spans << ", "
          << static_cast<double>(s + 1) / spans << (s + 1 == spans ? "]" : ")");
      first = false;
    }
    if (first) msg << ": too few distinct design points per span";
    throw RankError(msg.str());
  }
}

Design build_custom_design(Eigen::MatrixXd columns) {
  return Design(DesignFamily::custom, std::move(columns), {}, 0);
}

ProjectionOutput project(const Design& design, const Eigen::VectorXd& y) {
  if (y.size() != design.n()) throw InvalidDimension("project: y has the wrong length");
  require_finite(y, "observation vector");
  ProjectionOutput out;
  out.theta_hat = design.solve_gram(design.columns().transpose() * y);
  out.f_proj = design.columns() * out.theta_hat;
  return out;
}

std::pair<double, double> design_regularity_ratio(const Design& design) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(design.gram(), Eigen::EigenvaluesOnly);
  const double factor = static_cast<double>(design.k()) / static_cast<double>(design.n());
  return {factor * eig.eigenvalues().minCoeff(), factor * eig.eigenvalues().maxCoeff()};
}

}  // namespace bvm
