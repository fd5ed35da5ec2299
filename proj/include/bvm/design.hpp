#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <memory>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace bvm {

enum class DesignFamily { identity, fourier, bspline, custom };

std::string_view to_string(DesignFamily family);

/// The n x k regressor matrix Phi together with its Gram matrix Phi^T Phi and
/// the Cholesky factor of the Gram matrix.
///
/// Immutable after construction. Copies share the underlying storage, so a
/// Design can be passed around by value and handed to concurrent workers.
class Design {
 public:
  Eigen::Index n() const { return state_->columns.rows(); }
  Eigen::Index k() const { return state_->columns.cols(); }
  DesignFamily family() const { return state_->family; }

  const Eigen::MatrixXd& columns() const { return state_->columns; }
  const Eigen::MatrixXd& gram() const { return state_->gram; }
  /// Lower-triangular L with L L^T = Phi^T Phi.
  Eigen::MatrixXd chol_factor() const { return state_->chol.matrixL(); }
  const Eigen::LLT<Eigen::MatrixXd>& chol() const { return state_->chol; }

  /// Design points x_i (fourier and bspline families); empty otherwise.
  const std::vector<double>& points() const { return state_->points; }
  /// Spline order q (bspline family only; 0 otherwise).
  int spline_order() const { return state_->spline_order; }

  /// (Phi^T Phi)^{-1} v
  Eigen::VectorXd solve_gram(const Eigen::VectorXd& v) const;
  /// Sigma_Phi v, computed as Phi (Phi^T Phi)^{-1} Phi^T v.
  Eigen::VectorXd apply_projection(const Eigen::VectorXd& v) const;
  /// Dense Sigma_Phi. Refuses n above max_n; use apply_projection instead.
  Eigen::MatrixXd projection_matrix(Eigen::Index max_n = 2048) const;

  double log_det_gram() const;
  /// True when Phi^T Phi = c I within rel_tol; writes c.
  bool gram_is_scaled_identity(double* scale = nullptr, double rel_tol = 1e-9) const;

  /// Internal constructor; use the build_* functions.
  Design(DesignFamily family, Eigen::MatrixXd columns, std::vector<double> points,
         int spline_order);

 private:
  struct State {
    DesignFamily family;
    Eigen::MatrixXd columns;
    Eigen::MatrixXd gram;
    Eigen::LLT<Eigen::MatrixXd> chol;
    std::vector<double> points;
    int spline_order = 0;
  };
  std::shared_ptr<const State> state_;
};

struct ProjectionOutput {
  Eigen::VectorXd theta_hat;  ///< (Phi^T Phi)^{-1} Phi^T y
  Eigen::VectorXd f_proj;     ///< Phi theta_hat
};

/// First k columns of the n x n identity.
Design build_identity_design(Eigen::Index n, Eigen::Index k);

/// Trigonometric regressors on x_i = i/n:
/// phi_1 = 1, phi_{2m} = sqrt2 cos(2 pi m x), phi_{2m+1} = sqrt2 sin(2 pi m x).
/// Requires k <= n for odd n and k <= n - 1 for even n (the range where the
/// Gram matrix equals n I).
Design build_fourier_design(Eigen::Index n, Eigen::Index k);

/// Order-q B-spline basis on the uniform partition of (0, 1] into
/// K = k + 1 - q spans, clamped knots, evaluated at the given points.
Design build_bspline_design(std::span<const double> points, Eigen::Index k, int q);

Design build_custom_design(Eigen::MatrixXd columns);

/// Points i/n, i = 1..n.
std::vector<double> uniform_points(Eigen::Index n);

/// Clamped uniform knot vector for order q and K spans.
std::vector<double> clamped_uniform_knots(int q, Eigen::Index spans);

/// All order-q B-spline values at x for the given knots (Cox-de Boor).
Eigen::VectorXd bspline_basis(const std::vector<double>& knots, int q, double x);

ProjectionOutput project(const Design& design, const Eigen::VectorXd& y);

/// Smallest and largest eigenvalues of (k/n) Phi^T Phi.
std::pair<double, double> design_regularity_ratio(const Design& design);

}  // namespace bvm
