#pragma once

// Brute-force reference computations shared by the unit tests and the
// acceptance runner. Nothing here calls into the library's posterior code.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

struct GridPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Posterior moments of theta under the prior N(0, tau^2 (Phi^T Phi)^{-1})
/// and Y ~ N(Phi theta, sigma^2 I), by trapezoid integration of
/// prior x likelihood on a regular grid. Supports k = 1 and k = 2.
inline GridPosterior grid_bayes(const Eigen::MatrixXd& phi, double tau, double sigma,
                                const Eigen::VectorXd& y, int points = 801) {
  const Eigen::Index k = phi.cols();
  const Eigen::MatrixXd g = phi.transpose() * phi;
  const Eigen::VectorXd ls = g.ldlt().solve(phi.transpose() * y);
  const Eigen::VectorXd sd = (sigma * sigma * g.inverse().diagonal()).cwiseSqrt();

  std::vector<std::vector<double>> axes(static_cast<std::size_t>(k));
  std::vector<double> step(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) {
    const double lo = std::min(0.0, ls[j]) - 12.0 * sd[j];
    const double hi = std::max(0.0, ls[j]) + 12.0 * sd[j];
    step[j] = (hi - lo) / (points - 1);
    for (int i = 0; i < points; ++i) axes[j].push_back(lo + i * step[j]);
  }

  auto log_joint = [&](const Eigen::VectorXd& t) {
    const double prior = -0.5 * t.dot(g * t) / (tau * tau);
    const double lik = -0.5 * (y - phi * t).squaredNorm() / (sigma * sigma);
    return prior + lik;
  };
  // Shift by the log joint at the least-squares point to avoid underflow.
  const double shift = log_joint(ls);

  double z = 0.0;
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(k, k);
  Eigen::VectorXd t(k);
  auto weight = [&](int i) { return i == 0 || i == points - 1 ? 0.5 : 1.0; };
  if (k == 1) {
    for (int i = 0; i < points; ++i) {
      t[0] = axes[0][i];
      const double w = weight(i) * std::exp(log_joint(t) - shift);
      z += w;
      m1 += w * t;
      m2 += w * t * t.transpose();
    }
  } else {
    for (int i = 0; i < points; ++i) {
      for (int j = 0; j < points; ++j) {
        t[0] = axes[0][i];
        t[1] = axes[1][j];
        const double w = weight(i) * weight(j) * std::exp(log_joint(t) - shift);
        z += w;
        m1 += w * t;
        m2 += w * t * t.transpose();
      }
    }
  }
  GridPosterior out;
  out.mean = m1 / z;
  out.cov = m2 / z - out.mean * out.mean.transpose();
  return out;
}

}  // namespace oracle
