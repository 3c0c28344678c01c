#pragma once

// Independent oracles used by the test suites. Everything here must stay
// decoupled from the implementation paths it checks: brute-force search,
// plain 4x4 matrix algebra, hand-written scalar formulas.

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <random>

#include "lfd/geometry.hpp"

namespace oracles {

/// Minimum accumulated cost over every monotone, boundary-anchored warp
/// path, by exhaustive recursion (no memoization, no DP sharing).
inline double brute_force_dtw_cost(
    std::size_t n, std::size_t m,
    const std::function<double(std::size_t, std::size_t)>& dist) {
  std::function<double(std::size_t, std::size_t)> walk =
      [&](std::size_t i, std::size_t j) -> double {
    const double here = dist(i, j);
    if (i == n - 1 && j == m - 1) return here;
    double best = std::numeric_limits<double>::infinity();
    if (i + 1 < n) best = std::min(best, walk(i + 1, j));
    if (j + 1 < m) best = std::min(best, walk(i, j + 1));
    if (i + 1 < n && j + 1 < m) best = std::min(best, walk(i + 1, j + 1));
    return here + best;
  };
  return walk(0, 0);
}

/// Conditional mean/covariance of a single joint Gaussian over (t, h),
/// written out with explicit scalar arithmetic.
struct ConditionalGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};
inline ConditionalGaussian condition_on_first(const Eigen::VectorXd& mu,
                                              const Eigen::MatrixXd& sigma,
                                              double t) {
  const int dh = static_cast<int>(mu.size()) - 1;
  ConditionalGaussian out;
  out.mean.resize(dh);
  out.cov.resize(dh, dh);
  const double var_t = sigma(0, 0);
  for (int i = 0; i < dh; ++i) {
    out.mean[i] = mu[i + 1] + sigma(i + 1, 0) / var_t * (t - mu[0]);
    for (int j = 0; j < dh; ++j) {
      out.cov(i, j) = sigma(i + 1, j + 1) - sigma(i + 1, 0) * sigma(0, j + 1) / var_t;
    }
  }
  return out;
}

/// Uniformly random rigid transform (rotation via random unit quaternion).
inline lfd::Transform random_rigid(std::mt19937_64& rng, double t_scale = 50.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Quaterniond q(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
  q.normalize();
  lfd::Transform t;
  t.rotation = q.toRotationMatrix();
  t.translation = {t_scale * gauss(rng), t_scale * gauss(rng),
                   t_scale * gauss(rng)};
  return t;
}

inline lfd::Pose random_pose(std::mt19937_64& rng, double t_scale = 50.0) {
  return random_rigid(rng, t_scale).to_pose();
}

/// 4x4 homogeneous-matrix product/inverse, the textbook route.
inline Eigen::Matrix4d mat4(const lfd::Transform& t) { return t.matrix(); }

}  // namespace oracles
