#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "lfd/errors.hpp"

namespace lfd {

/// Gaussian mixture over (time, pose) rows. Dimension is carried at runtime
/// (7 for the trajectory models, arbitrary for tests).
struct Gmm {
  Eigen::VectorXd priors;                   // sums to 1
  std::vector<Eigen::VectorXd> means;       // M x dim
  std::vector<Eigen::MatrixXd> covariances; // M x dim x dim, SPD

  int components() const { return static_cast<int>(priors.size()); }
  int dim() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }

  /// Checks priors sum to 1 within 1e-12, M >= 1 and every covariance is SPD
  /// (Cholesky succeeds). Throws on violation.
  void validate() const;

  /// Mixture log density of one row.
  double log_density(const Eigen::VectorXd& x) const;
};

struct FitOptions {
  int max_iterations = 300;
  double loglik_tolerance = 1e-8;   // stop when the gain drops below this
  double regularization = 1e-6;     // diagonal floor, escalates x10 per rescue
  int max_rescues = 3;              // per component, for the whole fit
};

struct FitResult {
  Gmm model;
  std::vector<double> loglik;  // one entry per EM iteration (E-step value)
  int iterations = 0;
  bool converged = false;
  int rescues = 0;
};

/// EM fit from a deterministic time-quantile initialization (rows are sorted
/// by the first column and split into M contiguous bins). The seed is part of
/// the interface for stochastic initializers; the default initializer ignores
/// it. Requires rows > dim * components.
///
/// Components whose covariance loses positive definiteness get a diagonal
/// floor; after max_rescues the fit aborts with SingularComponent. A fit
/// never reports convergence on an iteration whose M-step needed a rescue.
FitResult fit_gmm(const Eigen::MatrixXd& data, int components,
                  std::uint64_t seed, const FitOptions& options = {});

/// Picks the component count maximizing mean held-out per-sample
/// log-likelihood over k folds (seeded shuffle); ties go to the smaller M.
int select_components(const Eigen::MatrixXd& data,
                      const std::vector<int>& candidates, int folds,
                      std::uint64_t seed, const FitOptions& options = {});

struct GmrResult {
  Eigen::VectorXd mean;             // dim-1
  Eigen::MatrixXd covariance;       // (dim-1) x (dim-1), full conditional
  Eigen::VectorXd responsibilities; // per component, sums to 1
};

/// Gaussian mixture regression: conditions the mixture on the first
/// coordinate. The covariance includes the between-component mean spread.
GmrResult gmr(const Gmm& gmm, double t);

}  // namespace lfd
