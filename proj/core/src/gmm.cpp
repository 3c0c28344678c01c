#include "lfd/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace lfd {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)

/// Cholesky wrapper that reports failure instead of asserting.
bool cholesky(const Eigen::MatrixXd& m, Eigen::LLT<Eigen::MatrixXd>& llt) {
  llt.compute(m);
  return llt.info() == Eigen::Success;
}

double log_gaussian(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                    const Eigen::LLT<Eigen::MatrixXd>& llt) {
  const int d = static_cast<int>(x.size());
  const Eigen::VectorXd diff = x - mean;
  const Eigen::VectorXd y = llt.matrixL().solve(diff);
  double logdet = 0.0;
  for (int i = 0; i < d; ++i) logdet += std::log(llt.matrixL()(i, i));
  return -0.5 * (d * kLog2Pi + y.squaredNorm()) - logdet;
}

}  // namespace

void Gmm::validate() const {
  if (components() < 1) throw InvalidArgument("mixture needs >= 1 component");
  if (std::abs(priors.sum() - 1.0) > 1e-12) {
    throw InvalidArgument("mixture priors do not sum to 1");
  }
  Eigen::LLT<Eigen::MatrixXd> llt;
  for (const auto& cov : covariances) {
    if (!cholesky(cov, llt)) {
      throw SingularComponent("mixture covariance is not positive definite");
    }
  }
}

namespace {

std::vector<Eigen::LLT<Eigen::MatrixXd>> factorize(const Gmm& g) {
  std::vector<Eigen::LLT<Eigen::MatrixXd>> llts(g.components());
  for (int m = 0; m < g.components(); ++m) {
    if (!cholesky(g.covariances[m], llts[m])) {
      throw SingularComponent("mixture covariance is not positive definite");
    }
  }
  return llts;
}

double log_density_with(const Gmm& g,
                        const std::vector<Eigen::LLT<Eigen::MatrixXd>>& llts,
                        const Eigen::VectorXd& x) {
  double max_term = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd terms(g.components());
  for (int m = 0; m < g.components(); ++m) {
    terms[m] = std::log(g.priors[m]) + log_gaussian(x, g.means[m], llts[m]);
    max_term = std::max(max_term, terms[m]);
  }
  double sum = 0.0;
  for (int m = 0; m < g.components(); ++m) {
    sum += std::exp(terms[m] - max_term);
  }
  return max_term + std::log(sum);
}

}  // namespace

double Gmm::log_density(const Eigen::VectorXd& x) const {
  return log_density_with(*this, factorize(*this), x);
}

namespace {

/// Regularization bookkeeping for one component. Once a component has needed
/// the diagonal floor it keeps receiving it every M-step (a rank-deficient
/// trajectory manifold stays rank-deficient); only genuine degeneracy spends
/// the escalation budget: a covariance with no spread at all, or one that
/// stays non-SPD at the current floor level.
struct ComponentGuard {
  int level = 0;    // current floor = regularization * 10^(level-1)
  int strikes = 0;  // escalations consumed

  /// Returns true when this call had to strike (the fit must not report
  /// convergence off such an M-step). Throws past the budget.
  bool ensure_spd(Eigen::MatrixXd& cov, const FitOptions& opt) {
    bool struck = false;
    auto strike = [&] {
      struck = true;
      if (++strikes > opt.max_rescues) {
        throw SingularComponent(
            "component covariance stayed singular after regularization");
      }
    };
    if (cov.trace() < 1e-12) strike();  // zero spread in every dimension
    if (level > 0) {
      cov += opt.regularization * std::pow(10.0, level - 1) *
             Eigen::MatrixXd::Identity(cov.rows(), cov.cols());
    }
    Eigen::LLT<Eigen::MatrixXd> llt;
    while (!cholesky(cov, llt)) {
      strike();
      ++level;
      cov += opt.regularization * std::pow(10.0, level - 1) *
             Eigen::MatrixXd::Identity(cov.rows(), cov.cols());
    }
    return struck;
  }
};

}  // namespace

FitResult fit_gmm(const Eigen::MatrixXd& data, int components,
                  std::uint64_t seed, const FitOptions& options) {
  (void)seed;  // the quantile initializer is deterministic
  const int n = static_cast<int>(data.rows());
  const int d = static_cast<int>(data.cols());
  if (components < 1) throw InvalidArgument("component count must be >= 1");
  if (n <= d * components) {
    throw InvalidArgument("need more than dim * components samples");
  }

  FitResult result;
  Gmm& g = result.model;
  g.priors = Eigen::VectorXd::Constant(components, 1.0 / components);
  g.means.assign(components, Eigen::VectorXd::Zero(d));
  g.covariances.assign(components, Eigen::MatrixXd::Zero(d, d));
  std::vector<ComponentGuard> guards(components);

  // Initialization: sort rows by the time axis (column 0) and cut into M
  // contiguous quantile bins; trajectories are time-indexed so this lands
  // close to the final responsibility structure and is label-stable.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return data(a, 0) < data(b, 0); });
  for (int m = 0; m < components; ++m) {
    const int lo = m * n / components;
    const int hi = (m + 1) * n / components;
    const int cnt = hi - lo;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (int i = lo; i < hi; ++i) mean += data.row(order[i]).transpose();
    mean /= cnt;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (int i = lo; i < hi; ++i) {
      const Eigen::VectorXd diff = data.row(order[i]).transpose() - mean;
      cov += diff * diff.transpose();
    }
    cov /= cnt;
    g.priors[m] = static_cast<double>(cnt) / n;
    g.means[m] = mean;
    guards[m].ensure_spd(cov, options);
    g.covariances[m] = cov;
  }

  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::MatrixXd resp(n, components);
  double prev_loglik = -std::numeric_limits<double>::infinity();
  bool last_mstep_rescued = false;

  for (int it = 0; it < options.max_iterations; ++it) {
    // E step (and the log-likelihood of the current parameters), batched
    // per component: one triangular solve covers every row.
    for (int m = 0; m < components; ++m) {
      if (!cholesky(g.covariances[m], llt)) {
        throw SingularComponent("covariance lost positive definiteness");
      }
      double logdet = 0.0;
      for (int i = 0; i < d; ++i) logdet += std::log(llt.matrixL()(i, i));
      const Eigen::MatrixXd centered =
          data.rowwise() - g.means[m].transpose();
      const Eigen::MatrixXd y = llt.matrixL().solve(centered.transpose());
      resp.col(m) =
          (-0.5 * (d * kLog2Pi + y.colwise().squaredNorm().array()) - logdet +
           std::log(g.priors[m]))
              .transpose();
    }
    const Eigen::VectorXd max_term = resp.rowwise().maxCoeff();
    const Eigen::VectorXd lse =
        ((resp.colwise() - max_term).array().exp().rowwise().sum().log() +
         max_term.array())
            .matrix();
    const double loglik = lse.sum();
    resp = (resp.colwise() - lse).array().exp();
    result.loglik.push_back(loglik);
    result.iterations = it + 1;

    // A rescued covariance is not a stationary point, so convergence only
    // counts when the previous M-step went through clean.
    if (it > 0 && !last_mstep_rescued &&
        loglik - prev_loglik < options.loglik_tolerance) {
      result.converged = true;
      break;
    }
    prev_loglik = loglik;

    // M step.
    last_mstep_rescued = false;
    for (int m = 0; m < components; ++m) {
      const double nm = resp.col(m).sum();
      if (nm < 1e-12) {
        throw SingularComponent("component starved of responsibility");
      }
      const Eigen::VectorXd mean = data.transpose() * resp.col(m) / nm;
      const Eigen::MatrixXd centered = data.rowwise() - mean.transpose();
      Eigen::MatrixXd cov =
          centered.transpose() *
          (centered.array().colwise() * resp.col(m).array()).matrix() / nm;
      cov = 0.5 * (cov + cov.transpose());
      if (guards[m].ensure_spd(cov, options)) last_mstep_rescued = true;
      g.priors[m] = nm / n;
      g.means[m] = mean;
      g.covariances[m] = cov;
    }
  }

  for (const auto& guard : guards) result.rescues += guard.strikes;
  g.priors /= g.priors.sum();  // keep the exact-sum invariant
  return result;
}

int select_components(const Eigen::MatrixXd& data,
                      const std::vector<int>& candidates, int folds,
                      std::uint64_t seed, const FitOptions& options) {
  const int n = static_cast<int>(data.rows());
  const int d = static_cast<int>(data.cols());
  if (candidates.empty()) throw InvalidArgument("no candidate counts given");
  if (folds < 2) throw InvalidArgument("cross validation needs >= 2 folds");
  if (n < folds) throw InvalidArgument("fewer samples than folds");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<int> sorted = candidates;
  std::sort(sorted.begin(), sorted.end());

  int best_m = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int m : sorted) {
    double score = 0.0;
    for (int f = 0; f < folds; ++f) {
      const int lo = f * n / folds;
      const int hi = (f + 1) * n / folds;
      const int n_held = hi - lo;
      Eigen::MatrixXd train(n - n_held, d);
      Eigen::MatrixXd held(n_held, d);
      int ti = 0, hi_i = 0;
      for (int i = 0; i < n; ++i) {
        if (i >= lo && i < hi) {
          held.row(hi_i++) = data.row(order[i]);
        } else {
          train.row(ti++) = data.row(order[i]);
        }
      }
      const FitResult fit = fit_gmm(train, m, seed, options);
      const auto llts = factorize(fit.model);
      double ll = 0.0;
      for (int i = 0; i < n_held; ++i) {
        ll += log_density_with(fit.model, llts, held.row(i).transpose());
      }
      score += ll / n_held;
    }
    score /= folds;
    if (score > best_score) {  // strict: ties keep the smaller M
      best_score = score;
      best_m = m;
    }
  }
  return best_m;
}

GmrResult gmr(const Gmm& gmm, double t) {
  const int d = gmm.dim();
  if (d < 2) throw InvalidArgument("regression needs dim >= 2");
  const int dh = d - 1;
  const int m_count = gmm.components();

  GmrResult out;
  out.responsibilities = Eigen::VectorXd(m_count);
  std::vector<Eigen::VectorXd> cond_mean(m_count);
  std::vector<Eigen::MatrixXd> cond_cov(m_count);

  // Component weights from the marginal density of t, computed in log space
  // so far-from-data queries stay well defined.
  Eigen::VectorXd log_w(m_count);
  double max_log_w = -std::numeric_limits<double>::infinity();
  for (int m = 0; m < m_count; ++m) {
    const double mu_t = gmm.means[m][0];
    const double var_t = gmm.covariances[m](0, 0);
    if (var_t <= 0.0) throw SingularComponent("non-positive time variance");
    const double z = t - mu_t;
    log_w[m] = std::log(gmm.priors[m]) -
               0.5 * (kLog2Pi + std::log(var_t) + z * z / var_t);
    max_log_w = std::max(max_log_w, log_w[m]);

    const Eigen::VectorXd mu_h = gmm.means[m].tail(dh);
    const Eigen::VectorXd sigma_ht = gmm.covariances[m].block(1, 0, dh, 1);
    const Eigen::MatrixXd sigma_hh = gmm.covariances[m].block(1, 1, dh, dh);
    cond_mean[m] = mu_h + sigma_ht * (z / var_t);
    cond_cov[m] = sigma_hh - (sigma_ht * sigma_ht.transpose()) / var_t;
  }
  double sum_w = 0.0;
  for (int m = 0; m < m_count; ++m) {
    out.responsibilities[m] = std::exp(log_w[m] - max_log_w);
    sum_w += out.responsibilities[m];
  }
  out.responsibilities /= sum_w;

  out.mean = Eigen::VectorXd::Zero(dh);
  for (int m = 0; m < m_count; ++m) {
    out.mean += out.responsibilities[m] * cond_mean[m];
  }
  // Full conditional mixture covariance, mean-spread term included.
  out.covariance = Eigen::MatrixXd::Zero(dh, dh);
  for (int m = 0; m < m_count; ++m) {
    const Eigen::VectorXd dm = cond_mean[m] - out.mean;
    out.covariance +=
        out.responsibilities[m] * (cond_cov[m] + dm * dm.transpose());
  }
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  return out;
}

}  // namespace lfd
