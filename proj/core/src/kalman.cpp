#include "lfd/kalman.hpp"

#include <algorithm>
#include <cmath>

namespace lfd {

NoiseModel NoiseModel::from_diagonals(const Vector6d& q, const Vector6d& r,
                                      NoiseUnits units) {
  if ((q.array() <= 0.0).any() || (r.array() <= 0.0).any()) {
    throw InvalidArgument("noise diagonals must be strictly positive");
  }
  NoiseModel n;
  if (units == NoiseUnits::Variance) {
    n.Q = q.asDiagonal();
    n.R = r.asDiagonal();
  } else {
    n.Q = q.array().square().matrix().asDiagonal();
    n.R = r.array().square().matrix().asDiagonal();
  }
  return n;
}

NoiseModel NoiseModel::defaults(NoiseUnits units) {
  Vector6d q, r;
  q << 0.25, 0.25, 0.25, 0.02, 0.02, 0.02;
  r << 0.35, 0.35, 0.35, 0.04, 0.04, 0.04;
  return from_diagonals(q, r, units);
}

void CommandLog::push(double t, const Pose& commanded_in_cam,
                      const Pose& odometry) {
  if (!entries_.empty() && !(t > entries_.back().t)) {
    throw InvalidArgument("command log timestamps must strictly increase");
  }
  entries_.push_back({t, commanded_in_cam, odometry});
  while (!entries_.empty() && entries_.front().t < t - horizon_) {
    entries_.pop_front();
  }
}

Pose CommandLog::lookup(double t, bool commanded) const {
  if (entries_.empty()) {
    throw LogHorizonExceeded("command log is empty");
  }
  const double eps = 1e-9;
  if (t < entries_.front().t - eps || t > entries_.back().t + eps) {
    throw LogHorizonExceeded("lookup time outside the retained horizon");
  }
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), t,
      [](const Entry& e, double value) { return e.t < value; });
  if (it == entries_.end()) it = std::prev(entries_.end());
  if (it == entries_.begin()) {
    return commanded ? it->commanded : it->odometry;
  }
  const Entry& hi = *it;
  const Entry& lo = *std::prev(it);
  const double span = hi.t - lo.t;
  const double s = span > 0.0 ? std::clamp((t - lo.t) / span, 0.0, 1.0) : 1.0;
  return commanded ? interpolate(lo.commanded, hi.commanded, s)
                   : interpolate(lo.odometry, hi.odometry, s);
}

Pose CommandLog::commanded_at(double t) const { return lookup(t, true); }
Pose CommandLog::odometry_at(double t) const { return lookup(t, false); }

FilterState predict(const FilterState& state, const Vector6d& last_command,
                    const NoiseModel& noise) {
  FilterState out;
  out.x = last_command;
  out.P = state.P + noise.Q;
  return out;
}

FilterState update(const FilterState& state, const Vector6d& z_hat,
                   const NoiseModel& noise) {
  const Matrix6d s = state.P + noise.R;
  const Matrix6d gain = state.P * s.inverse();

  Vector6d innovation = z_hat - state.x;
  for (int i = 3; i < 6; ++i) innovation[i] = wrap_angle(innovation[i]);

  FilterState out;
  out.x = state.x + gain * innovation;
  out.P = (Matrix6d::Identity() - gain) * state.P;
  out.P = 0.5 * (out.P + out.P.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix6d> eig(out.P);
  if (eig.eigenvalues().minCoeff() < -1e-9) {
    throw NonPsdCovariance("covariance update lost positive semidefiniteness");
  }
  return out;
}

Vector6d compensate(const DelayedMeasurement& m, const CommandLog& log) {
  const Transform z = Transform::from_vector6(m.z);
  const Transform odom_capture =
      Transform::from_pose(log.odometry_at(m.t_capture));
  const Transform odom_now =
      Transform::from_pose(log.odometry_at(m.t_delivery));
  const Transform advanced = compose(z, compose(inverse(odom_capture), odom_now));
  return advanced.to_vector6();
}

const FilterState& DualRateFilter::step(
    double clock, const CommandLog& log,
    std::deque<DelayedMeasurement>& pending) {
  while (!pending.empty() && pending.front().t_delivery <= clock + 1e-9) {
    const DelayedMeasurement m = pending.front();
    pending.pop_front();
    if (m.t_capture < last_capture_ - 1e-9) {
      throw LogHorizonExceeded(
          "measurement delivered out of capture order; refiltering is not supported");
    }
    last_capture_ = m.t_capture;
    const Vector6d z_hat = compensate_latency_ ? compensate(m, log) : m.z;
    const Vector6d x_star = log.commanded_at(m.t_delivery).to_vector6();
    state_ = predict(state_, x_star, noise_);
    state_ = update(state_, z_hat, noise_);
    ++updates_;
  }
  return state_;
}

Vector6d estimate_measurement_noise(
    std::span<const Vector6d> line_trajectory) {
  const std::size_t n = line_trajectory.size();
  if (n < 10) {
    throw TooFewSamples("noise estimation needs at least 10 samples");
  }

  Vector6d diag = Vector6d::Zero();

  // Translations: ordinary least squares against the sample index, one axis
  // at a time (the sweep is assumed steady, so index stands in for time).
  const double nn = static_cast<double>(n);
  double sx = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += static_cast<double>(i);
    sxx += static_cast<double>(i) * static_cast<double>(i);
  }
  const double denom = nn * sxx - sx * sx;
  for (int axis = 0; axis < 3; ++axis) {
    double sy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sy += line_trajectory[i][axis];
      sxy += static_cast<double>(i) * line_trajectory[i][axis];
    }
    const double slope = (nn * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / nn;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r =
          line_trajectory[i][axis] - (intercept + slope * static_cast<double>(i));
      ss += r * r;
    }
    diag[axis] = ss / (nn - 2.0);
  }

  // Rotations: constant fit about an unwrapped sequence.
  for (int axis = 3; axis < 6; ++axis) {
    std::vector<double> unwrapped(n);
    unwrapped[0] = line_trajectory[0][axis];
    for (std::size_t i = 1; i < n; ++i) {
      const double step =
          wrap_angle(line_trajectory[i][axis] - unwrapped[i - 1]);
      unwrapped[i] = unwrapped[i - 1] + step;
    }
    double mean = 0.0;
    for (double a : unwrapped) mean += a;
    mean /= nn;
    double ss = 0.0;
    for (double a : unwrapped) ss += (a - mean) * (a - mean);
    diag[axis] = ss / (nn - 1.0);
  }
  return diag;
}

}  // namespace lfd
