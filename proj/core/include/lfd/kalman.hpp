#pragma once

#include <deque>
#include <span>

#include "lfd/geometry.hpp"

namespace lfd {

/// Filter state over the 6-vector pose [x,y,z (mm), alpha,beta,theta (rad)].
/// State transition and measurement matrices are identity, so everything
/// reduces to additions and a 6x6 gain.
struct FilterState {
  Vector6d x = Vector6d::Zero();
  Matrix6d P = Matrix6d::Zero();
};

enum class NoiseUnits { Variance, StdDev };

/// Diagonal process/measurement noise. Diagonals are variances (mm^2,
/// rad^2); from_diagonals squares the entries when handed std-devs instead.
struct NoiseModel {
  Matrix6d Q = Matrix6d::Identity();
  Matrix6d R = Matrix6d::Identity();

  static NoiseModel from_diagonals(const Vector6d& q, const Vector6d& r,
                                   NoiseUnits units = NoiseUnits::Variance);
  /// The measured profile of the marker-tracking setup this toolkit models:
  /// Q, R entries (0.25, 0.25, 0.25, 0.02, 0.02, 0.02) and
  /// (0.35, 0.35, 0.35, 0.04, 0.04, 0.04), taken as variances by default.
  static NoiseModel defaults(NoiseUnits units = NoiseUnits::Variance);
};

/// A camera pose measurement that arrives t_delivery - t_capture late.
struct DelayedMeasurement {
  Vector6d z = Vector6d::Zero();
  double t_capture = 0.0;
  double t_delivery = 0.0;
};

/// Ring history of control ticks: the camera-frame pose the controller
/// intended to reach (x*) and the robot's own odometry pose. Lookups at any
/// time inside the retained horizon interpolate between ticks.
class CommandLog {
 public:
  explicit CommandLog(double horizon_s = 2.0) : horizon_(horizon_s) {}

  void push(double t, const Pose& commanded_in_cam, const Pose& odometry);
  Pose commanded_at(double t) const;
  Pose odometry_at(double t) const;
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    double t;
    Pose commanded;
    Pose odometry;
  };
  const Entry& front() const { return entries_.front(); }
  Pose lookup(double t, bool commanded) const;

  double horizon_;
  std::deque<Entry> entries_;
};

/// Prediction step: the state snaps to the pose the robot was last commanded
/// to, and the covariance inflates by Q.
FilterState predict(const FilterState& state, const Vector6d& last_command,
                    const NoiseModel& noise);

/// Measurement update with K = P (P + R)^-1 and the angular innovation
/// components wrapped to (-pi, pi]. Covariance follows the standard
/// (I - K) P form and is re-symmetrized; NonPsdCovariance if it still ends
/// up with an eigenvalue below -1e-9.
FilterState update(const FilterState& state, const Vector6d& z_hat,
                   const NoiseModel& noise);

/// Latency compensation: advances a stale capture to delivery time by the
/// robot's own motion over the delay window,
///   z_hat = z(t_capture) * odom(t_capture)^-1 * odom(t_delivery),
/// composed as transforms. Equals z verbatim when the robot did not move.
Vector6d compensate(const DelayedMeasurement& m, const CommandLog& log);

/// The dual-rate wrapper: measurements are folded in at their delivery
/// instants (compensate -> predict -> update, in capture order); between
/// deliveries control ticks keep reading the last posterior.
class DualRateFilter {
 public:
  DualRateFilter(const FilterState& prior, const NoiseModel& noise,
                 bool latency_compensation = true)
      : state_(prior),
        noise_(noise),
        compensate_latency_(latency_compensation) {}

  /// Processes every pending measurement due by `clock` and returns the
  /// estimate the controller should act on. Out-of-order captures raise
  /// LogHorizonExceeded (this filter never refilters the past).
  const FilterState& step(double clock, const CommandLog& log,
                          std::deque<DelayedMeasurement>& pending);

  const FilterState& state() const { return state_; }
  int updates() const { return updates_; }

 private:
  FilterState state_;
  NoiseModel noise_;
  bool compensate_latency_;
  double last_capture_ = -std::numeric_limits<double>::infinity();
  int updates_ = 0;
};

/// Estimates the measurement noise diagonal from a slow straight-line sweep:
/// each translation axis is regressed linearly against the sample index, the
/// rotation axes against a constant, and the residual variances form the
/// diagonal (mm^2, rad^2). Needs >= 10 samples (TooFewSamples).
Vector6d estimate_measurement_noise(std::span<const Vector6d> line_trajectory);

}  // namespace lfd
