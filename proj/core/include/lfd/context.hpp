#pragma once

#include <vector>

#include "lfd/reference.hpp"

namespace lfd {

/// Cross-demonstration spread per reference step: translational norm in m,
/// rotational norm in rad. Lengths always match the source trajectory.
struct VarianceEnvelope {
  std::vector<double> v_t;  // m
  std::vector<double> v_r;  // rad
  std::size_t size() const { return v_t.size(); }
};

/// Speed-ratio thresholds and levels; the defaults are the task profile this
/// toolkit ships with (free-space motion above, in-contact motion below).
struct ContextThresholds {
  double vt_fast = 0.01;   // m: any axis spread above this -> speed up
  double vr_fast = 0.2;    // rad
  double vt_slow = 0.005;  // m: both spreads below these -> slow down
  double vr_slow = 0.1;    // rad
  double r_fast = 0.5;     // duration ratios for the three regimes
  double r_mid = 1.0;
  double r_slow = 2.0;
};

/// Per-step ratio to the demonstrated speed. r multiplies the local step
/// duration: 0.5 halves it (double speed in high-variance free space),
/// 2 doubles it (half speed where precision matters).
struct SpeedPlan {
  std::vector<double> r;  // each in {0.5, 1, 2}
  std::size_t size() const { return r.size(); }
};

/// Norms of the per-axis standard deviations of a reference trajectory,
/// translation converted mm -> m.
VarianceEnvelope envelope(const ReferenceTrajectory& ref);

/// Three-level speed classification. Fast case wins first (any component
/// above its upper threshold), then slow (both components below the lower
/// thresholds), else 1. Monotone: growing variance never slows the plan.
double classify(double v_t, double v_r, const ContextThresholds& th = {});

/// Sliding-window majority vote to remove single-step speed chatter; ties
/// keep the center value. width must be odd.
SpeedPlan majority_smooth(const SpeedPlan& plan, int width = 5);

/// classify() per step followed by majority_smooth().
SpeedPlan plan_speed(const VarianceEnvelope& env,
                     const ContextThresholds& th = {}, int smooth_width = 5);

/// Rescales local step durations by the plan (poses untouched). Plan and
/// trajectory must have equal length (LengthMismatch).
ReferenceTrajectory retime(const ReferenceTrajectory& ref,
                           const SpeedPlan& plan);

/// Keeps every k-th waypoint at the original waypoint period (taken from the
/// first interval), so the motion covers k times the distance per step: the
/// "play the reference at a lower sampling rate" speed mechanism. k >= 1;
/// first and last points are kept.
ReferenceTrajectory downsample(const ReferenceTrajectory& ref, int factor);

}  // namespace lfd
