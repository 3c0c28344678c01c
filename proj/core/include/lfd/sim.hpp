#pragma once

#include <optional>
#include <vector>

#include "lfd/context.hpp"
#include "lfd/demo.hpp"
#include "lfd/kalman.hpp"
#include "lfd/reference.hpp"
#include "lfd/rng.hpp"

namespace lfd {

/// Rate-limited position-commanded robot. hand_eye_bias is the registration
/// error injected between the believed and the true camera frame; open-loop
/// playback inherits it in full, visual servoing should not.
struct RobotModel {
  double max_linear_speed = 120.0;  // mm/s
  double max_angular_speed = 2.5;   // rad/s
  double control_period = 0.01;     // s
  Transform hand_eye_bias;          // identity = perfectly registered
  // Per-step execution jitter at hardware repeatability scale. The filter's
  // Q deliberately assumes more than this (see docs/config notes).
  Vector6d actuation_noise_std =
      (Vector6d() << 0.05, 0.05, 0.05, 1e-4, 1e-4, 1e-4).finished();
};

/// Pose-sensing camera with frame rate, delivery latency, additive noise on
/// the 6-vector pose, dropouts, and the forward-backward corner gate run on
/// synthetic marker-corner tracks.
struct CameraModel {
  double frame_period = 1.0 / 30.0;  // s
  double latency = 0.1;              // s
  Vector6d measurement_noise_std =
      (Vector6d() << 0.35, 0.35, 0.35, 0.04, 0.04, 0.04).finished();
  double dropout_prob = 0.0;
  double fb_tau_inlier = 1.0;  // px
  double fb_tau_reject = 5.0;  // px
  int fb_corner_count = 4;
  double fb_corner_noise_px = 0.2;
  double fb_outlier_prob = 0.0;  // chance a corner track goes wild (2..8 px)
};

/// Forward-backward gate over tracked marker corners: a corner is an inlier
/// when its forward-then-backward track lands within tau_inlier of where it
/// started; any corner beyond tau_reject, or fewer than 4 inliers, rejects
/// the whole frame. Returns the inlier indices or nullopt for a rejection.
std::optional<std::vector<int>> fb_gate(
    std::span<const Eigen::Vector2d> previous_corners,
    std::span<const Eigen::Vector2d> forward_backward_corners,
    double tau_inlier = 1.0, double tau_reject = 5.0);

/// Moves toward `command` with coupled translation/rotation progress (both
/// channels advance by the same fraction, like a Cartesian LIN segment),
/// clamped by the speed limits, then applies actuation noise.
Pose step_robot(const RobotModel& model, const Pose& true_pose,
                const Pose& command, RngStream& rng);

/// Samples one camera frame of the given camera-frame pose: additive noise,
/// capture/delivery stamps, dropout and FB-gate rejection both surface as
/// nullopt. Draws a fixed amount of randomness regardless of outcome.
std::optional<DelayedMeasurement> sample_camera(const CameraModel& model,
                                                const Pose& pose_in_camera,
                                                double clock, RngStream& rng);

/// One phase of a scenario: a reference for the moving tool expressed in the
/// phase frame, plus the per-step speed ratios actually in effect (logging
/// only; the reference is already retimed).
struct ScenarioPhase {
  int primitive = 1;
  Tool tool = Tool::A;
  ReferenceFrame frame = ReferenceFrame::Mandrel;
  ReferenceTrajectory reference;
  std::vector<double> speed_ratio;  // empty = all 1
};

/// World layout and schedule for one simulated execution.
struct Scenario {
  Transform camera_in_robot;   // true camera mount, ^r H_c
  Transform mandrel_in_camera; // ^c x_m, observed once per cycle
  Transform grip;              // needle-in-tool during handover phases
  std::vector<ScenarioPhase> schedule;
  Pose home_a;  // robot-frame rest poses
  Pose home_b;
  std::uint64_t seed = 0;
};

enum class ServoMode { OpenLoop, VisualServo };

struct ServoGains {
  double translation = 0.25;  // per control tick
  // Rotational feedback is off by default: at the modeled rotational
  // measurement noise it only injects wobble, while the reference
  // orientation is followed feed-forward. See docs/config notes.
  double rotation = 0.0;
};

struct SimOptions {
  ServoGains gains;
  NoiseModel filter_noise = NoiseModel::defaults();
  bool latency_compensation = true;
  // Vision-guided staging before the scored execution: the loop holds the
  // first waypoint for this long so the filter locks on and the initial
  // registration error is corrected before t = 0. Not recorded in the
  // trace; open-loop runs have no vision to stage with and skip it.
  double stage_time = 0.5;          // s
  double settle_time = 0.5;         // s appended after the schedule
  double divergence_limit = 100.0;  // mm, SimDiverged beyond this
  double log_horizon = 2.0;         // s of command history kept
};

/// One control tick of an execution trace. Poses are stored as raw
/// 6-vectors so trace files round-trip byte for byte.
struct TraceRow {
  long tick = 0;
  double clock = 0.0;
  int primitive = 1;
  Tool tool = Tool::A;
  double r = 1.0;
  Vector6d truth = Vector6d::Zero();      // robot frame, before this tick's motion
  Vector6d commanded = Vector6d::Zero();  // robot-frame command issued this tick
  bool estimate_valid = false;
  Vector6d estimate = Vector6d::Zero();  // camera-frame filter posterior
  bool measurement_valid = false;
  Vector6d measurement = Vector6d::Zero();  // raw camera sample (capture)
};

struct TraceRecord {
  std::vector<TraceRow> rows;
  bool empty() const { return rows.empty(); }
};

/// Runs the look-and-move loop over the scenario schedule. OpenLoop maps
/// reference poses through the (biased) believed registration with no
/// feedback; VisualServo closes translation through the dual-rate filter and
/// follows orientation feed-forward (gains configurable). Identical seeds
/// and configs produce bit-identical traces.
///
/// If `plan` is given the scenario must have exactly one phase and the plan
/// retimes its reference (LengthMismatch on size disagreement).
TraceRecord servo_loop(const Scenario& scenario, const RobotModel& robot,
                       const CameraModel& camera, ServoMode mode,
                       const SpeedPlan* plan = nullptr,
                       const SimOptions& options = {});

struct EvalMetrics {
  double mean_translation_mm = 0.0;
  double mean_rotation_deg = 0.0;
  double duration_s = 0.0;
};

/// DTW-aligns the executed ground-truth poses to the reference and reports
/// mean per-matched-point translation / rotation differences plus the wall
/// duration of the trace. EmptyTrace on an empty input.
EvalMetrics evaluate(const TraceRecord& trace, const ReferenceTrajectory& truth);

}  // namespace lfd
