#include "lfd/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lfd {

std::optional<std::vector<int>> fb_gate(
    std::span<const Eigen::Vector2d> previous_corners,
    std::span<const Eigen::Vector2d> forward_backward_corners,
    double tau_inlier, double tau_reject) {
  if (previous_corners.size() != forward_backward_corners.size()) {
    throw InvalidArgument("corner lists differ in length");
  }
  if (previous_corners.size() < 4) {
    throw InvalidArgument("gate needs at least 4 corner tracks");
  }
  std::vector<int> inliers;
  for (std::size_t i = 0; i < previous_corners.size(); ++i) {
    const double err =
        (previous_corners[i] - forward_backward_corners[i]).norm();
    if (err > tau_reject) return std::nullopt;  // whole output untrustworthy
    if (err <= tau_inlier) inliers.push_back(static_cast<int>(i));
  }
  if (inliers.size() < 4) return std::nullopt;
  return inliers;
}

Pose step_robot(const RobotModel& model, const Pose& true_pose,
                const Pose& command, RngStream& rng) {
  const double dist = (command.translation - true_pose.translation).norm();
  const double ang = rotation_angle(true_pose.orientation, command.orientation);
  const double max_step = model.max_linear_speed * model.control_period;
  const double max_turn = model.max_angular_speed * model.control_period;
  // Coupled progress (Cartesian LIN): both channels advance together so the
  // orientation stays matched to the position along the segment.
  const double f_t = dist > 1e-12 ? std::min(1.0, max_step / dist) : 1.0;
  const double f_r = ang > 1e-12 ? std::min(1.0, max_turn / ang) : 1.0;
  const double f = std::min(f_t, f_r);
  Pose next = interpolate(true_pose, command, f);

  Vector6d noise;
  for (int i = 0; i < 6; ++i) {
    noise[i] = rng.gaussian(0.0, 1.0) * model.actuation_noise_std[i];
  }
  next.translation += noise.head<3>();
  next.orientation =
      (euler_zyx_to_quat(noise[3], noise[4], noise[5]) * next.orientation)
          .normalized();
  return next;
}

std::optional<DelayedMeasurement> sample_camera(const CameraModel& model,
                                                const Pose& pose_in_camera,
                                                double clock, RngStream& rng) {
  // Fixed draw schedule keeps runs reproducible across outcome branches.
  const double drop = rng.uniform();
  Vector6d noise;
  for (int i = 0; i < 6; ++i) {
    noise[i] = rng.gaussian(0.0, 1.0) * model.measurement_noise_std[i];
  }
  std::vector<Eigen::Vector2d> prev(model.fb_corner_count);
  std::vector<Eigen::Vector2d> back(model.fb_corner_count);
  for (int i = 0; i < model.fb_corner_count; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / model.fb_corner_count;
    prev[i] = {5.0 * std::cos(angle), 5.0 * std::sin(angle)};
    const double err = std::abs(rng.gaussian(0.0, model.fb_corner_noise_px));
    const double outlier_draw = rng.uniform();
    const double outlier_mag = rng.uniform(2.0, 8.0);
    const double fb_err =
        outlier_draw < model.fb_outlier_prob ? outlier_mag : err;
    back[i] = prev[i] + Eigen::Vector2d{fb_err, 0.0};
  }

  if (drop < model.dropout_prob) return std::nullopt;
  if (!fb_gate(prev, back, model.fb_tau_inlier, model.fb_tau_reject)) {
    return std::nullopt;
  }

  DelayedMeasurement m;
  m.z = pose_in_camera.to_vector6() + noise;
  m.t_capture = clock;
  m.t_delivery = clock + model.latency;
  return m;
}

namespace {

struct PhaseTiming {
  double start = 0.0;
  double end = 0.0;  // start + reference duration
};

double reference_start(const ReferenceTrajectory& ref) {
  return ref.points.front().t;
}

}  // namespace

TraceRecord servo_loop(const Scenario& scenario, const RobotModel& robot,
                       const CameraModel& camera, ServoMode mode,
                       const SpeedPlan* plan, const SimOptions& options) {
  if (scenario.schedule.empty()) {
    throw InvalidArgument("scenario has no phases");
  }
  std::vector<ScenarioPhase> schedule = scenario.schedule;
  if (plan != nullptr) {
    if (schedule.size() != 1) {
      throw InvalidArgument("a speed plan applies to single-phase scenarios");
    }
    schedule[0].reference = retime(schedule[0].reference, *plan);
    schedule[0].speed_ratio = plan->r;
  }
  for (const auto& phase : schedule) {
    validate_reference(phase.reference);
    if (phase.reference.empty()) {
      throw EmptySequence("phase reference is empty");
    }
    if (!phase.speed_ratio.empty() &&
        phase.speed_ratio.size() != phase.reference.size()) {
      throw LengthMismatch("speed ratios and reference differ in length");
    }
  }

  const Transform cam_in_robot = scenario.camera_in_robot;
  const Transform reg_true = inverse(cam_in_robot);               // ^c H_r
  const Transform reg_believed = compose(reg_true, robot.hand_eye_bias);
  const Transform believed_inv = inverse(reg_believed);

  // Staging window: the schedule starts after the filter had a chance to
  // lock on and pull the tool onto the first waypoint. Trace clocks are
  // re-based so the scored execution still begins at zero.
  const double stage =
      mode == ServoMode::VisualServo ? std::max(0.0, options.stage_time) : 0.0;

  std::vector<PhaseTiming> timing(schedule.size());
  double t_cursor = stage;
  for (std::size_t p = 0; p < schedule.size(); ++p) {
    timing[p].start = t_cursor;
    timing[p].end = t_cursor + schedule[p].reference.duration();
    t_cursor = timing[p].end;
  }
  const double total_time = t_cursor + options.settle_time;

  RngStream robot_rng(derive_seed(scenario.seed, "robot"));
  RngStream camera_rng(derive_seed(scenario.seed, "camera"));

  Pose truth_a = scenario.home_a;
  Pose truth_b = scenario.home_b;

  CommandLog log(options.log_horizon);
  std::deque<DelayedMeasurement> pending;
  NoiseModel filter_noise = options.filter_noise;
  std::optional<DualRateFilter> filter;

  TraceRecord trace;
  const long total_ticks =
      static_cast<long>(std::ceil(total_time / robot.control_period)) + 1;
  trace.rows.reserve(total_ticks);

  std::size_t phase_idx = schedule.size();  // forces setup on first tick
  Transform frame_in_camera;                // phase target frame, ^c x_f
  Pose active_intent_cam;                   // camera-frame pose last aimed for
  // Vision correction in the robot frame, refreshed once per delivered
  // frame and held between deliveries (look-and-move).
  Transform fb_correction;
  int seen_updates = 0;
  double next_frame_time = 0.0;

  for (long tick = 0; tick < total_ticks; ++tick) {
    const double clock = tick * robot.control_period;

    // Phase bookkeeping.
    std::size_t p = phase_idx == schedule.size() ? 0 : phase_idx;
    while (p + 1 < schedule.size() && clock >= timing[p].end - 1e-9) ++p;
    if (p != phase_idx) {
      phase_idx = p;
      const ScenarioPhase& phase = schedule[p];
      Pose& moving = phase.tool == Tool::A ? truth_a : truth_b;
      const Pose& other = phase.tool == Tool::A ? truth_b : truth_a;
      if (phase.frame == ReferenceFrame::Mandrel) {
        frame_in_camera = scenario.mandrel_in_camera;
      } else {
        // Handover target frame: the needle as held by the other tool,
        // observed directly by the camera at phase entry.
        frame_in_camera = compose(
            reg_true, compose(Transform::from_pose(other), scenario.grip));
      }
      // Fresh filter for the tool now being servoed.
      FilterState prior;
      prior.x = compose(reg_believed, Transform::from_pose(moving)).to_vector6();
      prior.P = 10.0 * filter_noise.R;
      filter.emplace(prior, filter_noise, options.latency_compensation);
      pending.clear();
      fb_correction = Transform::identity();
      seen_updates = 0;
      active_intent_cam =
          compose(reg_believed, Transform::from_pose(moving)).to_pose();
    }

    const ScenarioPhase& phase = schedule[phase_idx];
    Pose& truth = phase.tool == Tool::A ? truth_a : truth_b;

    // Waypoint in effect: the next reference point not yet due.
    const double local = clock - timing[phase_idx].start +
                         reference_start(phase.reference);
    const auto& pts = phase.reference.points;
    std::size_t widx =
        std::lower_bound(pts.begin(), pts.end(), local,
                         [](const ReferencePoint& rp, double value) {
                           return rp.t < value;
                         }) -
        pts.begin();
    if (widx >= pts.size()) widx = pts.size() - 1;
    const double speed_r =
        phase.speed_ratio.empty() ? 1.0 : phase.speed_ratio[widx];

    const bool scored = clock >= stage - 1e-9;
    TraceRow row;
    row.tick = static_cast<long>(trace.rows.size());
    row.clock = clock - stage;
    row.primitive = phase.primitive;
    row.tool = phase.tool;
    row.r = speed_r;
    row.truth = truth.to_vector6();

    // Camera frame boundary: capture the moving tool's true camera pose.
    if (clock >= next_frame_time - 1e-9) {
      next_frame_time += camera.frame_period;
      const Pose cam_pose =
          compose(reg_true, Transform::from_pose(truth)).to_pose();
      if (auto m = sample_camera(camera, cam_pose, clock, camera_rng)) {
        row.measurement_valid = true;
        row.measurement = m->z;
        pending.push_back(*m);
      }
    }

    // Log before filtering so deliveries at this clock can interpolate
    // odometry right up to now; the command column is the intent that was
    // active while the robot moved into this tick.
    log.push(clock, active_intent_cam, truth);

    const Transform target_in_frame = Transform::from_pose(pts[widx].pose);
    const Transform target_cam = compose(frame_in_camera, target_in_frame);
    const Transform cmd_ff = compose(believed_inv, target_cam);

    Pose command;
    if (mode == ServoMode::VisualServo) {
      const FilterState& est = filter->step(clock, log, pending);
      row.estimate_valid = true;
      row.estimate = est.x;

      const Transform tool_in_cam = Transform::from_vector6(est.x);
      const Transform odom = Transform::from_pose(truth);
      if (filter->updates() > seen_updates) {
        // A fresh estimate: measure how far the believed registration is off
        // by comparing the vision-derived target against the feed-forward
        // one, both taken at this instant. Held until the next frame.
        seen_updates = filter->updates();
        const Transform err =
            servo_error(tool_in_cam, frame_in_camera, target_in_frame);
        const Transform target_fb = compose(odom, err);
        fb_correction = compose(target_fb, inverse(cmd_ff));
      }
      const Transform target = compose(fb_correction, cmd_ff);

      // One gain for both channels so orientation progresses in lockstep
      // with position along the segment. Rotation follows the feed-forward
      // reference unless a rotational feedback gain is configured.
      Eigen::Quaterniond target_rot(cmd_ff.rotation);
      if (options.gains.rotation > 0.0) {
        target_rot = target_rot.slerp(options.gains.rotation,
                                      Eigen::Quaterniond(target.rotation));
      }
      command.translation =
          truth.translation + options.gains.translation *
                                  (target.translation - truth.translation);
      command.orientation = truth.orientation
                                .slerp(options.gains.translation, target_rot)
                                .normalized();

      // Intent for upcoming predictions: where the controller believes the
      // tool will sit in camera frame after executing this command.
      const Transform rel = compose(inverse(odom), Transform::from_pose(command));
      active_intent_cam = compose(tool_in_cam, rel).to_pose();
    } else {
      command = cmd_ff.to_pose();
      active_intent_cam = compose(reg_believed, Transform::from_pose(command)).to_pose();
    }
    row.commanded = command.to_vector6();
    if (scored) trace.rows.push_back(row);

    truth = step_robot(robot, truth, command, robot_rng);

    const Transform true_target = compose(cam_in_robot, target_cam);
    if ((truth.translation - true_target.translation).norm() >
        options.divergence_limit) {
      throw SimDiverged("tool diverged beyond " +
                        std::to_string(options.divergence_limit) + " mm");
    }
  }
  return trace;
}

EvalMetrics evaluate(const TraceRecord& trace,
                     const ReferenceTrajectory& truth) {
  if (trace.empty()) throw EmptyTrace("trace has no rows");
  if (truth.empty()) throw EmptySequence("reference has no points");

  std::vector<Pose> executed(trace.rows.size());
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    executed[i] = Pose::from_vector6(trace.rows[i].truth);
  }
  std::vector<Pose> reference(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    reference[i] = truth.points[i].pose;
  }

  const WarpResult warp = dtw_align(std::span<const Pose>(executed),
                                    std::span<const Pose>(reference));
  double sum_t = 0.0;
  double sum_r = 0.0;
  for (const auto& [i, j] : warp.path) {
    sum_t += (executed[i].translation - reference[j].translation).norm();
    sum_r += rotation_angle(executed[i].orientation, reference[j].orientation);
  }
  const double n = static_cast<double>(warp.path.size());

  EvalMetrics m;
  m.mean_translation_mm = sum_t / n;
  m.mean_rotation_deg = (sum_r / n) * 180.0 / std::numbers::pi;
  m.duration_s = trace.rows.back().clock - trace.rows.front().clock;
  return m;
}

}  // namespace lfd
