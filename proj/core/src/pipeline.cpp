#include "lfd/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace lfd {

namespace {

/// Removes 2*pi jumps inside one angle sequence, then shifts the whole
/// sequence onto the branch closest to `anchor` so demos agree.
void unwrap_angles(std::vector<double>& angles, double anchor) {
  for (std::size_t i = 1; i < angles.size(); ++i) {
    angles[i] = angles[i - 1] + wrap_angle(angles[i] - angles[i - 1]);
  }
  const double two_pi = 2.0 * std::numbers::pi;
  const double shift = std::round((anchor - angles[0]) / two_pi) * two_pi;
  for (double& a : angles) a += shift;
}

/// Object pose stream the moving tool's reference is expressed against.
std::vector<TimedPose> object_stream(const Demonstration& demo,
                                     const PrimitiveSpan& span,
                                     ReferenceFrame frame) {
  std::vector<TimedPose> stream;
  stream.reserve(span.end - span.begin);
  const Transform mandrel = demo_mandrel_pose();
  const Transform grip = demo_grip_transform();
  for (std::size_t i = span.begin; i < span.end; ++i) {
    const DemoSample& s = demo.samples[i];
    TimedPose tp;
    tp.t = s.t;
    if (frame == ReferenceFrame::Mandrel) {
      tp.pose = mandrel.to_pose();
    } else {
      const Pose& holder_pose =
          s.holder == Holder::WithA ? s.pose_a : s.pose_b;
      tp.pose = compose(Transform::from_pose(holder_pose), grip).to_pose();
    }
    stream.push_back(tp);
  }
  return stream;
}

}  // namespace

PipelineResult run_pipeline(const std::vector<Demonstration>& demos,
                            const ExperimentConfig& cfg) {
  if (demos.empty()) throw EmptySequence("no demonstrations given");

  // Segmentation must agree across demos.
  std::vector<std::vector<PrimitiveSpan>> spans(demos.size());
  for (std::size_t k = 0; k < demos.size(); ++k) {
    spans[k] = segment(demos[k]);
    if (spans[k].size() != spans[0].size()) {
      throw InvalidStateSequence("demonstrations disagree on primitive count");
    }
    for (std::size_t p = 0; p < spans[k].size(); ++p) {
      if (spans[k][p].label != spans[0][p].label) {
        throw InvalidStateSequence("demonstrations disagree on primitive order");
      }
    }
  }

  const PoseMetric metric{cfg.dtw_rotation_weight};
  PipelineResult result;

  for (std::size_t p = 0; p < spans[0].size(); ++p) {
    const int label = spans[0][p].label;
    const Tool mover = moving_tool(label);
    const ReferenceFrame frame = primitive_reference_frame(label);

    // Per demo: extract the moving tool, re-express in the phase frame and
    // rebase time to the span start.
    std::vector<std::vector<TimedPose>> sequences(demos.size());
    for (std::size_t k = 0; k < demos.size(); ++k) {
      const PrimitiveSpan& span = spans[k][p];
      std::vector<TimedPose> world;
      world.reserve(span.end - span.begin);
      for (std::size_t i = span.begin; i < span.end; ++i) {
        world.push_back({demos[k].samples[i].t, demos[k].samples[i].pose(mover)});
      }
      auto local = reframe(world, object_stream(demos[k], span, frame));
      const double t0 = local.front().t;
      for (auto& tp : local) tp.t -= t0;
      sequences[k] = std::move(local);
    }

    const std::size_t base_index =
        std::min<std::size_t>(cfg.align_base, sequences.size() - 1);
    const AlignedDemoSet aligned =
        align_sequences(sequences, metric, base_index);
    const std::size_t n_base = aligned.sequences[0].size();

    // Stack the (t, pose) rows; angles unwrapped per demo and branch-matched
    // to the first demo so the mixture sees a continuous space.
    std::vector<std::array<std::vector<double>, 3>> angle_seqs(demos.size());
    Eigen::MatrixXd data(demos.size() * n_base, 7);
    std::array<double, 3> anchor = {0, 0, 0};
    for (std::size_t k = 0; k < demos.size(); ++k) {
      std::array<std::vector<double>, 3>& ang = angle_seqs[k];
      for (int a = 0; a < 3; ++a) ang[a].resize(n_base);
      for (std::size_t i = 0; i < n_base; ++i) {
        const Vector6d v = aligned.sequences[k][i].pose.to_vector6();
        for (int a = 0; a < 3; ++a) ang[a][i] = v[3 + a];
      }
      for (int a = 0; a < 3; ++a) {
        unwrap_angles(ang[a], k == 0 ? ang[a][0] : anchor[a]);
        if (k == 0) anchor[a] = ang[a][0];
      }
      for (std::size_t i = 0; i < n_base; ++i) {
        const std::size_t row = k * n_base + i;
        const Vector6d v = aligned.sequences[k][i].pose.to_vector6();
        data(row, 0) = aligned.sequences[0][i].t;
        for (int a = 0; a < 3; ++a) data(row, 1 + a) = v[a];
        for (int a = 0; a < 3; ++a) data(row, 4 + a) = ang[a][i];
      }
    }

    const std::uint64_t fit_seed =
        derive_seed(cfg.seed, "fit", static_cast<std::uint64_t>(label));
    int m = cfg.m_range.size() == 1
                ? cfg.m_range[0]
                : select_components(data, cfg.m_range, cfg.cv_folds, fit_seed,
                                    cfg.fit);
    const FitResult fit = fit_gmm(data, m, fit_seed, cfg.fit);

    LearnedPrimitive learned;
    learned.model.primitive = label;
    learned.model.tool = mover;
    learned.model.frame = frame;
    learned.model.gmm = fit.model;
    learned.reference.primitive = label;
    for (std::size_t i = 0; i < n_base; ++i) {
      const double t = aligned.sequences[0][i].t;
      learned.model.base_times.push_back(t);
      const GmrResult g = gmr(fit.model, t);
      ReferencePoint pt;
      pt.t = t;
      pt.pose = Pose::from_euler(g.mean[0], g.mean[1], g.mean[2], g.mean[3],
                                 g.mean[4], g.mean[5]);
      for (int d = 0; d < 6; ++d) {
        pt.stddev[d] = std::sqrt(std::max(0.0, g.covariance(d, d)));
      }
      learned.reference.points.push_back(pt);
    }

    learned.env = envelope(learned.reference);
    learned.raw_plan.r.reserve(n_base);
    for (std::size_t i = 0; i < n_base; ++i) {
      learned.raw_plan.r.push_back(
          classify(learned.env.v_t[i], learned.env.v_r[i], cfg.thresholds));
    }
    learned.plan = cfg.smooth_width > 1
                       ? majority_smooth(learned.raw_plan, cfg.smooth_width)
                       : learned.raw_plan;
    learned.retimed = retime(learned.reference, learned.plan);
    result.primitives.push_back(std::move(learned));
  }
  return result;
}

Scenario build_stitch_scenario(const PipelineResult& result,
                               const Demonstration& first_demo,
                               const ExperimentConfig& cfg) {
  if (result.primitives.empty()) {
    throw EmptySequence("pipeline result has no primitives");
  }
  Scenario sc;
  sc.seed = cfg.seed;
  sc.camera_in_robot.rotation =
      Eigen::AngleAxisd(std::numbers::pi, Eigen::Vector3d::UnitX())
          .toRotationMatrix();
  sc.camera_in_robot.translation = {0.0, 0.0, 300.0};
  // The demo world doubles as the robot frame; the camera observes the
  // mandrel where the generator placed it.
  sc.mandrel_in_camera =
      compose(inverse(sc.camera_in_robot), demo_mandrel_pose());
  sc.grip = demo_grip_transform();
  sc.home_a = first_demo.samples.front().pose_a;
  sc.home_b = first_demo.samples.front().pose_b;
  for (const auto& learned : result.primitives) {
    ScenarioPhase phase;
    phase.primitive = learned.model.primitive;
    phase.tool = learned.model.tool;
    phase.frame = learned.model.frame;
    phase.reference = learned.retimed;
    phase.speed_ratio = learned.plan.r;
    sc.schedule.push_back(std::move(phase));
  }
  return sc;
}

std::vector<TrialMetrics> run_reproduction_trials(
    const ExperimentConfig& cfg, ServoMode mode,
    std::vector<TraceRecord>* traces, int downsample_factor,
    double bias_mm_override) {
  if (cfg.trials < 1) throw InvalidArgument("trial count must be >= 1");
  const double bias_mm = bias_mm_override >= 0.0 ? bias_mm_override : cfg.bias_mm;
  RobotModel robot = cfg.robot;
  robot.hand_eye_bias = cfg.bias_at(bias_mm);

  std::vector<TrialMetrics> out;
  for (int trial = 0; trial < cfg.trials; ++trial) {
    const std::uint64_t trial_seed =
        derive_seed(cfg.seed, "trial", static_cast<std::uint64_t>(trial));
    const ReproductionSetup setup = make_reproduction_setup(
        robot.hand_eye_bias, trial_seed, downsample_factor,
        cfg.waypoint_period, cfg.reproduction_duration);
    const TraceRecord trace = servo_loop(setup.scenario, robot, cfg.camera,
                                         mode, nullptr, cfg.sim_options());
    TrialMetrics tm;
    tm.trial = trial;
    tm.metrics = evaluate(trace, setup.eval_reference);
    out.push_back(tm);
    if (traces != nullptr) traces->push_back(trace);
  }
  return out;
}

namespace {

double mean_translation(const std::vector<TrialMetrics>& trials) {
  double sum = 0.0;
  for (const auto& t : trials) sum += t.metrics.mean_translation_mm;
  return sum / static_cast<double>(trials.size());
}

}  // namespace

std::vector<BiasSweepPoint> run_bias_sweep(const ExperimentConfig& cfg) {
  std::vector<double> magnitudes = cfg.sweep_bias_mm;
  std::sort(magnitudes.begin(), magnitudes.end());
  std::vector<BiasSweepPoint> points;
  for (double bias : magnitudes) {
    BiasSweepPoint pt;
    pt.bias_mm = bias;
    pt.open_loop_translation_mm = mean_translation(
        run_reproduction_trials(cfg, ServoMode::OpenLoop, nullptr, 1, bias));
    pt.servo_translation_mm = mean_translation(
        run_reproduction_trials(cfg, ServoMode::VisualServo, nullptr, 1, bias));
    points.push_back(pt);
  }
  return points;
}

std::vector<LatencySweepPoint> run_latency_sweep(const ExperimentConfig& cfg) {
  std::vector<double> latencies = cfg.sweep_latency_s;
  std::sort(latencies.begin(), latencies.end());
  std::vector<LatencySweepPoint> points;
  for (double latency : latencies) {
    ExperimentConfig run = cfg;
    run.camera.latency = latency;
    LatencySweepPoint pt;
    pt.latency_s = latency;
    run.latency_compensation = true;
    pt.compensated_translation_mm =
        mean_translation(run_reproduction_trials(run, ServoMode::VisualServo));
    run.latency_compensation = false;
    pt.uncompensated_translation_mm =
        mean_translation(run_reproduction_trials(run, ServoMode::VisualServo));
    points.push_back(pt);
  }
  return points;
}

std::vector<SweepPoint> run_speed_sweep(const ExperimentConfig& cfg) {
  std::vector<int> factors = cfg.sweep_factors;
  std::sort(factors.begin(), factors.end());
  std::vector<SweepPoint> points;
  for (int factor : factors) {
    const auto trials =
        run_reproduction_trials(cfg, ServoMode::VisualServo, nullptr, factor);
    SweepPoint pt;
    pt.factor = factor;
    for (const auto& t : trials) {
      pt.mean_translation_mm += t.metrics.mean_translation_mm;
      pt.mean_rotation_deg += t.metrics.mean_rotation_deg;
      pt.mean_duration_s += t.metrics.duration_s;
    }
    const double n = static_cast<double>(trials.size());
    pt.mean_translation_mm /= n;
    pt.mean_rotation_deg /= n;
    pt.mean_duration_s /= n;
    points.push_back(pt);
  }
  return points;
}

}  // namespace lfd
