#include <doctest.h>

#include "lfd/pipeline.hpp"
#include "lfd/synth.hpp"

using namespace lfd;

namespace {

/// Straight-line bimanual demo in a single primitive-1 state; pose is affine
/// in time so regression reproduces it exactly.
Demonstration straight_demo(int samples) {
  Demonstration d;
  d.id = "line";
  for (int i = 0; i < samples; ++i) {
    const double t = i * (1.0 / 30.0);
    DemoSample s;
    s.t = t;
    s.pose_a = Pose::from_euler(5.0 + 12.0 * t, -3.0 * t, 2.0 + 4.0 * t,
                                0.05 * t, 0.02 * t, -0.03 * t);
    s.pose_b = Pose::from_euler(40, 20, 30, 0, 0, 0);
    s.gripper_a = GripperState::Closed;
    s.gripper_b = GripperState::Open;
    s.holder = Holder::WithA;
    d.samples.push_back(s);
  }
  return d;
}

ExperimentConfig small_config() {
  ExperimentConfig cfg = default_config();
  cfg.m_range = {6};
  cfg.demo.demo_count = 4;
  return cfg;
}

}  // namespace

TEST_CASE("identical straight-line demos reproduce the demo as reference") {
  ExperimentConfig cfg = default_config();
  cfg.m_range = {2};
  const std::vector<Demonstration> demos(3, straight_demo(90));
  const PipelineResult result = run_pipeline(demos, cfg);
  REQUIRE(result.primitives.size() == 1);
  const auto& learned = result.primitives[0];
  CHECK(learned.model.primitive == 1);
  CHECK(learned.model.tool == Tool::A);
  REQUIRE(learned.reference.size() == demos[0].samples.size());

  // the reference lives in the mandrel frame; map the demo there too
  const Transform mandrel_inv = inverse(demo_mandrel_pose());
  for (std::size_t i = 0; i < learned.reference.size(); ++i) {
    const Pose demo_local =
        compose(mandrel_inv,
                Transform::from_pose(demos[0].samples[i].pose_a))
            .to_pose();
    CHECK((learned.reference.points[i].pose.translation -
           demo_local.translation)
              .norm() < 1e-3);
    CHECK(rotation_angle(learned.reference.points[i].pose.orientation,
                         demo_local.orientation) < 1e-3);
  }
}

TEST_CASE("full pipeline over synthetic stitch demos") {
  const ExperimentConfig cfg = small_config();
  const auto demos = gen_demos(cfg.demo, cfg.seed);
  const PipelineResult result = run_pipeline(demos, cfg);
  REQUIRE(result.primitives.size() == 5);

  SUBCASE("labels, movers and frames follow the primitive table") {
    const Tool movers[] = {Tool::A, Tool::B, Tool::B, Tool::A, Tool::A};
    for (int i = 0; i < 5; ++i) {
      CHECK(result.primitives[i].model.primitive == i + 1);
      CHECK(result.primitives[i].model.tool == movers[i]);
    }
    CHECK(result.primitives[1].model.frame == ReferenceFrame::Needle);
    CHECK(result.primitives[2].model.frame == ReferenceFrame::Mandrel);
  }

  SUBCASE("primitive 1 plans fast early and slow late") {
    const auto& p1 = result.primitives[0];
    const std::size_t n = p1.plan.size();
    REQUIRE(n > 20);
    // wide variance at the start -> speed up (r = 0.5)
    bool early_fast = false;
    for (std::size_t i = 0; i < n / 4; ++i) {
      if (p1.plan.r[i] == 0.5) early_fast = true;
    }
    CHECK(early_fast);
    // tight variance at the end -> slow down (r = 2)
    bool late_slow = false;
    for (std::size_t i = n - n / 4; i < n; ++i) {
      if (p1.plan.r[i] == 2.0) late_slow = true;
    }
    CHECK(late_slow);
    // envelope crosses the thresholds the plan is built from
    CHECK(p1.env.v_t.front() > 0.01);
    CHECK(p1.env.v_t.back() < 0.005);
  }

  SUBCASE("retimed trajectories stay strictly increasing and keep poses") {
    for (const auto& learned : result.primitives) {
      validate_reference(learned.retimed);
      REQUIRE(learned.retimed.size() == learned.reference.size());
      for (std::size_t i = 0; i < learned.retimed.size(); ++i) {
        CHECK((learned.retimed.points[i].pose.translation -
               learned.reference.points[i].pose.translation)
                  .norm() == 0.0);
      }
    }
  }

  SUBCASE("the learned mixtures are valid") {
    for (const auto& learned : result.primitives) {
      learned.model.gmm.validate();
      CHECK(learned.model.gmm.dim() == 7);
    }
  }
}

TEST_CASE("stitch scenario executes end to end") {
  ExperimentConfig cfg = small_config();
  cfg.demo.demo_count = 3;
  const auto demos = gen_demos(cfg.demo, cfg.seed);
  const PipelineResult result = run_pipeline(demos, cfg);
  const Scenario scenario = build_stitch_scenario(result, demos[0], cfg);
  REQUIRE(scenario.schedule.size() == 5);

  RobotModel robot = cfg.robot;
  robot.hand_eye_bias = Transform::identity();
  CameraModel camera = cfg.camera;
  const TraceRecord trace = servo_loop(scenario, robot, camera,
                                       ServoMode::VisualServo, nullptr,
                                       cfg.sim_options());
  REQUIRE(!trace.empty());
  // every primitive shows up in the trace, in order
  int last = 0;
  bool seen[6] = {false};
  for (const auto& row : trace.rows) {
    CHECK(row.primitive >= last);
    if (row.primitive > last) last = row.primitive;
    seen[row.primitive] = true;
  }
  for (int p = 1; p <= 5; ++p) CHECK(seen[p]);

  // the moving tool tracks its retimed reference reasonably well
  const EvalMetrics m1 = evaluate(
      [&] {
        TraceRecord sub;
        for (const auto& row : trace.rows) {
          if (row.primitive == 1) sub.rows.push_back(row);
        }
        return sub;
      }(),
      [&] {
        // primitive 1 reference mapped from mandrel frame to robot frame
        ReferenceTrajectory ref;
        const Transform to_robot =
            compose(scenario.camera_in_robot, scenario.mandrel_in_camera);
        for (const auto& p : result.primitives[0].retimed.points) {
          ReferencePoint q = p;
          q.pose = compose(to_robot, Transform::from_pose(p.pose)).to_pose();
          ref.points.push_back(q);
        }
        return ref;
      }());
  CHECK(m1.mean_translation_mm < 5.0);
}

TEST_CASE("reproduction trials and the speed sweep behave as documented") {
  ExperimentConfig cfg = default_config();
  cfg.trials = 2;
  cfg.reproduction_duration = 4.0;

  const auto open = run_reproduction_trials(cfg, ServoMode::OpenLoop);
  REQUIRE(open.size() == 2);
  for (const auto& t : open) {
    CHECK(t.metrics.mean_translation_mm ==
          doctest::Approx(cfg.bias_mm).epsilon(0.25));
  }

  const auto servo = run_reproduction_trials(cfg, ServoMode::VisualServo);
  for (const auto& t : servo) {
    CHECK(t.metrics.mean_translation_mm < 1.2);
  }

  cfg.sweep_factors = {1, 4};
  const auto sweep = run_speed_sweep(cfg);
  REQUIRE(sweep.size() == 2);
  CHECK(sweep[1].mean_duration_s < sweep[0].mean_duration_s);
  CHECK(sweep[1].mean_translation_mm >= sweep[0].mean_translation_mm);

  SUBCASE("a zero trial count is rejected") {
    cfg.trials = 0;
    CHECK_THROWS_AS(run_reproduction_trials(cfg, ServoMode::VisualServo),
                    InvalidArgument);
  }
}

TEST_CASE("bias and latency sweeps show the expected shape") {
  ExperimentConfig cfg = default_config();
  cfg.trials = 1;
  cfg.reproduction_duration = 3.0;
  cfg.sweep_bias_mm = {0.0, 6.0};
  cfg.sweep_latency_s = {0.0, 0.15};

  const auto bias = run_bias_sweep(cfg);
  REQUIRE(bias.size() == 2);
  // open loop inherits the bias; servoing stays flat
  CHECK(bias[1].open_loop_translation_mm >
        bias[0].open_loop_translation_mm + 3.0);
  CHECK(bias[1].servo_translation_mm <
        bias[0].servo_translation_mm + 0.3);

  const auto latency = run_latency_sweep(cfg);
  REQUIRE(latency.size() == 2);
  // compensation matters once there is latency to compensate
  CHECK(latency[1].compensated_translation_mm <
        latency[1].uncompensated_translation_mm);
}

TEST_CASE("a config round-tripped through its serialized form reproduces "
          "the exact numbers") {
  ExperimentConfig cfg = default_config();
  cfg.trials = 1;
  cfg.reproduction_duration = 3.0;
  cfg.seed = 4242;
  const auto first = run_reproduction_trials(cfg, ServoMode::VisualServo);

  const ExperimentConfig reloaded = config_from_json(config_to_json(cfg));
  const auto second = run_reproduction_trials(reloaded, ServoMode::VisualServo);
  REQUIRE(first.size() == second.size());
  CHECK(first[0].metrics.mean_translation_mm ==
        second[0].metrics.mean_translation_mm);
  CHECK(first[0].metrics.mean_rotation_deg ==
        second[0].metrics.mean_rotation_deg);
  CHECK(config_hash(reloaded) == config_hash(cfg));
}

TEST_CASE("alignment base is selectable") {
  ExperimentConfig cfg = default_config();
  cfg.m_range = {4};
  cfg.demo.demo_count = 3;
  const auto demos = gen_demos(cfg.demo, 31);
  cfg.align_base = 2;
  const PipelineResult result = run_pipeline(demos, cfg);
  // base demo 2's primitive-1 span length becomes the reference length
  const auto spans = segment(demos[2]);
  CHECK(result.primitives[0].reference.size() ==
        spans[0].end - spans[0].begin);
}
