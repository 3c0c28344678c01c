#include <doctest.h>

#include <random>

#include "lfd/sim.hpp"
#include "lfd/synth.hpp"
#include "support/oracles.hpp"

using namespace lfd;

namespace {

RobotModel quiet_robot() {
  RobotModel r;
  r.actuation_noise_std = Vector6d::Zero();
  return r;
}

CameraModel quiet_camera() {
  CameraModel c;
  c.measurement_noise_std = Vector6d::Zero();
  c.latency = 0.0;
  return c;
}

}  // namespace

TEST_CASE("step_robot") {
  RngStream rng(1);
  const RobotModel model = quiet_robot();
  SUBCASE("holding the command keeps the pose") {
    const Pose p = Pose::from_euler(5, 5, 5, 0.1, 0, 0);
    const Pose out = step_robot(model, p, p, rng);
    CHECK((out.translation - p.translation).norm() < 1e-12);
  }
  SUBCASE("clamped translation moves exactly one step along the line") {
    RobotModel m = model;
    m.max_linear_speed = 100.0;
    m.control_period = 0.01;
    const Pose start;
    const Pose cmd = Pose::from_euler(10, 0, 0, 0, 0, 0);
    const Pose out = step_robot(m, start, cmd, rng);
    CHECK(out.translation.x() == doctest::Approx(1.0));
    CHECK(out.translation.y() == doctest::Approx(0.0));
  }
  SUBCASE("within one step's travel the command is reached exactly") {
    const Pose start;
    const Pose cmd = Pose::from_euler(0.5, 0.3, 0, 0.001, 0, 0);
    const Pose out = step_robot(model, start, cmd, rng);
    CHECK((out.translation - cmd.translation).norm() < 1e-12);
    CHECK(rotation_angle(out.orientation, cmd.orientation) < 1e-12);
  }
  SUBCASE("rotation rate limits also slow translation (coupled progress)") {
    RobotModel m = model;
    m.max_linear_speed = 1000.0;
    m.max_angular_speed = 0.5;
    m.control_period = 0.01;  // max 0.005 rad per tick
    const Pose start;
    const Pose cmd = Pose::from_euler(10, 0, 0, 0.5, 0, 0);
    const Pose out = step_robot(m, start, cmd, rng);
    CHECK(out.translation.x() == doctest::Approx(0.1));  // 1% of the way
  }
}

TEST_CASE("sample_camera") {
  SUBCASE("zero noise and latency returns the pose verbatim") {
    RngStream rng(2);
    const CameraModel cam = quiet_camera();
    const Pose p = Pose::from_euler(1, 2, 3, 0.1, 0.2, 0.3);
    const auto m = sample_camera(cam, p, 4.0, rng);
    REQUIRE(m.has_value());
    CHECK((m->z - p.to_vector6()).norm() < 1e-12);
    CHECK(m->t_capture == 4.0);
    CHECK(m->t_delivery == 4.0);
  }
  SUBCASE("latency stamps delivery exactly one latency after capture") {
    RngStream rng(3);
    CameraModel cam = quiet_camera();
    cam.latency = 0.1;
    const auto m = sample_camera(cam, Pose{}, 1.0, rng);
    REQUIRE(m.has_value());
    CHECK(m->t_delivery - m->t_capture == doctest::Approx(0.1));
  }
  SUBCASE("sampled noise matches the configured std within 5 percent") {
    RngStream rng(4);
    CameraModel cam;  // default noise profile
    cam.latency = 0.0;
    const Pose p = Pose::from_euler(10, 20, 30, 0.3, 0.1, -0.2);
    const int n = 10000;
    Eigen::VectorXd xs(n);
    Eigen::VectorXd as(n);
    for (int i = 0; i < n; ++i) {
      const auto m = sample_camera(cam, p, i * 0.01, rng);
      REQUIRE(m.has_value());
      xs[i] = m->z[0];
      as[i] = m->z[3];
    }
    const double sx = std::sqrt(
        (xs.array() - xs.mean()).square().sum() / (n - 1));
    const double sa = std::sqrt(
        (as.array() - as.mean()).square().sum() / (n - 1));
    CHECK(sx == doctest::Approx(0.35).epsilon(0.05));
    CHECK(sa == doctest::Approx(0.04).epsilon(0.05));
  }
  SUBCASE("dropout removes frames at roughly the configured rate") {
    RngStream rng(5);
    CameraModel cam = quiet_camera();
    cam.dropout_prob = 0.3;
    int dropped = 0;
    for (int i = 0; i < 2000; ++i) {
      if (!sample_camera(cam, Pose{}, i * 0.01, rng)) ++dropped;
    }
    CHECK(dropped == doctest::Approx(600).epsilon(0.15));
  }
}

TEST_CASE("forward-backward gate") {
  std::vector<Eigen::Vector2d> prev{{0, 0}, {10, 0}, {10, 10}, {0, 10}, {5, 5}};
  SUBCASE("exact returns make every corner an inlier") {
    const auto inliers = fb_gate(prev, prev);
    REQUIRE(inliers.has_value());
    CHECK(inliers->size() == prev.size());
  }
  SUBCASE("a 3px corner is excluded while the rest stay inliers") {
    auto back = prev;
    back[2] += Eigen::Vector2d{3.0, 0.0};
    const auto inliers = fb_gate(prev, back);
    REQUIRE(inliers.has_value());
    CHECK(inliers->size() == prev.size() - 1);
    for (int idx : *inliers) CHECK(idx != 2);
  }
  SUBCASE("6px errors on every corner reject the frame") {
    auto back = prev;
    for (auto& p : back) p += Eigen::Vector2d{6.0, 0.0};
    CHECK(!fb_gate(prev, back).has_value());
  }
  SUBCASE("a single corner beyond the reject threshold discards everything") {
    auto back = prev;
    back[0] += Eigen::Vector2d{0.0, 6.0};
    CHECK(!fb_gate(prev, back).has_value());
  }
  SUBCASE("fewer than four inliers reject the frame") {
    auto back = prev;
    back[0] += Eigen::Vector2d{2.0, 0.0};
    back[1] += Eigen::Vector2d{2.0, 0.0};
    CHECK(!fb_gate(prev, back).has_value());
  }
  SUBCASE("the gate is permutation equivariant") {
    auto back = prev;
    back[1] += Eigen::Vector2d{2.5, 0.0};
    const auto base = fb_gate(prev, back);
    REQUIRE(base.has_value());

    const std::vector<int> perm{4, 2, 0, 1, 3};
    std::vector<Eigen::Vector2d> prev_p(prev.size()), back_p(prev.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      prev_p[i] = prev[perm[i]];
      back_p[i] = back[perm[i]];
    }
    const auto permuted = fb_gate(prev_p, back_p);
    REQUIRE(permuted.has_value());
    // membership must follow the permutation
    std::vector<bool> in_base(prev.size(), false);
    for (int idx : *base) in_base[idx] = true;
    std::vector<bool> in_perm(prev.size(), false);
    for (int idx : *permuted) in_perm[idx] = true;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      CHECK(in_perm[i] == in_base[perm[i]]);
    }
  }
}

TEST_CASE("evaluate") {
  const ReferenceTrajectory ref = [] {
    ReferenceTrajectory r;
    for (int i = 0; i < 30; ++i) {
      ReferencePoint p;
      p.t = 0.1 * i;
      p.pose = Pose::from_euler(1.0 * i, 0, 0, 0, 0, 0);
      r.points.push_back(p);
    }
    return r;
  }();

  auto trace_from = [&](auto&& transform_pose) {
    TraceRecord t;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      TraceRow row;
      row.tick = static_cast<long>(i);
      row.clock = ref.points[i].t;
      row.truth = transform_pose(ref.points[i].pose).to_vector6();
      t.rows.push_back(row);
    }
    return t;
  };

  SUBCASE("a trace exactly on the reference has zero errors") {
    const auto m = evaluate(trace_from([](const Pose& p) { return p; }), ref);
    CHECK(m.mean_translation_mm == doctest::Approx(0.0));
    CHECK(m.mean_rotation_deg == doctest::Approx(0.0));
    CHECK(m.duration_s == doctest::Approx(2.9));
  }
  SUBCASE("a uniform 2mm offset reads 2mm translation and zero rotation") {
    const auto m = evaluate(trace_from([](const Pose& p) {
                              Pose q = p;
                              q.translation.z() += 2.0;
                              return q;
                            }),
                            ref);
    CHECK(m.mean_translation_mm == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(m.mean_rotation_deg == doctest::Approx(0.0));
  }
  SUBCASE("without warping the metrics equal a direct per-index average") {
    std::mt19937_64 rng(89);
    std::normal_distribution<double> gauss(0.0, 0.01);
    std::vector<double> offsets;
    const auto trace = trace_from([&](const Pose& p) {
      Pose q = p;
      const double dz = gauss(rng);
      offsets.push_back(std::abs(dz));
      q.translation.z() += dz;
      return q;
    });
    double direct = 0.0;
    for (double o : offsets) direct += o;
    direct /= offsets.size();
    const auto m = evaluate(trace, ref);
    CHECK(m.mean_translation_mm == doctest::Approx(direct).epsilon(1e-12));
  }
  SUBCASE("an empty trace is an error") {
    CHECK_THROWS_AS(evaluate(TraceRecord{}, ref), EmptyTrace);
  }
}

TEST_CASE("servo loop in a perfect world lands on the reference") {
  for (ServoMode mode : {ServoMode::OpenLoop, ServoMode::VisualServo}) {
    const ReproductionSetup setup =
        make_reproduction_setup(Transform::identity(), 11);
    const RobotModel robot = quiet_robot();
    CameraModel cam = quiet_camera();
    SimOptions opt;
    const TraceRecord trace =
        servo_loop(setup.scenario, robot, cam, mode, nullptr, opt);
    REQUIRE(!trace.empty());
    // settled on the final waypoint
    const Pose final_truth = Pose::from_vector6(trace.rows.back().truth);
    const Pose target = setup.eval_reference.points.back().pose;
    CHECK((final_truth.translation - target.translation).norm() < 0.1);
    const EvalMetrics m = evaluate(trace, setup.eval_reference);
    CHECK(m.mean_translation_mm < 0.2);
    CHECK(m.mean_rotation_deg < 0.1);
  }
}

TEST_CASE("open loop inherits the hand-eye bias, servoing rejects it") {
  Transform bias;
  bias.translation = 5.0 * Eigen::Vector3d(1.0, -1.0, 6.0).normalized();

  const ReproductionSetup setup = make_reproduction_setup(bias, 13);
  RobotModel robot = quiet_robot();
  robot.hand_eye_bias = bias;
  CameraModel cam = quiet_camera();

  const TraceRecord open = servo_loop(setup.scenario, robot, cam,
                                      ServoMode::OpenLoop);
  const EvalMetrics open_m = evaluate(open, setup.eval_reference);
  CHECK(open_m.mean_translation_mm == doctest::Approx(5.0).epsilon(0.2));

  const TraceRecord servo = servo_loop(setup.scenario, robot, cam,
                                       ServoMode::VisualServo);
  const EvalMetrics servo_m = evaluate(servo, setup.eval_reference);
  CHECK(servo_m.mean_translation_mm < 0.5);  // noise-free: transient only
}

TEST_CASE("open loop error grows affinely with the bias magnitude") {
  const Eigen::Vector3d dir = Eigen::Vector3d(1.0, -1.0, 6.0).normalized();
  std::vector<double> magnitudes{0.0, 2.5, 5.0, 7.5, 10.0};
  std::vector<double> errors;
  for (double mag : magnitudes) {
    Transform bias;
    bias.translation = mag * dir;
    const ReproductionSetup setup = make_reproduction_setup(bias, 17);
    RobotModel robot;  // default actuation noise
    robot.hand_eye_bias = bias;
    const TraceRecord trace =
        servo_loop(setup.scenario, robot, CameraModel{}, ServoMode::OpenLoop);
    errors.push_back(evaluate(trace, setup.eval_reference).mean_translation_mm);
  }
  // least squares slope over (magnitude, error)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = magnitudes.size();
  for (std::size_t i = 0; i < magnitudes.size(); ++i) {
    sx += magnitudes[i];
    sy += errors[i];
    sxx += magnitudes[i] * magnitudes[i];
    sxy += magnitudes[i] * errors[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("visual servoing accuracy is independent of the bias magnitude") {
  const Eigen::Vector3d dir = Eigen::Vector3d(1.0, -1.0, 6.0).normalized();
  std::vector<double> errors;
  for (double mag : {0.0, 5.0, 10.0}) {
    Transform bias;
    bias.translation = mag * dir;
    const ReproductionSetup setup = make_reproduction_setup(bias, 19);
    RobotModel robot;
    robot.hand_eye_bias = bias;
    const TraceRecord trace = servo_loop(setup.scenario, robot, CameraModel{},
                                         ServoMode::VisualServo);
    errors.push_back(evaluate(trace, setup.eval_reference).mean_translation_mm);
  }
  const double base = errors.front();
  for (double e : errors) CHECK(std::abs(e - base) <= 0.15 * base);
}

TEST_CASE("identical seeds reproduce the trace bit for bit") {
  Transform bias;
  bias.translation = {5.0, 0.0, 0.0};
  const ReproductionSetup setup = make_reproduction_setup(bias, 23);
  RobotModel robot;
  robot.hand_eye_bias = bias;
  const TraceRecord a =
      servo_loop(setup.scenario, robot, CameraModel{}, ServoMode::VisualServo);
  const TraceRecord b =
      servo_loop(setup.scenario, robot, CameraModel{}, ServoMode::VisualServo);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].truth == b.rows[i].truth);
    CHECK(a.rows[i].commanded == b.rows[i].commanded);
    CHECK(a.rows[i].estimate == b.rows[i].estimate);
  }
}

TEST_CASE("a tiny divergence limit trips SimDiverged") {
  Transform bias;
  bias.translation = {50.0, 0.0, 0.0};
  const ReproductionSetup setup = make_reproduction_setup(bias, 29);
  RobotModel robot = quiet_robot();
  robot.hand_eye_bias = bias;
  SimOptions opt;
  opt.divergence_limit = 10.0;
  CHECK_THROWS_AS(servo_loop(setup.scenario, robot, CameraModel{},
                             ServoMode::OpenLoop, nullptr, opt),
                  SimDiverged);
}
