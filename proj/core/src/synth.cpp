#include "lfd/synth.hpp"

#include <cmath>
#include <array>
#include <cstdio>
#include <numbers>

#include "lfd/context.hpp"

namespace lfd {

namespace {

constexpr double kPi = std::numbers::pi;

struct Via {
  double t;  // s, local to the primitive
  Eigen::Vector3d position;
  Eigen::Vector3d euler;  // alpha, beta, theta
};

struct PrimitiveScript {
  int label;
  double duration;
  std::vector<Via> moving;      // via points of the moving tool
  Pose static_pose;             // where the other tool parks
  // Perturbation envelope: fraction of the primitive spent in the wide
  // ("free") regime before easing into the tight ("contact") regime, or the
  // reverse when contact_first is set.
  double split;
  bool contact_first;
};

double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

Pose sample_vias(const std::vector<Via>& vias, double t) {
  if (t <= vias.front().t) {
    const Via& v = vias.front();
    return Pose::from_euler(v.position[0], v.position[1], v.position[2],
                            v.euler[0], v.euler[1], v.euler[2]);
  }
  for (std::size_t i = 1; i < vias.size(); ++i) {
    if (t <= vias[i].t) {
      const Via& a = vias[i - 1];
      const Via& b = vias[i];
      const double s = smoothstep((t - a.t) / (b.t - a.t));
      const Eigen::Vector3d p = (1.0 - s) * a.position + s * b.position;
      const Eigen::Vector3d e = (1.0 - s) * a.euler + s * b.euler;
      return Pose::from_euler(p[0], p[1], p[2], e[0], e[1], e[2]);
    }
  }
  const Via& v = vias.back();
  return Pose::from_euler(v.position[0], v.position[1], v.position[2],
                          v.euler[0], v.euler[1], v.euler[2]);
}

const std::vector<PrimitiveScript>& stitch_script() {
  static const std::vector<PrimitiveScript> script = [] {
    std::vector<PrimitiveScript> s;
    // 1: tool A swoops in and pierces; B parked clear of the work area.
    s.push_back({1,
                 4.0,
                 {{0.0, {-30, -40, 50}, {0.00, 0.00, 0.00}},
                  {1.2, {-12, -25, 28}, {0.05, 0.02, 0.00}},
                  {2.4, {-2, -10, 10}, {0.10, 0.05, 0.02}},
                  {2.8, {0, -6, 6}, {0.12, 0.06, 0.03}},
                  {3.4, {2, -1, 2.5}, {0.16, 0.08, 0.05}},
                  {4.0, {5, 2, 6}, {0.20, 0.10, 0.06}}},
                 Pose::from_euler(45, 25, 30, 0, 0, 0),
                 0.68,
                 false});
    // 2: tool B approaches the emerging needle tip and grips it.
    s.push_back({2,
                 2.5,
                 {{0.0, {45, 25, 30}, {0.00, 0.00, 0.00}},
                  {1.2, {22, 12, 18}, {-0.06, 0.02, 0.00}},
                  {2.0, {9, 4, 9}, {-0.12, 0.04, 0.02}},
                  {2.5, {6, 3, 7}, {-0.15, 0.05, 0.03}}},
                 Pose::from_euler(5, 2, 6, 0.20, 0.10, 0.06),
                 0.72,
                 false});
    // 3: tool B pulls the needle out through the slot, then lifts clear.
    s.push_back({3,
                 3.0,
                 {{0.0, {6, 3, 7}, {-0.15, 0.05, 0.03}},
                  {0.9, {10, 6, 10}, {-0.18, 0.06, 0.04}},
                  {1.5, {14, 10, 16}, {-0.20, 0.06, 0.04}},
                  {3.0, {28, 18, 34}, {-0.22, 0.04, 0.02}}},
                 Pose::from_euler(5, 2, 6, 0.20, 0.10, 0.06),
                 0.45,
                 true});
    // 4: tool A comes back to regrip the needle end held by B.
    s.push_back({4,
                 2.5,
                 {{0.0, {5, 2, 6}, {0.20, 0.10, 0.06}},
                  {1.0, {10, 4, 16}, {0.12, 0.08, 0.04}},
                  {1.8, {18, 9, 24}, {0.06, 0.05, 0.02}},
                  {2.5, {24, 14, 30}, {0.02, 0.03, 0.00}}},
                 Pose::from_euler(28, 18, 34, -0.22, 0.04, 0.02),
                 0.70,
                 false});
    // 5: tool A pulls the thread out low and loops back toward the start.
    s.push_back({5,
                 3.0,
                 {{0.0, {24, 14, 30}, {0.02, 0.03, 0.00}},
                  {0.8, {40, -5, 15}, {0.05, 0.00, -0.02}},
                  {1.6, {55, -25, 5}, {0.08, -0.04, -0.04}},
                  {2.4, {40, -35, 25}, {0.04, -0.02, -0.02}},
                  {3.0, {-25, -38, 48}, {0.00, 0.00, 0.00}}},
                 Pose::from_euler(28, 18, 34, -0.22, 0.04, 0.02),
                 0.30,
                 true});
    return s;
  }();
  return script;
}

/// Cross-demo std at local progress u of a primitive.
double envelope_std(const PrimitiveScript& p, double u, double wide,
                    double tight) {
  const double edge = 0.12;  // transition width in progress units
  double s = smoothstep((u - p.split) / edge + 0.5);  // 0 before split, 1 after
  double wide_weight = p.contact_first ? s : 1.0 - s;
  return tight + (wide - tight) * wide_weight;
}

}  // namespace

Transform demo_mandrel_pose() {
  Transform t;
  t.rotation =
      Eigen::AngleAxisd(0.25, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  t.translation = {2.0, -3.0, 1.0};
  return t;
}

Transform demo_grip_transform() { return Transform::translate(0.0, 0.0, 12.0); }

std::vector<Demonstration> gen_demos(const SyntheticDemoSpec& spec,
                                     std::uint64_t seed) {
  if (spec.demo_count < 1) throw InvalidArgument("demo_count must be >= 1");
  const auto& script = stitch_script();
  const auto& table = primitive_state_table();

  std::vector<Demonstration> demos;
  demos.reserve(spec.demo_count);
  for (int k = 0; k < spec.demo_count; ++k) {
    RngStream rng(derive_seed(seed, "demo", static_cast<std::uint64_t>(k)));
    // Two harmonic coefficients per axis per tool channel; their sinusoid
    // pair keeps the cross-demo variance exactly at the envelope std.
    std::array<double, 12> g;
    for (double& v : g) v = rng.gaussian();

    Demonstration demo;
    char id[16];
    std::snprintf(id, sizeof(id), "demo%02d", k + 1);
    demo.id = id;

    double t0 = 0.0;
    for (const auto& prim : script) {
      const PrimitiveState& st = table[prim.label - 1];
      const Tool mover = moving_tool(prim.label);
      const int steps =
          static_cast<int>(std::round(prim.duration / spec.sample_period));
      for (int i = 0; i < steps; ++i) {
        const double local = i * spec.sample_period;
        const double u = local / prim.duration;
        Pose nominal = sample_vias(prim.moving, local);

        const double s_t = envelope_std(prim, u, spec.free_translation_std,
                                        spec.contact_translation_std);
        const double s_r = envelope_std(prim, u, spec.free_rotation_std,
                                        spec.contact_rotation_std);
        const double w0 = std::sin(1.5 * kPi * u + 0.4);
        const double w1 = std::cos(1.5 * kPi * u + 0.4);
        Eigen::Vector3d dp, de;
        for (int axis = 0; axis < 3; ++axis) {
          dp[axis] = s_t * (g[axis * 2] * w0 + g[axis * 2 + 1] * w1);
          de[axis] = s_r * (g[6 + axis * 2] * w0 + g[6 + axis * 2 + 1] * w1);
        }
        const Vector6d v = nominal.to_vector6();
        Pose perturbed = Pose::from_euler(v[0] + dp[0], v[1] + dp[1],
                                          v[2] + dp[2], v[3] + de[0],
                                          v[4] + de[1], v[5] + de[2]);

        DemoSample sample;
        sample.t = t0 + local;
        sample.gripper_a = st.gripper_a;
        sample.gripper_b = st.gripper_b;
        sample.holder = st.holder;
        sample.frame = Frame::World;
        if (mover == Tool::A) {
          sample.pose_a = perturbed;
          sample.pose_b = prim.static_pose;
        } else {
          sample.pose_b = perturbed;
          sample.pose_a = prim.static_pose;
        }
        demo.samples.push_back(sample);
      }
      t0 += prim.duration;
    }
    demos.push_back(std::move(demo));
  }
  return demos;
}

ReferenceTrajectory reproduction_reference(double waypoint_period,
                                           double duration) {
  if (waypoint_period <= 0.0 || duration <= 0.0) {
    throw InvalidArgument("reference timing must be positive");
  }
  ReferenceTrajectory ref;
  ref.primitive = 1;
  const int n = static_cast<int>(std::round(duration / waypoint_period)) + 1;
  const double radius = 25.0;         // mm
  const double sweep = 300.0 / 180.0 * kPi;
  for (int i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / (n - 1);
    const double phi = (u - 0.5) * sweep;
    ReferencePoint p;
    p.t = i * waypoint_period;
    const double x = radius * std::cos(phi);
    const double y = radius * std::sin(phi);
    const double z = 30.0 + 5.0 * std::sin(2.0 * kPi * u);
    p.pose = Pose::from_euler(x, y, z, 0.05 * std::sin(2.0 * kPi * u),
                              0.03 * std::sin(kPi * u),
                              0.02 * std::cos(2.0 * kPi * u) - 0.02);
    const double st = 0.5 + 12.0 * std::exp(-3.0 * u);   // mm per axis
    const double sr = 0.005 + 0.08 * std::exp(-3.0 * u); // rad per axis
    p.stddev << st, st, st, sr, sr, sr;
    ref.points.push_back(p);
  }
  return ref;
}

ReproductionSetup make_reproduction_setup(const Transform& hand_eye_bias,
                                          std::uint64_t seed,
                                          int downsample_factor,
                                          double waypoint_period,
                                          double duration) {
  ReproductionSetup setup;

  Transform camera_in_robot;
  camera_in_robot.rotation =
      Eigen::AngleAxisd(kPi, Eigen::Vector3d::UnitX()).toRotationMatrix();
  camera_in_robot.translation = {0.0, 0.0, 300.0};

  Transform mandrel_in_camera;
  mandrel_in_camera.rotation =
      Eigen::AngleAxisd(0.2, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  mandrel_in_camera.translation = {10.0, -20.0, 250.0};

  ReferenceTrajectory command_ref = reproduction_reference(waypoint_period, duration);
  if (downsample_factor > 1) {
    command_ref = downsample(command_ref, downsample_factor);
  }

  ScenarioPhase phase;
  phase.primitive = 1;
  phase.tool = Tool::A;
  phase.frame = ReferenceFrame::Mandrel;
  phase.reference = command_ref;

  Scenario& sc = setup.scenario;
  sc.camera_in_robot = camera_in_robot;
  sc.mandrel_in_camera = mandrel_in_camera;
  sc.grip = demo_grip_transform();
  sc.schedule.push_back(std::move(phase));
  sc.seed = seed;

  // Home the tool onto the first waypoint through the believed (biased)
  // registration, the way an operator would stage the run.
  const Transform reg_true = inverse(camera_in_robot);
  const Transform reg_believed = compose(reg_true, hand_eye_bias);
  const Transform first_cam =
      compose(mandrel_in_camera,
              Transform::from_pose(command_ref.points.front().pose));
  sc.home_a = compose(inverse(reg_believed), first_cam).to_pose();
  sc.home_b = Pose::from_euler(80.0, 80.0, 50.0, 0, 0, 0);

  // Dense evaluation reference in the robot (ground-truth) frame.
  const ReferenceTrajectory dense = reproduction_reference(0.02, duration);
  setup.eval_reference.primitive = 1;
  const Transform cam_to_robot = camera_in_robot;  // ^r H_c
  for (const auto& p : dense.points) {
    ReferencePoint q = p;
    const Transform in_cam =
        compose(mandrel_in_camera, Transform::from_pose(p.pose));
    q.pose = compose(cam_to_robot, in_cam).to_pose();
    setup.eval_reference.points.push_back(q);
  }
  return setup;
}

}  // namespace lfd
