#include <benchmark/benchmark.h>

#include <random>

#include "lfd/dtw.hpp"
#include "lfd/gmm.hpp"
#include "lfd/kalman.hpp"
#include "lfd/sim.hpp"
#include "lfd/synth.hpp"

using namespace lfd;

namespace {

std::vector<Pose> random_poses(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Pose> poses(n);
  for (auto& p : poses) {
    Eigen::Quaterniond q(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
    p = Pose({30 * gauss(rng), 30 * gauss(rng), 30 * gauss(rng)},
             q.normalized());
  }
  return poses;
}

Eigen::MatrixXd curve_data(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd data(n, 7);
  for (int i = 0; i < n; ++i) {
    const double t = 4.0 * i / (n - 1);
    data(i, 0) = t;
    for (int d = 1; d < 7; ++d) {
      data(i, d) = 10.0 * std::sin(0.7 * t + d) + 0.8 * gauss(rng);
    }
  }
  return data;
}

}  // namespace

static void BM_TransformCompose(benchmark::State& state) {
  const auto poses = random_poses(2, 1);
  const Transform a = Transform::from_pose(poses[0]);
  const Transform b = Transform::from_pose(poses[1]);
  for (auto _ : state) {
    benchmark::DoNotOptimize(compose(a, b));
  }
}
BENCHMARK(BM_TransformCompose);

static void BM_ServoError(benchmark::State& state) {
  const auto poses = random_poses(3, 2);
  const Transform tool = Transform::from_pose(poses[0]);
  const Transform mandrel = Transform::from_pose(poses[1]);
  const Transform target = Transform::from_pose(poses[2]);
  for (auto _ : state) {
    benchmark::DoNotOptimize(servo_error(tool, mandrel, target));
  }
}
BENCHMARK(BM_ServoError);

static void BM_DtwAlign(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = random_poses(n, 3);
  const auto b = random_poses(n, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        dtw_align(std::span<const Pose>(a), std::span<const Pose>(b)));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_DtwAlign)->Range(32, 512)->Complexity(benchmark::oNSquared);

static void BM_FitGmm(benchmark::State& state) {
  const Eigen::MatrixXd data = curve_data(static_cast<int>(state.range(0)), 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_gmm(data, 4, 0));
  }
}
BENCHMARK(BM_FitGmm)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_GmrQuery(benchmark::State& state) {
  const FitResult fit = fit_gmm(curve_data(500, 6), 5, 0);
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gmr(fit.model, t));
    t += 0.01;
    if (t > 4.0) t = 0.0;
  }
}
BENCHMARK(BM_GmrQuery);

static void BM_KalmanStep(benchmark::State& state) {
  const NoiseModel nm = NoiseModel::defaults();
  FilterState s;
  s.P = nm.R;
  Vector6d cmd = Vector6d::Zero();
  Vector6d z = Vector6d::Constant(0.1);
  for (auto _ : state) {
    s = update(predict(s, cmd, nm), z, nm);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_KalmanStep);

static void BM_Registration(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  CorrespondenceSet c;
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d p{40 * gauss(rng), 40 * gauss(rng), 40 * gauss(rng)};
    c.add(p, p + Eigen::Vector3d{1, 2, 3});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(register_absolute_orientation(c));
  }
}
BENCHMARK(BM_Registration);

static void BM_ServoLoopSecond(benchmark::State& state) {
  const ReproductionSetup setup =
      make_reproduction_setup(Transform::translate(5, 0, 0), 11, 1, 0.2, 1.0);
  RobotModel robot;
  robot.hand_eye_bias = Transform::translate(5, 0, 0);
  const CameraModel camera;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        servo_loop(setup.scenario, robot, camera, ServoMode::VisualServo));
  }
}
BENCHMARK(BM_ServoLoopSecond)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
