#include <doctest.h>

#include <cmath>

#include "lfd/context.hpp"

using namespace lfd;

namespace {

ReferenceTrajectory flat_reference(int n, double dt, const Vector6d& stddev) {
  ReferenceTrajectory ref;
  for (int i = 0; i < n; ++i) {
    ReferencePoint p;
    p.t = i * dt;
    p.pose = Pose::from_euler(i * 1.0, 0, 0, 0, 0, 0);
    p.stddev = stddev;
    ref.points.push_back(p);
  }
  return ref;
}

}  // namespace

TEST_CASE("envelope norms the per-axis deviations") {
  SUBCASE("zero covariance gives a zero envelope") {
    const auto ref = flat_reference(10, 0.1, Vector6d::Zero());
    const VarianceEnvelope env = envelope(ref);
    for (double v : env.v_t) CHECK(v == 0.0);
    for (double v : env.v_r) CHECK(v == 0.0);
  }
  SUBCASE("isotropic 10mm per axis is sqrt(3)/100 m") {
    Vector6d s;
    s << 10, 10, 10, 0, 0, 0;
    const VarianceEnvelope env = envelope(flat_reference(4, 0.1, s));
    CHECK(env.v_t[0] == doctest::Approx(std::sqrt(3.0) * 0.01).epsilon(1e-12));
    CHECK(env.v_r[0] == 0.0);
  }
  SUBCASE("rotation-only spread of 0.1 rad per axis") {
    Vector6d s;
    s << 0, 0, 0, 0.1, 0.1, 0.1;
    const VarianceEnvelope env = envelope(flat_reference(4, 0.1, s));
    CHECK(env.v_t[0] == 0.0);
    CHECK(env.v_r[0] == doctest::Approx(std::sqrt(3.0) * 0.1).epsilon(1e-12));
  }
}

TEST_CASE("classifier hits the published thresholds exactly") {
  CHECK(classify(0.02, 0.0) == 0.5);
  CHECK(classify(0.007, 0.15) == 1.0);
  CHECK(classify(0.004, 0.05) == 2.0);
}

TEST_CASE("the three speed levels are configurable") {
  ContextThresholds th;
  th.r_fast = 0.25;
  th.r_slow = 4.0;
  CHECK(classify(0.02, 0.0, th) == 0.25);
  CHECK(classify(0.004, 0.05, th) == 4.0);
  CHECK(classify(0.007, 0.15, th) == 1.0);
}

TEST_CASE("classifier edge behavior") {
  // fast wins first even when the other channel looks calm
  CHECK(classify(0.02, 0.01) == 0.5);
  CHECK(classify(0.001, 0.3) == 0.5);
  // slow needs both channels below the lower thresholds
  CHECK(classify(0.004, 0.15) == 1.0);
  CHECK(classify(0.007, 0.05) == 1.0);
}

TEST_CASE("classifier is monotone over a threshold grid") {
  const int n = 100;
  for (int i = 0; i < n; ++i) {
    const double vr = 0.3 * i / (n - 1);
    double prev = 10.0;
    for (int j = 0; j < n; ++j) {
      const double vt = 0.02 * j / (n - 1);
      const double r = classify(vt, vr);
      CHECK(r <= prev + 1e-15);  // growing v_t never slows the plan
      prev = r;
    }
  }
  // componentwise smaller variance never yields a smaller r
  for (int trial = 0; trial < 200; ++trial) {
    const double vt1 = 0.02 * (trial % 20) / 19.0;
    const double vr1 = 0.3 * (trial / 20) / 9.0;
    const double vt2 = vt1 * 0.5;
    const double vr2 = vr1 * 0.5;
    CHECK(classify(vt2, vr2) >= classify(vt1, vr1));
  }
}

TEST_CASE("majority smoothing removes single-step chatter") {
  SpeedPlan plan;
  plan.r = {2, 2, 0.5, 2, 2, 2, 1, 1, 1, 1};
  const SpeedPlan smooth = majority_smooth(plan, 5);
  CHECK(smooth.r[2] == 2.0);  // the lone 0.5 is voted out
  CHECK(smooth.r[7] == 1.0);
  CHECK_THROWS_AS(majority_smooth(plan, 4), InvalidArgument);
}

TEST_CASE("retime") {
  Vector6d s = Vector6d::Zero();
  const ReferenceTrajectory ref = flat_reference(11, 1.0, s);  // 10 s total

  SUBCASE("all ones is the identity") {
    SpeedPlan plan;
    plan.r.assign(11, 1.0);
    const auto out = retime(ref, plan);
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out.points[i].t == doctest::Approx(ref.points[i].t));
    }
  }
  SUBCASE("uniform halving gives 5 seconds with the same waypoints") {
    SpeedPlan plan;
    plan.r.assign(11, 0.5);
    const auto out = retime(ref, plan);
    CHECK(out.duration() == doctest::Approx(5.0));
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK((out.points[i].pose.translation - ref.points[i].pose.translation)
                .norm() == 0.0);
    }
  }
  SUBCASE("half fast half slow totals 12.5 seconds") {
    SpeedPlan plan;
    plan.r.assign(11, 0.5);
    for (std::size_t i = 6; i < 11; ++i) plan.r[i] = 2.0;
    // per-step durations: 5 steps at 0.5, 5 steps at 2.0 -> 2.5 + 10
    const auto out = retime(ref, plan);
    CHECK(out.duration() == doctest::Approx(12.5));
  }
  SUBCASE("length mismatch is rejected") {
    SpeedPlan plan;
    plan.r.assign(7, 1.0);
    CHECK_THROWS_AS(retime(ref, plan), LengthMismatch);
  }
  SUBCASE("timestamps stay strictly increasing") {
    SpeedPlan plan;
    plan.r.assign(11, 1.0);
    plan.r[3] = 0.5;
    plan.r[4] = 2.0;
    validate_reference(retime(ref, plan));
  }
}

TEST_CASE("downsample keeps endpoints and shrinks duration by the factor") {
  const ReferenceTrajectory ref = flat_reference(41, 0.2, Vector6d::Zero());
  const auto half = downsample(ref, 2);
  CHECK(half.size() == 21);
  CHECK(half.duration() == doctest::Approx(ref.duration() / 2));
  CHECK((half.points.back().pose.translation -
         ref.points.back().pose.translation)
            .norm() == 0.0);
  const auto quarter = downsample(ref, 4);
  CHECK(quarter.duration() == doctest::Approx(ref.duration() / 4));
  const auto same = downsample(ref, 1);
  CHECK(same.size() == ref.size());
}
