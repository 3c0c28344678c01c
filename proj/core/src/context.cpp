#include "lfd/context.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <limits>

namespace lfd {

void validate_reference(const ReferenceTrajectory& ref) {
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& p : ref.points) {
    if (!(p.t > prev)) {
      throw InvalidArgument("reference timestamps not strictly increasing");
    }
    prev = p.t;
    if ((p.stddev.array() < 0.0).any()) {
      throw InvalidArgument("reference carries a negative deviation");
    }
  }
}

VarianceEnvelope envelope(const ReferenceTrajectory& ref) {
  VarianceEnvelope env;
  env.v_t.reserve(ref.size());
  env.v_r.reserve(ref.size());
  for (const auto& p : ref.points) {
    env.v_t.push_back(p.stddev.head<3>().norm() * 1e-3);  // mm -> m
    env.v_r.push_back(p.stddev.tail<3>().norm());
  }
  return env;
}

double classify(double v_t, double v_r, const ContextThresholds& th) {
  if (v_t > th.vt_fast || v_r > th.vr_fast) return th.r_fast;
  if (v_t < th.vt_slow && v_r < th.vr_slow) return th.r_slow;
  return th.r_mid;
}

SpeedPlan majority_smooth(const SpeedPlan& plan, int width) {
  if (width < 1 || width % 2 == 0) {
    throw InvalidArgument("majority window must be odd and positive");
  }
  const int n = static_cast<int>(plan.size());
  const int half = width / 2;
  SpeedPlan out;
  out.r.resize(n);
  for (int i = 0; i < n; ++i) {
    std::map<double, int> counts;
    const int lo = std::max(0, i - half);
    const int hi = std::min(n - 1, i + half);
    for (int j = lo; j <= hi; ++j) counts[plan.r[j]]++;
    double best = plan.r[i];
    int best_count = counts[plan.r[i]];
    for (const auto& [value, count] : counts) {
      if (count > best_count) {
        best = value;
        best_count = count;
      }
    }
    out.r[i] = best;
  }
  return out;
}

SpeedPlan plan_speed(const VarianceEnvelope& env, const ContextThresholds& th,
                     int smooth_width) {
  SpeedPlan plan;
  plan.r.reserve(env.size());
  for (std::size_t i = 0; i < env.size(); ++i) {
    plan.r.push_back(classify(env.v_t[i], env.v_r[i], th));
  }
  return smooth_width > 1 ? majority_smooth(plan, smooth_width) : plan;
}

ReferenceTrajectory retime(const ReferenceTrajectory& ref,
                           const SpeedPlan& plan) {
  if (plan.size() != ref.size()) {
    throw LengthMismatch("speed plan and reference differ in length");
  }
  ReferenceTrajectory out = ref;
  for (std::size_t i = 1; i < ref.size(); ++i) {
    const double dt = ref.points[i].t - ref.points[i - 1].t;
    out.points[i].t = out.points[i - 1].t + plan.r[i] * dt;
  }
  return out;
}

ReferenceTrajectory downsample(const ReferenceTrajectory& ref, int factor) {
  if (factor < 1) throw InvalidArgument("downsample factor must be >= 1");
  if (ref.empty()) return ref;
  ReferenceTrajectory out;
  out.primitive = ref.primitive;
  const double t0 = ref.points.front().t;
  // Original waypoint period; a decimated trajectory keeps it, so total
  // duration shrinks by the factor.
  const double period =
      ref.size() > 1 ? (ref.points[1].t - ref.points[0].t) : 0.0;
  for (std::size_t i = 0; i < ref.size(); i += factor) {
    ReferencePoint p = ref.points[i];
    p.t = t0 + static_cast<double>(out.points.size()) * period;
    out.points.push_back(p);
  }
  if ((ref.size() - 1) % factor != 0) {
    ReferencePoint p = ref.points.back();
    p.t = t0 + static_cast<double>(out.points.size()) * period;
    out.points.push_back(p);
  }
  return out;
}

}  // namespace lfd
