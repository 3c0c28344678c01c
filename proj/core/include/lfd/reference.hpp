#pragma once

#include <vector>

#include "lfd/geometry.hpp"

namespace lfd {

/// One step of a statistically generated reference motion: the regression
/// mean plus the per-dimension standard deviation (mm for x,y,z; rad for
/// alpha,beta,theta) of the conditional distribution at that time.
struct ReferencePoint {
  double t = 0.0;  // s
  Pose pose;
  Vector6d stddev = Vector6d::Zero();
};

struct ReferenceTrajectory {
  int primitive = 1;
  std::vector<ReferencePoint> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  double duration() const {
    return points.empty() ? 0.0 : points.back().t - points.front().t;
  }
};

/// Checks strictly increasing timestamps and non-negative variances.
void validate_reference(const ReferenceTrajectory& ref);

}  // namespace lfd
