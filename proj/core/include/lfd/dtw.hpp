#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "lfd/geometry.hpp"

namespace lfd {

/// Pose distance used for alignment and trajectory evaluation:
/// |dt| in mm plus rotation_weight times the geodesic angle in rad.
struct PoseMetric {
  double rotation_weight_mm_per_rad = 10.0;
  double operator()(const Pose& a, const Pose& b) const;
};

struct WarpResult {
  std::vector<std::pair<std::size_t, std::size_t>> path;  // (ref, query)
  double cost = 0.0;
};

/// Classic dynamic time warping over index pairs. The path is monotone,
/// contiguous and anchored at (0,0) and (n-1,m-1); cost is the sum of the
/// pairwise distances along the path. Throws EmptySequence.
WarpResult dtw_align(std::size_t n, std::size_t m,
                     const std::function<double(std::size_t, std::size_t)>& dist);

WarpResult dtw_align(std::span<const Pose> reference,
                     std::span<const Pose> query,
                     const PoseMetric& metric = {});

/// Resamples `query` onto the reference index base of a warp: for each
/// reference index the median matched query index is taken.
std::vector<std::size_t> warp_to_base_indices(const WarpResult& warp,
                                              std::size_t base_length);

}  // namespace lfd
