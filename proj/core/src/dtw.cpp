#include "lfd/dtw.hpp"

#include <algorithm>
#include <limits>

namespace lfd {

double PoseMetric::operator()(const Pose& a, const Pose& b) const {
  const double dt = (a.translation - b.translation).norm();
  const double dr = rotation_angle(a.orientation, b.orientation);
  return dt + rotation_weight_mm_per_rad * dr;
}

WarpResult dtw_align(
    std::size_t n, std::size_t m,
    const std::function<double(std::size_t, std::size_t)>& dist) {
  if (n == 0 || m == 0) {
    throw EmptySequence("dtw_align requires non-empty sequences");
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> acc(n * m, kInf);
  auto at = [&](std::size_t i, std::size_t j) -> double& {
    return acc[i * m + j];
  };

  at(0, 0) = dist(0, 0);
  for (std::size_t j = 1; j < m; ++j) at(0, j) = at(0, j - 1) + dist(0, j);
  for (std::size_t i = 1; i < n; ++i) at(i, 0) = at(i - 1, 0) + dist(i, 0);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 1; j < m; ++j) {
      const double best =
          std::min({at(i - 1, j - 1), at(i - 1, j), at(i, j - 1)});
      at(i, j) = best + dist(i, j);
    }
  }

  // Backtrack, preferring the diagonal so identical sequences warp 1:1.
  WarpResult result;
  result.cost = at(n - 1, m - 1);
  std::size_t i = n - 1, j = m - 1;
  result.path.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      const double diag = at(i - 1, j - 1);
      const double up = at(i - 1, j);
      const double left = at(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    }
    result.path.emplace_back(i, j);
  }
  std::reverse(result.path.begin(), result.path.end());
  return result;
}

WarpResult dtw_align(std::span<const Pose> reference,
                     std::span<const Pose> query, const PoseMetric& metric) {
  return dtw_align(reference.size(), query.size(),
                   [&](std::size_t i, std::size_t j) {
                     return metric(reference[i], query[j]);
                   });
}

std::vector<std::size_t> warp_to_base_indices(const WarpResult& warp,
                                              std::size_t base_length) {
  std::vector<std::vector<std::size_t>> matches(base_length);
  for (const auto& [i, j] : warp.path) {
    if (i < base_length) matches[i].push_back(j);
  }
  std::vector<std::size_t> out(base_length, 0);
  for (std::size_t i = 0; i < base_length; ++i) {
    if (matches[i].empty()) {
      out[i] = i > 0 ? out[i - 1] : 0;  // cannot happen for anchored paths
    } else {
      out[i] = matches[i][matches[i].size() / 2];
    }
  }
  return out;
}

}  // namespace lfd
