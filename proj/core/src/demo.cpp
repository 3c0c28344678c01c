#include "lfd/demo.hpp"

#include <cmath>
#include <limits>

namespace lfd {

namespace {

PrimitiveState state_of(const DemoSample& s) {
  return {s.gripper_a, s.gripper_b, s.holder};
}

}  // namespace

const std::vector<PrimitiveState>& primitive_state_table() {
  static const std::vector<PrimitiveState> table = {
      {GripperState::Closed, GripperState::Open, Holder::WithA},    // 1
      {GripperState::Closed, GripperState::Closed, Holder::WithA},  // 2
      {GripperState::Open, GripperState::Closed, Holder::WithB},    // 3
      {GripperState::Closed, GripperState::Closed, Holder::WithB},  // 4
      {GripperState::Closed, GripperState::Open, Holder::WithA},    // 5
  };
  return table;
}

Tool moving_tool(int primitive_label) {
  switch (primitive_label) {
    case 1:
    case 4:
    case 5:
      return Tool::A;
    case 2:
    case 3:
      return Tool::B;
    default:
      throw InvalidArgument("primitive label outside 1..5");
  }
}

ReferenceFrame primitive_reference_frame(int primitive_label) {
  switch (primitive_label) {
    case 1:
    case 3:
    case 5:
      return ReferenceFrame::Mandrel;
    case 2:
    case 4:
      // Approach toward the needle held by the other tool.
      return ReferenceFrame::Needle;
    default:
      throw InvalidArgument("primitive label outside 1..5");
  }
}

void validate_demo(const Demonstration& demo) {
  if (demo.samples.empty()) {
    throw InvalidArgument("demonstration '" + demo.id + "' has no samples");
  }
  double prev_t = -std::numeric_limits<double>::infinity();
  for (const DemoSample& s : demo.samples) {
    if (!(s.t > prev_t)) {
      throw InvalidArgument("demonstration '" + demo.id +
                            "' timestamps not strictly increasing");
    }
    prev_t = s.t;
    if (s.holder == Holder::WithA && s.gripper_a != GripperState::Closed) {
      throw InvalidStateSequence(
          "holder is tool A but gripper A is not closed");
    }
    if (s.holder == Holder::WithB && s.gripper_b != GripperState::Closed) {
      throw InvalidStateSequence(
          "holder is tool B but gripper B is not closed");
    }
  }
}

std::vector<PrimitiveSpan> segment(const Demonstration& demo) {
  validate_demo(demo);
  const auto& table = primitive_state_table();

  auto first_label_matching = [&](const PrimitiveState& st,
                                  int after_label) -> int {
    for (std::size_t i = static_cast<std::size_t>(after_label); i < table.size();
         ++i) {
      if (table[i] == st) return static_cast<int>(i) + 1;
    }
    return 0;
  };

  std::vector<PrimitiveSpan> spans;
  int label = first_label_matching(state_of(demo.samples[0]), 0);
  if (label == 0) {
    throw InvalidStateSequence("initial gripper/holder state not in table");
  }
  std::size_t begin = 0;
  for (std::size_t i = 1; i < demo.samples.size(); ++i) {
    const PrimitiveState st = state_of(demo.samples[i]);
    if (st == state_of(demo.samples[i - 1])) continue;
    // State changed: close the current span and advance in table order.
    const int next = first_label_matching(st, label);
    if (next == 0) {
      throw InvalidStateSequence(
          "gripper/holder transition violates primitive progression at t=" +
          std::to_string(demo.samples[i].t));
    }
    spans.push_back({label, begin, i});
    label = next;
    begin = i;
  }
  spans.push_back({label, begin, demo.samples.size()});
  return spans;
}

AlignedDemoSet align_sequences(const std::vector<std::vector<TimedPose>>& demos,
                               const PoseMetric& metric,
                               std::size_t base_index) {
  if (demos.empty()) throw EmptySequence("no demonstrations to align");
  if (base_index >= demos.size()) {
    throw InvalidArgument("alignment base index out of range");
  }
  for (const auto& d : demos) {
    if (d.empty()) throw EmptySequence("empty demonstration sequence");
  }

  const auto& base = demos[base_index];
  std::vector<Pose> base_poses(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) base_poses[i] = base[i].pose;

  AlignedDemoSet out;
  out.sequences.resize(demos.size());
  out.warps.resize(demos.size());
  for (std::size_t k = 0; k < demos.size(); ++k) {
    if (k == base_index) {
      out.sequences[k] = base;  // the base warps to itself
      continue;
    }
    std::vector<Pose> query(demos[k].size());
    for (std::size_t j = 0; j < demos[k].size(); ++j)
      query[j] = demos[k][j].pose;
    WarpResult warp = dtw_align(std::span<const Pose>(base_poses),
                                std::span<const Pose>(query), metric);
    const auto indices = warp_to_base_indices(warp, base.size());
    std::vector<TimedPose> resampled(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      resampled[i].t = base[i].t;  // shared index base keeps base timestamps
      resampled[i].pose = demos[k][indices[i]].pose;
    }
    out.sequences[k] = std::move(resampled);
    out.warps[k] = std::move(warp);
  }
  return out;
}

namespace {

std::vector<TimedPose> reframe_impl(const std::vector<TimedPose>& traj,
                                    const std::vector<TimedPose>& object_stream,
                                    bool to_local) {
  if (traj.size() != object_stream.size()) {
    throw TimestampMismatch("trajectory and object stream differ in length");
  }
  std::vector<TimedPose> out(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (std::abs(traj[i].t - object_stream[i].t) > 1e-9) {
      throw TimestampMismatch("trajectory and object stream timestamps differ at index " +
                              std::to_string(i));
    }
    const Transform obj = Transform::from_pose(object_stream[i].pose);
    const Transform p = Transform::from_pose(traj[i].pose);
    const Transform r = to_local ? compose(inverse(obj), p) : compose(obj, p);
    out[i].t = traj[i].t;
    out[i].pose = r.to_pose();
  }
  return out;
}

}  // namespace

std::vector<TimedPose> reframe(const std::vector<TimedPose>& world,
                               const std::vector<TimedPose>& object_stream) {
  return reframe_impl(world, object_stream, true);
}

std::vector<TimedPose> unreframe(const std::vector<TimedPose>& local,
                                 const std::vector<TimedPose>& object_stream) {
  return reframe_impl(local, object_stream, false);
}

}  // namespace lfd
