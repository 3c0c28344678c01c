#pragma once

#include <string>
#include <vector>

#include "lfd/dtw.hpp"
#include "lfd/geometry.hpp"

namespace lfd {

enum class GripperState { Open, Closed };
enum class Holder { WithA, WithB };
enum class Tool { A, B };
enum class Frame { World, ObjectLocal };

/// One timestamped bimanual sample: both tool poses plus the discrete
/// gripper/holder state that drives primitive segmentation.
struct DemoSample {
  double t = 0.0;  // s
  Pose pose_a;
  Pose pose_b;
  GripperState gripper_a = GripperState::Closed;
  GripperState gripper_b = GripperState::Open;
  Holder holder = Holder::WithA;
  Frame frame = Frame::World;

  const Pose& pose(Tool tool) const {
    return tool == Tool::A ? pose_a : pose_b;
  }
};

struct Demonstration {
  std::string id;
  std::vector<DemoSample> samples;
};

/// Checks timestamps strictly increasing and the holder/gripper consistency
/// rule (whoever holds the object must have a closed gripper).
/// Throws InvalidStateSequence / InvalidArgument.
void validate_demo(const Demonstration& demo);

/// A contiguous span of samples belonging to one motion primitive.
struct PrimitiveSpan {
  int label = 0;          // 1..5
  std::size_t begin = 0;  // inclusive
  std::size_t end = 0;    // exclusive
};

/// The stitch-cycle state table: (gripper A, gripper B, holder) per
/// primitive, in execution order. Primitive 5 repeats primitive 1's triple;
/// segmentation disambiguates by progression.
struct PrimitiveState {
  GripperState gripper_a;
  GripperState gripper_b;
  Holder holder;
  bool operator==(const PrimitiveState&) const = default;
};
const std::vector<PrimitiveState>& primitive_state_table();

/// Which tool is in motion during each primitive; the other one is treated
/// as static for learning.
Tool moving_tool(int primitive_label);

/// Frame the moving tool's reference is naturally expressed in: the task
/// fixture for piercing/pulling primitives, the held object for the
/// approach-to-handover primitives.
enum class ReferenceFrame { Mandrel, Needle };
ReferenceFrame primitive_reference_frame(int primitive_label);

/// Partitions a demonstration into labeled primitive spans. Labels advance
/// through the state table in order; a triple not in the table, or a
/// transition that moves backwards, raises InvalidStateSequence.
std::vector<PrimitiveSpan> segment(const Demonstration& demo);

/// K demonstrations resampled onto one shared index base (the first
/// demonstration) plus the warp paths that produced them.
struct AlignedDemoSet {
  std::vector<std::vector<TimedPose>> sequences;  // equal lengths
  std::vector<WarpResult> warps;                  // warps[k]: base vs demo k
};

/// DTW-aligns pose sequences onto one demo's index base (the first one
/// unless base_index says otherwise). Output order matches input order.
AlignedDemoSet align_sequences(const std::vector<std::vector<TimedPose>>& demos,
                               const PoseMetric& metric = {},
                               std::size_t base_index = 0);

/// Re-expresses a world-frame trajectory in the local frame of a moving
/// object: local_i = object_i^-1 * world_i. Streams must share timestamps
/// (TimestampMismatch otherwise). Round trip with unreframe is identity.
std::vector<TimedPose> reframe(const std::vector<TimedPose>& world,
                               const std::vector<TimedPose>& object_stream);
std::vector<TimedPose> unreframe(const std::vector<TimedPose>& local,
                                 const std::vector<TimedPose>& object_stream);

}  // namespace lfd
