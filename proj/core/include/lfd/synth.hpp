#pragma once

#include <cstdint>

#include "lfd/demo.hpp"
#include "lfd/sim.hpp"

namespace lfd {

/// Generator parameters for synthetic bimanual stitch-cycle demonstrations.
/// Per-demo perturbations are smooth (two low harmonics per axis) with a
/// cross-demo standard deviation that follows the phase schedule: wide in
/// free-space approach spans, tight where the tool works against the fabric.
struct SyntheticDemoSpec {
  int demo_count = 5;
  double sample_period = 1.0 / 30.0;  // s
  double free_translation_std = 12.0;     // mm
  double contact_translation_std = 0.8;   // mm
  double free_rotation_std = 0.06;        // rad
  double contact_rotation_std = 0.008;    // rad
};

/// World pose of the fixture the demos are taught against; demo files carry
/// world-frame poses and learning reframes them here.
Transform demo_mandrel_pose();

/// Rigid object-in-tool transform used when a tool is carrying the needle.
Transform demo_grip_transform();

/// Generates demo_count full stitch cycles (five primitives, consistent
/// gripper/holder states, strictly increasing timestamps).
std::vector<Demonstration> gen_demos(const SyntheticDemoSpec& spec,
                                     std::uint64_t seed);

/// The single-tool reproduction trajectory used by the trajectory-accuracy
/// experiments: a 3-D arc with gentle reorientation, expressed in the
/// mandrel frame, sampled every `waypoint_period` seconds. The stddev
/// channel carries a wide-then-tight profile so speed planning has
/// something to chew on.
ReferenceTrajectory reproduction_reference(double waypoint_period = 0.2,
                                           double duration = 8.0);

/// A ready-to-run single-phase scenario around reproduction_reference():
/// camera mounted overhead, mandrel off to the side, robot homed onto the
/// first waypoint through the *believed* (biased) registration. The eval
/// reference is the same path sampled densely and mapped into the robot
/// frame, which is the frame execution traces live in.
struct ReproductionSetup {
  Scenario scenario;
  ReferenceTrajectory eval_reference;  // robot frame, dense
};
ReproductionSetup make_reproduction_setup(const Transform& hand_eye_bias,
                                          std::uint64_t seed,
                                          int downsample_factor = 1,
                                          double waypoint_period = 0.2,
                                          double duration = 8.0);

}  // namespace lfd
