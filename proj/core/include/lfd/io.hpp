#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lfd/demo.hpp"
#include "lfd/gmm.hpp"
#include "lfd/reference.hpp"
#include "lfd/sim.hpp"

namespace lfd {

/// One line of the trajectory CSV:
///   t,x_mm,y_mm,z_mm,alpha_rad,beta_rad,theta_rad,gripper_a,gripper_b,holder,frame
/// gripper values open|closed, holder A|B, frame world|object. Floats are
/// written with 17 significant digits, and rows keep the raw 6-vector (not a
/// quaternion pose) so read -> write reproduces a file byte for byte.
struct TrajectoryRow {
  double t = 0.0;
  Vector6d pose = Vector6d::Zero();
  GripperState gripper_a = GripperState::Closed;
  GripperState gripper_b = GripperState::Open;
  Holder holder = Holder::WithA;
  Frame frame = Frame::World;
};

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<TrajectoryRow>& rows);
std::vector<TrajectoryRow> read_trajectory_csv(const std::filesystem::path& path);

/// A demonstration splits into one trajectory file per tool (both carry the
/// full discrete state so either is segmentable on its own).
std::vector<TrajectoryRow> demo_rows(const Demonstration& demo, Tool tool);
Demonstration merge_demo_rows(const std::string& id,
                              const std::vector<TrajectoryRow>& rows_a,
                              const std::vector<TrajectoryRow>& rows_b);

std::vector<TrajectoryRow> reference_rows(const ReferenceTrajectory& ref,
                                          Frame frame);
ReferenceTrajectory reference_from_rows(const std::vector<TrajectoryRow>& rows,
                                        int primitive);

/// Plan CSV: t,v_t_m,v_r_rad,r_raw,r (envelope, pre- and post-smoothing).
struct PlanRow {
  double t = 0.0;
  double v_t = 0.0;
  double v_r = 0.0;
  double r_raw = 1.0;
  double r = 1.0;
};
void write_plan_csv(const std::filesystem::path& path,
                    const std::vector<PlanRow>& rows);
std::vector<PlanRow> read_plan_csv(const std::filesystem::path& path);

/// Execution trace CSV (one row per control tick).
void write_trace_csv(const std::filesystem::path& path,
                     const TraceRecord& trace);
TraceRecord read_trace_csv(const std::filesystem::path& path);

/// One learned primitive: which tool moves, the frame its reference lives
/// in, the mixture, and the index-base timestamps GMR was evaluated at.
struct PrimitiveModel {
  int primitive = 1;
  Tool tool = Tool::A;
  ReferenceFrame frame = ReferenceFrame::Mandrel;
  Gmm gmm;
  std::vector<double> base_times;
};

void write_model_json(const std::filesystem::path& path,
                      const std::vector<PrimitiveModel>& models,
                      std::uint64_t seed, const std::string& config_hash);
std::vector<PrimitiveModel> read_model_json(const std::filesystem::path& path);

/// String helpers shared with the CLI.
std::string to_string(Tool tool);
Tool tool_from_string(const std::string& s);

}  // namespace lfd
