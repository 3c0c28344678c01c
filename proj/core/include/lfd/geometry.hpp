#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <vector>

#include "lfd/errors.hpp"

namespace lfd {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

/// Wraps an angle to (-pi, pi].
double wrap_angle(double x);

/// Intrinsic Z-Y-X Euler angles (alpha about Z, beta about Y, theta about X),
/// the convention used by every file format and 6-vector in this project.
/// R = Rz(alpha) * Ry(beta) * Rx(theta). Singular at |beta| = pi/2.
Eigen::Quaterniond euler_zyx_to_quat(double alpha, double beta, double theta);
Eigen::Vector3d quat_to_euler_zyx(const Eigen::Quaterniond& q);

/// Rigid 6 d.o.f. pose. Translation in mm, orientation held as a unit
/// quaternion; Euler angles appear only at I/O and filter-state boundaries.
struct Pose {
  Eigen::Vector3d translation{0.0, 0.0, 0.0};
  Eigen::Quaterniond orientation{1.0, 0.0, 0.0, 0.0};

  Pose() = default;
  Pose(const Eigen::Vector3d& t, const Eigen::Quaterniond& q)
      : translation(t), orientation(q.normalized()) {}

  static Pose from_euler(double x, double y, double z, double alpha,
                         double beta, double theta);
  /// 6-vector layout: [x, y, z, alpha, beta, theta] (mm, rad).
  static Pose from_vector6(const Vector6d& v);
  Vector6d to_vector6() const;
};

struct TimedPose {
  double t = 0.0;  // seconds, finite and non-negative
  Pose pose;
};

/// Homogeneous rigid transform: rotation orthonormal, det +1.
struct Transform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation{0.0, 0.0, 0.0};

  static Transform identity() { return {}; }
  static Transform from_pose(const Pose& p);
  static Transform from_vector6(const Vector6d& v);
  static Transform translate(double x, double y, double z);
  Pose to_pose() const;
  Vector6d to_vector6() const;
  Eigen::Matrix4d matrix() const;
  static Transform from_matrix(const Eigen::Matrix4d& m);

  /// Maps a point expressed in this transform's source frame.
  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }
};

Transform compose(const Transform& a, const Transform& b);
Transform inverse(const Transform& t);
inline Transform operator*(const Transform& a, const Transform& b) {
  return compose(a, b);
}

/// Geodesic rotation angle of a transform / between two orientations, rad.
double rotation_angle(const Transform& t);
double rotation_angle(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);

/// Converts object-frame targets to tool-frame targets given the rigid
/// object-in-tool grip transform: returns target * grip^-1.
Transform retarget(const Transform& object_target_in_task,
                   const Transform& object_in_tool);

/// Pose error of the tool relative to its target, expressed in the current
/// tool frame: (tool_in_cam)^-1 * mandrel_in_cam * target_in_mandrel.
/// Identity iff the tool sits exactly on the target.
Transform servo_error(const Transform& tool_in_cam,
                      const Transform& mandrel_in_cam,
                      const Transform& target_in_mandrel);

/// Matched point observations of the same features in two frames, used for
/// rigid registration. Requires >= 3 non-collinear points.
struct CorrespondenceSet {
  std::vector<Eigen::Vector3d> source;  // e.g. robot-frame positions
  std::vector<Eigen::Vector3d> target;  // e.g. camera-frame positions

  void add(const Eigen::Vector3d& src, const Eigen::Vector3d& dst) {
    source.push_back(src);
    target.push_back(dst);
  }
  std::size_t size() const { return source.size(); }
};

/// Least-squares rigid transform T minimizing sum |target_i - T(source_i)|^2
/// (absolute orientation / Kabsch). Exact on noiseless rigid data.
/// Throws DegenerateGeometry for < 3 points or collinear geometry.
Transform register_absolute_orientation(const CorrespondenceSet& c);

/// Linear translation + shortest-arc slerp; s in [0, 1].
Pose interpolate(const Pose& p0, const Pose& p1, double s);

}  // namespace lfd
