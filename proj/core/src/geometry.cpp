#include "lfd/geometry.hpp"

#include <cmath>
#include <numbers>

namespace lfd {

namespace {
constexpr double kPi = std::numbers::pi;
}

double wrap_angle(double x) {
  double w = std::fmod(x + kPi, 2.0 * kPi);
  if (w <= 0.0) w += 2.0 * kPi;
  return w - kPi;  // (-pi, pi]
}

Eigen::Quaterniond euler_zyx_to_quat(double alpha, double beta, double theta) {
  Eigen::Quaterniond q = Eigen::AngleAxisd(alpha, Eigen::Vector3d::UnitZ()) *
                         Eigen::AngleAxisd(beta, Eigen::Vector3d::UnitY()) *
                         Eigen::AngleAxisd(theta, Eigen::Vector3d::UnitX());
  return q.normalized();
}

Eigen::Vector3d quat_to_euler_zyx(const Eigen::Quaterniond& q) {
  const Eigen::Matrix3d r = q.normalized().toRotationMatrix();
  const double sb = std::clamp(-r(2, 0), -1.0, 1.0);
  const double beta = std::asin(sb);
  double alpha, theta;
  if (std::abs(sb) < 1.0 - 1e-12) {
    alpha = std::atan2(r(1, 0), r(0, 0));
    theta = std::atan2(r(2, 1), r(2, 2));
  } else {
    // Gimbal lock: only alpha +/- theta is observable; put it all in alpha.
    alpha = std::atan2(-r(0, 1), r(1, 1));
    theta = 0.0;
  }
  return {alpha, beta, theta};
}

Pose Pose::from_euler(double x, double y, double z, double alpha, double beta,
                      double theta) {
  return Pose({x, y, z}, euler_zyx_to_quat(alpha, beta, theta));
}

Pose Pose::from_vector6(const Vector6d& v) {
  return from_euler(v[0], v[1], v[2], v[3], v[4], v[5]);
}

Vector6d Pose::to_vector6() const {
  Vector6d v;
  v.head<3>() = translation;
  v.tail<3>() = quat_to_euler_zyx(orientation);
  return v;
}

Transform Transform::from_pose(const Pose& p) {
  Transform t;
  t.rotation = p.orientation.normalized().toRotationMatrix();
  t.translation = p.translation;
  return t;
}

Transform Transform::from_vector6(const Vector6d& v) {
  return from_pose(Pose::from_vector6(v));
}

Transform Transform::translate(double x, double y, double z) {
  Transform t;
  t.translation = {x, y, z};
  return t;
}

Pose Transform::to_pose() const {
  return Pose(translation, Eigen::Quaterniond(rotation));
}

Vector6d Transform::to_vector6() const { return to_pose().to_vector6(); }

Eigen::Matrix4d Transform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Transform Transform::from_matrix(const Eigen::Matrix4d& m) {
  Transform t;
  t.rotation = m.topLeftCorner<3, 3>();
  t.translation = m.topRightCorner<3, 1>();
  return t;
}

Transform compose(const Transform& a, const Transform& b) {
  Transform t;
  t.rotation = a.rotation * b.rotation;
  t.translation = a.rotation * b.translation + a.translation;
  return t;
}

Transform inverse(const Transform& t) {
  Transform r;
  r.rotation = t.rotation.transpose();
  r.translation = -(r.rotation * t.translation);
  return r;
}

double rotation_angle(const Transform& t) {
  return Eigen::AngleAxisd(t.rotation).angle();
}

double rotation_angle(const Eigen::Quaterniond& a,
                      const Eigen::Quaterniond& b) {
  const double d =
      std::clamp(std::abs(a.normalized().dot(b.normalized())), 0.0, 1.0);
  return 2.0 * std::acos(d);
}

Transform retarget(const Transform& object_target_in_task,
                   const Transform& object_in_tool) {
  return compose(object_target_in_task, inverse(object_in_tool));
}

Transform servo_error(const Transform& tool_in_cam,
                      const Transform& mandrel_in_cam,
                      const Transform& target_in_mandrel) {
  return compose(inverse(tool_in_cam),
                 compose(mandrel_in_cam, target_in_mandrel));
}

Transform register_absolute_orientation(const CorrespondenceSet& c) {
  const std::size_t n = c.size();
  if (n != c.target.size()) {
    throw InvalidArgument("correspondence sets differ in length");
  }
  if (n < 3) {
    throw DegenerateGeometry("registration needs at least 3 point pairs");
  }
  Eigen::Vector3d src_mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d dst_mean = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    src_mean += c.source[i];
    dst_mean += c.target[i];
  }
  src_mean /= static_cast<double>(n);
  dst_mean /= static_cast<double>(n);

  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d src_scatter = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d s = c.source[i] - src_mean;
    const Eigen::Vector3d d = c.target[i] - dst_mean;
    cross += s * d.transpose();
    src_scatter += s * s.transpose();
  }

  // Collinear (or coincident) source points leave the rotation about the
  // line unobservable.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> scatter_eig(src_scatter);
  const Eigen::Vector3d ev = scatter_eig.eigenvalues();  // ascending
  if (ev[2] <= 0.0 || ev[1] < 1e-9 * ev[2]) {
    throw DegenerateGeometry("registration points are collinear");
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  Eigen::Matrix3d s = Eigen::Matrix3d::Identity();
  if ((v * u.transpose()).determinant() < 0.0) s(2, 2) = -1.0;

  Transform t;
  t.rotation = v * s * u.transpose();
  t.translation = dst_mean - t.rotation * src_mean;
  return t;
}

Pose interpolate(const Pose& p0, const Pose& p1, double s) {
  if (s < 0.0 || s > 1.0) {
    throw InvalidArgument("interpolation parameter outside [0, 1]");
  }
  Pose out;
  out.translation = (1.0 - s) * p0.translation + s * p1.translation;
  out.orientation = p0.orientation.slerp(s, p1.orientation).normalized();
  return out;
}

}  // namespace lfd
