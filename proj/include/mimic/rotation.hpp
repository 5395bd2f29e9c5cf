#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace mimic {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Vec12 = Eigen::Matrix<double, 12, 1>;

inline Mat3 rot_x(double a) { return Eigen::AngleAxisd(a, Vec3::UnitX()).toRotationMatrix(); }
inline Mat3 rot_y(double a) { return Eigen::AngleAxisd(a, Vec3::UnitY()).toRotationMatrix(); }
inline Mat3 rot_z(double a) { return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix(); }

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

// Nearest rotation matrix via unit-quaternion projection.
inline Mat3 orthonormalized(const Mat3& r) {
  Eigen::Quaterniond q(r);
  q.normalize();
  return q.toRotationMatrix();
}

// Geodesic interpolation between two rotations, shortest path, u in [0,1].
inline Mat3 slerp_rotation(const Mat3& a, const Mat3& b, double u) {
  Eigen::Quaterniond qa(a), qb(b);
  return qa.slerp(u, qb).normalized().toRotationMatrix();
}

// Rotation-vector logarithm (angle * axis).
inline Vec3 so3_log(const Mat3& r) {
  Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

inline Mat3 so3_exp(const Vec3& w) {
  const double angle = w.norm();
  if (angle < 1e-14) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

inline Eigen::Matrix<double, 9, 1> flatten_row_major(const Mat3& r) {
  Eigen::Matrix<double, 9, 1> out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[3 * i + j] = r(i, j);
  return out;
}

inline Mat3 unflatten_row_major(const Eigen::Matrix<double, 9, 1>& v) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = v[3 * i + j];
  return r;
}

}  // namespace mimic
