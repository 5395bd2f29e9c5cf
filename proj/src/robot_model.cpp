#include "mimic/robot_model.hpp"

#include <algorithm>
#include <stdexcept>

namespace mimic {

double JointLimits::lower(int joint_in_leg) const {
  switch (joint_in_leg) {
    case 0: return hip_min;
    case 1: return thigh_min;
    default: return calf_min;
  }
}

double JointLimits::upper(int joint_in_leg) const {
  switch (joint_in_leg) {
    case 0: return hip_max;
    case 1: return thigh_max;
    default: return calf_max;
  }
}

RobotModel RobotModel::from_config(const KeyValueConfig& cfg) {
  RobotModel m;
  const double mx = cfg.get_double("mount_x", 0.183);
  const double my = cfg.get_double("mount_y", 0.047);
  m.mounts = {Vec3(mx, -my, 0.0), Vec3(mx, my, 0.0), Vec3(-mx, -my, 0.0), Vec3(-mx, my, 0.0)};
  m.hip_offset = cfg.get_double("hip_offset", m.hip_offset);
  m.thigh_length = cfg.get_double("thigh_length", m.thigh_length);
  m.calf_length = cfg.get_double("calf_length", m.calf_length);
  m.limits.hip_min = cfg.get_double("hip_min", m.limits.hip_min);
  m.limits.hip_max = cfg.get_double("hip_max", m.limits.hip_max);
  m.limits.thigh_min = cfg.get_double("thigh_min", m.limits.thigh_min);
  m.limits.thigh_max = cfg.get_double("thigh_max", m.limits.thigh_max);
  m.limits.calf_min = cfg.get_double("calf_min", m.limits.calf_min);
  m.limits.calf_max = cfg.get_double("calf_max", m.limits.calf_max);
  m.foot_radius = cfg.get_double("foot_radius", m.foot_radius);
  m.knee_radius = cfg.get_double("knee_radius", m.knee_radius);
  m.hip_radius = cfg.get_double("hip_radius", m.hip_radius);
  m.base_box.x() = cfg.get_double("base_box_x", m.base_box.x());
  m.base_box.y() = cfg.get_double("base_box_y", m.base_box.y());
  m.base_box.z() = cfg.get_double("base_box_z", m.base_box.z());
  m.validate();
  return m;
}

RobotModel RobotModel::from_file(const std::string& path) {
  return from_config(KeyValueConfig::from_file(path));
}

KeyValueConfig RobotModel::to_config() const {
  KeyValueConfig cfg;
  cfg.set_double("mount_x", mounts[kFR].x());
  cfg.set_double("mount_y", mounts[kFL].y());
  cfg.set_double("hip_offset", hip_offset);
  cfg.set_double("thigh_length", thigh_length);
  cfg.set_double("calf_length", calf_length);
  cfg.set_double("hip_min", limits.hip_min);
  cfg.set_double("hip_max", limits.hip_max);
  cfg.set_double("thigh_min", limits.thigh_min);
  cfg.set_double("thigh_max", limits.thigh_max);
  cfg.set_double("calf_min", limits.calf_min);
  cfg.set_double("calf_max", limits.calf_max);
  cfg.set_double("foot_radius", foot_radius);
  cfg.set_double("knee_radius", knee_radius);
  cfg.set_double("hip_radius", hip_radius);
  cfg.set_double("base_box_x", base_box.x());
  cfg.set_double("base_box_y", base_box.y());
  cfg.set_double("base_box_z", base_box.z());
  return cfg;
}

void RobotModel::validate() const {
  if (thigh_length <= 0 || calf_length <= 0 || hip_offset < 0)
    throw std::runtime_error("robot model: link lengths must be positive");
  if (foot_radius <= 0 || knee_radius <= 0 || hip_radius <= 0)
    throw std::runtime_error("robot model: collision radii must be positive");
  for (int j = 0; j < 3; ++j)
    if (!(limits.lower(j) < limits.upper(j)))
      throw std::runtime_error("robot model: joint limits must satisfy lower < upper");
  if (base_box.minCoeff() <= 0)
    throw std::runtime_error("robot model: base box extents must be positive");
}

Vec12 RobotModel::clamp_to_limits(const Vec12& q) const {
  Vec12 out;
  for (int leg = 0; leg < kNumLegs; ++leg)
    for (int j = 0; j < 3; ++j) {
      const int idx = 3 * leg + j;
      out[idx] = std::clamp(q[idx], limits.lower(j), limits.upper(j));
    }
  return out;
}

Vec12 nominal_stand_pose() {
  Vec12 q;
  q << -0.01, 0.75, -1.5, 0.01, 0.75, -1.5, -0.01, 0.75, -1.5, 0.01, 0.75, -1.5;
  return q;
}

bool RobotModel::within_limits(const Vec12& q, double slack) const {
  for (int leg = 0; leg < kNumLegs; ++leg)
    for (int j = 0; j < 3; ++j) {
      const int idx = 3 * leg + j;
      if (q[idx] < limits.lower(j) - slack || q[idx] > limits.upper(j) + slack) return false;
    }
  return true;
}

}  // namespace mimic
