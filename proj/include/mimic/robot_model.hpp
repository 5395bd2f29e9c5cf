#pragma once

#include <array>
#include <string>

#include "mimic/config.hpp"
#include "mimic/rotation.hpp"

namespace mimic {

// Leg order is fixed everywhere: FR, FL, RR, RL, each (hip, thigh, calf).
enum Leg { kFR = 0, kFL = 1, kRR = 2, kRL = 3 };
constexpr int kNumLegs = 4;
constexpr int kNumJoints = 12;

inline bool is_left_leg(int leg) { return leg == kFL || leg == kRL; }

struct JointLimits {
  double hip_min = -0.5, hip_max = 0.5;
  double thigh_min = -0.1, thigh_max = 1.5;
  double calf_min = -2.1, calf_max = -0.5;

  double lower(int joint_in_leg) const;
  double upper(int joint_in_leg) const;
};

// Kinematic and collision geometry. Dimensions default to an A1-like
// profile and load from a key-value config file.
struct RobotModel {
  std::array<Vec3, kNumLegs> mounts = {Vec3(0.183, -0.047, 0.0), Vec3(0.183, 0.047, 0.0),
                                       Vec3(-0.183, -0.047, 0.0), Vec3(-0.183, 0.047, 0.0)};
  double hip_offset = 0.0838;  // lateral thigh-axis offset from the hip roll axis
  double thigh_length = 0.2;
  double calf_length = 0.2;
  JointLimits limits;

  double foot_radius = 0.02;
  double knee_radius = 0.03;
  double hip_radius = 0.04;
  Vec3 base_box = Vec3(0.267, 0.194, 0.114);  // full extents, centered on the base origin

  static RobotModel from_config(const KeyValueConfig& cfg);
  static RobotModel from_file(const std::string& path);
  KeyValueConfig to_config() const;

  void validate() const;

  Vec12 clamp_to_limits(const Vec12& q) const;
  bool within_limits(const Vec12& q, double slack = 0.0) const;

  // Signed lateral offset of the thigh axis for a leg (+y for left legs).
  double lateral_offset(int leg) const { return is_left_leg(leg) ? hip_offset : -hip_offset; }
};

// The fixed standing joint configuration a_m. Action residuals and gait
// synthesis are both anchored on it.
Vec12 nominal_stand_pose();

}  // namespace mimic
