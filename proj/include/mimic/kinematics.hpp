#pragma once

#include <array>

#include "mimic/robot_model.hpp"

namespace mimic {

struct BasePose {
  Vec3 position = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
};

// Chain per leg: base -> hip mount -> roll(q_hip) -> lateral hip offset ->
// pitch(q_thigh) -> thigh -> pitch(q_calf, cumulative) -> calf -> foot point.
// All outputs are points in the origin (world) frame.

std::array<Vec3, kNumLegs> fk_feet(const RobotModel& model, const BasePose& base, const Vec12& q);

// Positions of every collision body. Base corners are the 8 vertices of the
// base box.
struct LinkPositions {
  std::array<Vec3, kNumLegs> feet;
  std::array<Vec3, kNumLegs> knees;
  std::array<Vec3, kNumLegs> hips;  // thigh-mount points (after the roll offset)
  std::array<Vec3, 8> base_corners;
};

LinkPositions fk_links(const RobotModel& model, const BasePose& base, const Vec12& q);

// Foot position of one leg in the base frame.
Vec3 fk_foot_base_frame(const RobotModel& model, int leg, const Vec3& q_leg);
// Knee (calf mount) position of one leg in the base frame.
Vec3 fk_knee_base_frame(const RobotModel& model, int leg, const Vec3& q_leg);

struct IkResult {
  Vec3 angles = Vec3::Zero();  // hip, thigh, calf
  bool clamped = false;        // joint limits changed the analytic answer
  bool projected = false;      // target was unreachable and got projected
  std::array<bool, 3> joints_clamped = {false, false, false};
};

// Analytic 3-DoF leg IK: abduction from the lateral offset, then planar
// two-link via the law of cosines on the backward-knee branch (calf < 0).
// `target` is the foot position in the base frame. With graceful = false an
// unreachable target throws; with graceful = true it is projected to the
// nearest reachable point and flagged. The returned angles always satisfy
// the joint limits.
IkResult ik_leg(const RobotModel& model, int leg, const Vec3& target, bool graceful = false);

struct UnreachableTarget : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Knee-hint variant: thigh direction taken from the (base-frame) hip->knee
// vector, calf then solved to best reach the foot. Used by retargeting for
// motion types where the plain solution misplaces the knee.
IkResult ik_leg_with_knee_hint(const RobotModel& model, int leg, const Vec3& target,
                               const Vec3& knee_hint);

// World-frame foot velocity Jacobian contribution of the 3 leg joints
// (3x3, columns = joint axes crossed with lever arms).
Mat3 leg_jacobian(const RobotModel& model, const BasePose& base, int leg, const Vec3& q_leg);

}  // namespace mimic
