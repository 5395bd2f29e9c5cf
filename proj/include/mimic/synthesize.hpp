#pragma once

#include <string>

#include "mimic/kinematics.hpp"
#include "mimic/motion_types.hpp"

namespace mimic {

// Procedural clip source. Supported types: stand, step, pace, trot, jump,
// the four turn variants, sit, lie. The CoM path integrates the speed and
// yaw-rate profile in closed form; feet follow anchor points on the ground
// with half-sine swing lifts and joints come from per-leg IK, so every
// generated clip is kinematically consistent and passes the clip validator.
struct GaitSpec {
  std::string name = "clip";
  MotionType type = MotionType::kStand;
  double speed = 0.0;            // m/s along the heading
  double yaw_rate = 0.0;         // rad/s
  double initial_heading = 0.0;  // rad
  double duration = 10.0;        // s
  double fps = 60.0;             // Hz
  // Style knobs; <= 0 picks the per-type default.
  double step_frequency = 0.0;   // strides/s
  double step_height = 0.0;      // m
  double duty_factor = 0.0;      // stance fraction of the cycle
};

MotionClip synthesize_clip(const GaitSpec& spec, const RobotModel& model);

// Base height with feet touching the ground at the nominal stand pose.
double standing_base_height(const RobotModel& model);

}  // namespace mimic
