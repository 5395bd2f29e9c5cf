#pragma once

#include <array>
#include <string>

#include "mimic/kinematics.hpp"
#include "mimic/motion_types.hpp"

namespace mimic {

// Collision bodies, in contact-report order.
constexpr int kNumContactBodies = 13;  // 4 feet, 4 knees, 4 hips, base box
inline constexpr int foot_body(int leg) { return leg; }
inline constexpr int knee_body(int leg) { return 4 + leg; }
inline constexpr int hip_body(int leg) { return 8 + leg; }
inline constexpr int kBaseBody = 12;
const char* contact_body_name(int body);

struct ContactReport {
  std::array<bool, kNumContactBodies> in_contact{};
  std::array<double, kNumContactBodies> normal_force{};  // N, feet only
  std::array<Vec3, kNumLegs> foot_force{};               // world frame
};

// Full simulator state. Linear velocity is world frame, angular velocity is
// base frame. R is re-orthonormalized every control step.
struct RobotState {
  Vec3 position = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
  Vec3 lin_vel = Vec3::Zero();
  Vec3 ang_vel = Vec3::Zero();
  Vec12 q = Vec12::Zero();
  Vec12 qd = Vec12::Zero();
  ContactReport contacts;

  BasePose base() const { return BasePose{position, rotation}; }
};

struct SimConfig {
  double gravity = 9.81;
  double dt = 0.001;            // physics substep
  double control_dt = 0.02;     // one step() advances this much
  double friction = 0.8;        // Coulomb mu
  double contact_stiffness = 5000.0;   // N/m
  double contact_damping = 200.0;      // N s/m, normal
  double tangential_damping = 200.0;   // N s/m, viscous stick
  double kp = 50.0;
  double kd = 2.0;
  double torque_limit = 33.5;          // N m
  double base_mass = 12.0;             // kg
  Vec3 base_inertia = Vec3(0.016, 0.038, 0.046);  // kg m^2, base frame diagonal
  double reflected_inertia = 0.05;     // kg m^2 per joint
  // Ground contact whitelist for termination; feet-only by default.
  std::array<bool, kNumContactBodies> allowed_contacts = {
      true, true, true, true, false, false, false, false, false, false, false, false, false};

  int substeps() const;
  static SimConfig from_config(const KeyValueConfig& cfg);
  static SimConfig from_file(const std::string& path);
  KeyValueConfig to_config() const;
};

struct SimDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidStart : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Episode start: pose from clip frame 0, velocities from the clip's forward
// finite differences at t = 0. Throws InvalidStart if a non-foot body would
// begin below ground; feet get lifted onto the ground if needed.
RobotState sim_reset(const RobotModel& model, const SimConfig& cfg, const MotionClip& clip);

// Advance one control period (control_dt) of semi-implicit Euler substeps.
// Joints are PD-driven second-order systems with reflected inertia; foot
// penalty contact (spring-damper normal, Coulomb-clamped viscous tangent)
// acts on the base as a wrench; the base integrates Newton-Euler.
RobotState sim_step(const RobotModel& model, const SimConfig& cfg, const RobotState& state,
                    const Vec12& pd_target);

// True iff a body outside cfg.allowed_contacts touches the ground.
bool contact_violation(const RobotState& state, const SimConfig& cfg);

// Contact flags recomputed from positions (used by reset and step).
ContactReport detect_contacts(const RobotModel& model, const RobotState& state);

// One CSV row per control step: t, x, R as quaternion (w x y z), q, contact flags.
std::string state_csv_header();
std::string state_csv_row(double t, const RobotState& state);

}  // namespace mimic
