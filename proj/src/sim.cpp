#include "mimic/sim.hpp"

#include <cmath>
#include <sstream>

#include "mimic/config.hpp"
#include "mimic/sampling.hpp"

namespace mimic {

const char* contact_body_name(int body) {
  static const char* kNames[kNumContactBodies] = {
      "foot_fr", "foot_fl", "foot_rr", "foot_rl", "knee_fr", "knee_fl", "knee_rr",
      "knee_rl", "hip_fr",  "hip_fl",  "hip_rr",  "hip_rl",  "base"};
  return kNames[body];
}

int SimConfig::substeps() const {
  const int n = static_cast<int>(std::llround(control_dt / dt));
  return n > 0 ? n : 1;
}

SimConfig SimConfig::from_config(const KeyValueConfig& kv) {
  SimConfig c;
  c.gravity = kv.get_double("gravity", c.gravity);
  c.dt = kv.get_double("dt", c.dt);
  c.control_dt = kv.get_double("control_dt", c.control_dt);
  c.friction = kv.get_double("friction", c.friction);
  c.contact_stiffness = kv.get_double("contact_stiffness", c.contact_stiffness);
  c.contact_damping = kv.get_double("contact_damping", c.contact_damping);
  c.tangential_damping = kv.get_double("tangential_damping", c.tangential_damping);
  c.kp = kv.get_double("kp", c.kp);
  c.kd = kv.get_double("kd", c.kd);
  c.torque_limit = kv.get_double("torque_limit", c.torque_limit);
  c.base_mass = kv.get_double("base_mass", c.base_mass);
  c.base_inertia.x() = kv.get_double("base_inertia_x", c.base_inertia.x());
  c.base_inertia.y() = kv.get_double("base_inertia_y", c.base_inertia.y());
  c.base_inertia.z() = kv.get_double("base_inertia_z", c.base_inertia.z());
  c.reflected_inertia = kv.get_double("reflected_inertia", c.reflected_inertia);
  if (kv.has("allowed_contacts")) {
    c.allowed_contacts.fill(false);
    std::istringstream ss(kv.get_string("allowed_contacts"));
    std::string item;
    while (std::getline(ss, item, ',')) {
      bool found = false;
      for (int b = 0; b < kNumContactBodies; ++b)
        if (item == contact_body_name(b)) {
          c.allowed_contacts[b] = true;
          found = true;
        }
      if (!found) throw ValidationError("sim config: unknown contact body '" + item + "'");
    }
  }
  if (c.dt <= 0 || c.control_dt <= 0) throw ValidationError("sim config: dt must be > 0");
  if (c.kp < 0 || c.kd < 0) throw ValidationError("sim config: gains must be >= 0");
  if (c.friction < 0) throw ValidationError("sim config: friction must be >= 0");
  return c;
}

SimConfig SimConfig::from_file(const std::string& path) {
  return from_config(KeyValueConfig::from_file(path));
}

KeyValueConfig SimConfig::to_config() const {
  KeyValueConfig kv;
  kv.set_double("gravity", gravity);
  kv.set_double("dt", dt);
  kv.set_double("control_dt", control_dt);
  kv.set_double("friction", friction);
  kv.set_double("contact_stiffness", contact_stiffness);
  kv.set_double("contact_damping", contact_damping);
  kv.set_double("tangential_damping", tangential_damping);
  kv.set_double("kp", kp);
  kv.set_double("kd", kd);
  kv.set_double("torque_limit", torque_limit);
  kv.set_double("base_mass", base_mass);
  kv.set_double("base_inertia_x", base_inertia.x());
  kv.set_double("base_inertia_y", base_inertia.y());
  kv.set_double("base_inertia_z", base_inertia.z());
  kv.set_double("reflected_inertia", reflected_inertia);
  std::string allowed;
  for (int b = 0; b < kNumContactBodies; ++b)
    if (allowed_contacts[b]) {
      if (!allowed.empty()) allowed += ",";
      allowed += contact_body_name(b);
    }
  kv.set("allowed_contacts", allowed);
  return kv;
}

ContactReport detect_contacts(const RobotModel& model, const RobotState& state) {
  ContactReport report;
  const LinkPositions links = fk_links(model, state.base(), state.q);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    report.in_contact[foot_body(leg)] = links.feet[leg].z() < model.foot_radius;
    report.in_contact[knee_body(leg)] = links.knees[leg].z() < model.knee_radius;
    report.in_contact[hip_body(leg)] = links.hips[leg].z() < model.hip_radius;
  }
  double min_corner = 1e9;
  for (const Vec3& c : links.base_corners) min_corner = std::min(min_corner, c.z());
  report.in_contact[kBaseBody] = min_corner < 0.0;
  return report;
}

bool contact_violation(const RobotState& state, const SimConfig& cfg) {
  for (int b = 0; b < kNumContactBodies; ++b)
    if (state.contacts.in_contact[b] && !cfg.allowed_contacts[b]) return true;
  return false;
}

RobotState sim_reset(const RobotModel& model, const SimConfig& cfg, const MotionClip& clip) {
  const ReferenceFrame& f0 = clip.frames.front();
  RobotState s;
  s.position = f0.com;
  s.rotation = orthonormalized(f0.rotation);
  s.q = f0.joints;

  if (clip.frames.size() > 1) {
    const ReferenceFrame& f1 = clip.frames[1];
    s.lin_vel = (f1.com - f0.com) * clip.fps;
    s.qd = (f1.joints - f0.joints) * clip.fps;
    s.ang_vel = so3_log(s.rotation.transpose() * orthonormalized(f1.rotation)) * clip.fps;
  }

  // Feet may not start below ground; lift the base by the worst offender.
  const auto feet = fk_feet(model, s.base(), s.q);
  double lift = 0.0;
  for (int leg = 0; leg < kNumLegs; ++leg)
    lift = std::max(lift, model.foot_radius - feet[leg].z());
  s.position.z() += lift;

  const ContactReport contacts = detect_contacts(model, s);
  for (int b = 0; b < kNumContactBodies; ++b)
    if (contacts.in_contact[b] && !cfg.allowed_contacts[b])
      throw InvalidStart("reset: clip '" + clip.name + "' starts with " +
                         contact_body_name(b) + " below ground");
  s.contacts = contacts;
  return s;
}

RobotState sim_step(const RobotModel& model, const SimConfig& cfg, const RobotState& state,
                    const Vec12& pd_target) {
  RobotState s = state;
  const int n = cfg.substeps();
  const double dt = cfg.dt;
  const Mat3 inertia = cfg.base_inertia.asDiagonal();
  const Mat3 inv_inertia = cfg.base_inertia.cwiseInverse().asDiagonal();

  std::array<Vec3, kNumLegs> last_foot_force{};
  std::array<double, kNumLegs> last_normal{};

  for (int sub = 0; sub < n; ++sub) {
    // PD torques, saturated.
    Vec12 tau;
    for (int j = 0; j < kNumJoints; ++j) {
      const double raw = cfg.kp * (pd_target[j] - s.q[j]) - cfg.kd * s.qd[j];
      tau[j] = std::clamp(raw, -cfg.torque_limit, cfg.torque_limit);
    }

    // Foot penalty contact, accumulated as a base wrench.
    Vec3 force(0.0, 0.0, -cfg.base_mass * cfg.gravity);
    Vec3 torque_world = Vec3::Zero();
    const Vec3 omega_world = s.rotation * s.ang_vel;
    last_foot_force.fill(Vec3::Zero());
    last_normal.fill(0.0);
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const Vec3 q_leg = s.q.segment<3>(3 * leg);
      const Vec3 foot = s.position + s.rotation * fk_foot_base_frame(model, leg, q_leg);
      const double pen = model.foot_radius - foot.z();
      if (pen <= 0.0) continue;
      const Vec3 foot_vel = s.lin_vel + omega_world.cross(foot - s.position) +
                            leg_jacobian(model, s.base(), leg, q_leg) * s.qd.segment<3>(3 * leg);
      double fn = cfg.contact_stiffness * pen + cfg.contact_damping * (-foot_vel.z());
      fn = std::max(fn, 0.0);
      Vec3 ft(-cfg.tangential_damping * foot_vel.x(), -cfg.tangential_damping * foot_vel.y(), 0.0);
      const double ft_mag = ft.norm();
      const double ft_max = cfg.friction * fn;
      if (ft_mag > ft_max) ft *= (ft_mag > 0.0 ? ft_max / ft_mag : 0.0);
      const Vec3 f = ft + Vec3(0.0, 0.0, fn);
      force += f;
      torque_world += (foot - s.position).cross(f);
      last_foot_force[leg] = f;
      last_normal[leg] = fn;
    }

    // Semi-implicit Euler: velocities first, then positions.
    s.lin_vel += dt * force / cfg.base_mass;
    s.position += dt * s.lin_vel;
    const Vec3 torque_base = s.rotation.transpose() * torque_world;
    s.ang_vel += dt * (inv_inertia * (torque_base - s.ang_vel.cross(inertia * s.ang_vel)));
    s.rotation = s.rotation * so3_exp(s.ang_vel * dt);
    for (int j = 0; j < kNumJoints; ++j) {
      s.qd[j] += dt * tau[j] / cfg.reflected_inertia;
      s.q[j] += dt * s.qd[j];
    }

    const double magnitude =
        std::max({s.position.cwiseAbs().maxCoeff(), s.lin_vel.cwiseAbs().maxCoeff(),
                  s.ang_vel.cwiseAbs().maxCoeff(), s.q.cwiseAbs().maxCoeff(),
                  s.qd.cwiseAbs().maxCoeff()});
    if (!std::isfinite(magnitude) || magnitude > 1e6)
      throw SimDiverged("sim_step: state magnitude exceeded 1e6");
  }

  s.rotation = orthonormalized(s.rotation);
  s.contacts = detect_contacts(model, s);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    s.contacts.foot_force[leg] = last_foot_force[leg];
    s.contacts.normal_force[foot_body(leg)] = last_normal[leg];
  }
  return s;
}

std::string state_csv_header() {
  std::string h = "t,x,y,z,qw,qx,qy,qz";
  for (int j = 0; j < kNumJoints; ++j) h += ",q" + std::to_string(j);
  for (int b = 0; b < kNumContactBodies; ++b) h += std::string(",") + contact_body_name(b);
  return h;
}

std::string state_csv_row(double t, const RobotState& state) {
  std::ostringstream os;
  const Eigen::Quaterniond quat(state.rotation);
  os << format_double_short(t) << ',' << format_double(state.position.x()) << ','
     << format_double(state.position.y()) << ',' << format_double(state.position.z()) << ','
     << format_double(quat.w()) << ',' << format_double(quat.x()) << ','
     << format_double(quat.y()) << ',' << format_double(quat.z());
  for (int j = 0; j < kNumJoints; ++j) os << ',' << format_double(state.q[j]);
  for (int b = 0; b < kNumContactBodies; ++b) os << ',' << (state.contacts.in_contact[b] ? 1 : 0);
  return os.str();
}

}  // namespace mimic
