#include "mimic/kinematics.hpp"

#include <algorithm>
#include <cmath>

namespace mimic {

namespace {

constexpr double kEps = 1e-12;

// Planar chain in the rolled leg frame: x forward, z down the leg.
// px = -Lt sin(t1) - Lc sin(t1+tc), pz = -Lt cos(t1) - Lc cos(t1+tc).
Vec3 leg_chain_point(const RobotModel& model, int leg, const Vec3& q_leg, bool to_foot) {
  const Mat3 roll = rot_x(q_leg[0]);
  Vec3 p = model.mounts[leg] + roll * Vec3(0.0, model.lateral_offset(leg), 0.0);
  p += roll * (rot_y(q_leg[1]) * Vec3(0.0, 0.0, -model.thigh_length));
  if (to_foot) p += roll * (rot_y(q_leg[1] + q_leg[2]) * Vec3(0.0, 0.0, -model.calf_length));
  return p;
}

Vec3 clamp_leg(const RobotModel& model, const Vec3& q_leg, IkResult* res) {
  Vec3 out;
  for (int j = 0; j < 3; ++j) {
    out[j] = std::clamp(q_leg[j], model.limits.lower(j), model.limits.upper(j));
    if (std::abs(out[j] - q_leg[j]) > 1e-12) {
      res->clamped = true;
      res->joints_clamped[j] = true;
    }
  }
  return out;
}

}  // namespace

Vec3 fk_foot_base_frame(const RobotModel& model, int leg, const Vec3& q_leg) {
  return leg_chain_point(model, leg, q_leg, true);
}

Vec3 fk_knee_base_frame(const RobotModel& model, int leg, const Vec3& q_leg) {
  return leg_chain_point(model, leg, q_leg, false);
}

std::array<Vec3, kNumLegs> fk_feet(const RobotModel& model, const BasePose& base, const Vec12& q) {
  std::array<Vec3, kNumLegs> feet;
  for (int leg = 0; leg < kNumLegs; ++leg)
    feet[leg] = base.position + base.rotation * fk_foot_base_frame(model, leg, q.segment<3>(3 * leg));
  return feet;
}

LinkPositions fk_links(const RobotModel& model, const BasePose& base, const Vec12& q) {
  LinkPositions out;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const Vec3 q_leg = q.segment<3>(3 * leg);
    const Mat3 roll = rot_x(q_leg[0]);
    const Vec3 hip_local =
        model.mounts[leg] + roll * Vec3(0.0, model.lateral_offset(leg), 0.0);
    out.hips[leg] = base.position + base.rotation * hip_local;
    out.knees[leg] = base.position + base.rotation * fk_knee_base_frame(model, leg, q_leg);
    out.feet[leg] = base.position + base.rotation * fk_foot_base_frame(model, leg, q_leg);
  }
  const Vec3 h = 0.5 * model.base_box;
  int c = 0;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1})
        out.base_corners[c++] =
            base.position + base.rotation * Vec3(sx * h.x(), sy * h.y(), sz * h.z());
  return out;
}

IkResult ik_leg(const RobotModel& model, int leg, const Vec3& target, bool graceful) {
  IkResult res;
  const Vec3 d = target - model.mounts[leg];
  const double o = model.lateral_offset(leg);
  const double lt = model.thigh_length;
  const double lc = model.calf_length;

  // Abduction: unroll so the foot lies in the leg's sagittal plane at
  // lateral offset o, below the hip.
  double rho2 = d.y() * d.y() + d.z() * d.z();
  double pz;
  double q_hip;
  if (rho2 < o * o + kEps) {
    if (!graceful)
      throw UnreachableTarget("ik_leg: target inside the hip roll cylinder of leg " +
                              std::to_string(leg));
    res.projected = true;
    q_hip = 0.0;
    pz = -1e-6;
  } else {
    pz = -std::sqrt(rho2 - o * o);
    const double alpha = std::atan2(d.z(), d.y());
    const double gamma = std::atan2(pz, o);
    q_hip = alpha - gamma;
    if (q_hip > M_PI) q_hip -= 2.0 * M_PI;
    if (q_hip < -M_PI) q_hip += 2.0 * M_PI;
  }

  // Planar two-link, backward-knee branch (calf < 0).
  const double px = d.x();
  double dist = std::sqrt(px * px + pz * pz);
  const double reach_min = std::abs(lt - lc);
  const double reach_max = lt + lc;
  if (dist < reach_min - 1e-9 || dist > reach_max + 1e-9) {
    if (!graceful)
      throw UnreachableTarget("ik_leg: target at distance " + std::to_string(dist) +
                              " outside [" + std::to_string(reach_min) + ", " +
                              std::to_string(reach_max) + "] for leg " + std::to_string(leg));
    res.projected = true;
  }
  dist = std::clamp(dist, std::max(reach_min, 1e-6), reach_max);

  const double cos_bend = std::clamp((dist * dist - lt * lt - lc * lc) / (2.0 * lt * lc), -1.0, 1.0);
  const double q_calf = -std::acos(cos_bend);
  const double alpha_p = std::atan2(-px, -pz);
  const double cos_psi = std::clamp((lt * lt + dist * dist - lc * lc) / (2.0 * lt * dist), -1.0, 1.0);
  const double q_thigh = alpha_p + std::acos(cos_psi);

  res.angles = clamp_leg(model, Vec3(q_hip, q_thigh, q_calf), &res);
  return res;
}

IkResult ik_leg_with_knee_hint(const RobotModel& model, int leg, const Vec3& target,
                               const Vec3& knee_hint) {
  IkResult res;
  const double o = model.lateral_offset(leg);
  const double lt = model.thigh_length;

  // Roll still comes from the foot target so the stance plane is right.
  const IkResult plain = ik_leg(model, leg, target, /*graceful=*/true);
  const double q_hip = plain.angles[0];
  res.projected = plain.projected;

  const Mat3 unroll = rot_x(-q_hip);
  const Vec3 knee_local = unroll * (knee_hint - model.mounts[leg]) - Vec3(0.0, o, 0.0);
  const Vec3 foot_local = unroll * (target - model.mounts[leg]) - Vec3(0.0, o, 0.0);

  // Thigh points at the knee hint; calf then aims at the foot.
  double q_thigh;
  if (std::abs(knee_local.x()) + std::abs(knee_local.z()) < kEps)
    q_thigh = plain.angles[1];
  else
    q_thigh = std::atan2(-knee_local.x(), -knee_local.z());
  const Vec3 knee_on_chain(-lt * std::sin(q_thigh), 0.0, -lt * std::cos(q_thigh));
  const Vec3 v = foot_local - knee_on_chain;
  double q_calf;
  if (std::abs(v.x()) + std::abs(v.z()) < kEps)
    q_calf = plain.angles[2];
  else
    q_calf = std::atan2(-v.x(), -v.z()) - q_thigh;
  while (q_calf > M_PI) q_calf -= 2.0 * M_PI;
  while (q_calf < -M_PI) q_calf += 2.0 * M_PI;

  res.angles = clamp_leg(model, Vec3(q_hip, q_thigh, q_calf), &res);
  return res;
}

Mat3 leg_jacobian(const RobotModel& model, const BasePose& base, int leg, const Vec3& q_leg) {
  const Mat3 roll = rot_x(q_leg[0]);
  const Vec3 mount_w = base.position + base.rotation * model.mounts[leg];
  const Vec3 hip_w = base.position +
                     base.rotation * (model.mounts[leg] + roll * Vec3(0.0, model.lateral_offset(leg), 0.0));
  const Vec3 knee_w = base.position + base.rotation * fk_knee_base_frame(model, leg, q_leg);
  const Vec3 foot_w = base.position + base.rotation * fk_foot_base_frame(model, leg, q_leg);

  const Vec3 roll_axis = base.rotation * Vec3::UnitX();
  const Vec3 pitch_axis = base.rotation * (roll * Vec3::UnitY());

  Mat3 j;
  j.col(0) = roll_axis.cross(foot_w - mount_w);
  j.col(1) = pitch_axis.cross(foot_w - hip_w);
  j.col(2) = pitch_axis.cross(foot_w - knee_w);
  return j;
}

}  // namespace mimic
