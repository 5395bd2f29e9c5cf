#include "mimic/synthesize.hpp"

#include <cmath>
#include <stdexcept>

namespace mimic {

namespace {

double smoothstep(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

struct PathState {
  Vec3 com;       // world CoM (z filled by the gait)
  double heading; // yaw
};

// Closed-form integral of constant speed along a constant-rate heading.
PathState path_at(const GaitSpec& spec, double t) {
  PathState s;
  s.heading = spec.initial_heading + spec.yaw_rate * t;
  if (std::abs(spec.yaw_rate) < 1e-12) {
    s.com = Vec3(spec.speed * t * std::cos(spec.initial_heading),
                 spec.speed * t * std::sin(spec.initial_heading), 0.0);
  } else {
    const double r = spec.speed / spec.yaw_rate;
    s.com = Vec3(r * (std::sin(s.heading) - std::sin(spec.initial_heading)),
                 r * (-std::cos(s.heading) + std::cos(spec.initial_heading)), 0.0);
  }
  return s;
}

// Ground point under a leg's thigh axis at time t.
Vec3 ground_home(const GaitSpec& spec, const RobotModel& model, int leg, double t) {
  const PathState s = path_at(spec, t);
  const Vec3 local = model.mounts[leg] + Vec3(0.0, model.lateral_offset(leg), 0.0);
  Vec3 p = s.com + rot_z(s.heading) * local;
  p.z() = model.foot_radius;
  return p;
}

struct CycleParams {
  double frequency;
  double duty;
  double step_height;
  std::array<double, kNumLegs> phase_offset;  // FR, FL, RR, RL
};

CycleParams cycle_for(const GaitSpec& spec) {
  CycleParams c;
  switch (spec.type) {
    case MotionType::kPace:
      c = {1.6, 0.62, 0.04, {0.0, 0.5, 0.0, 0.5}};
      break;
    case MotionType::kStep:
      c = {1.2, 0.75, 0.03, {0.0, 0.5, 0.5, 0.0}};
      break;
    default:  // trot and the turns
      c = {2.0, 0.56, 0.05, {0.0, 0.5, 0.5, 0.0}};
      break;
  }
  if (spec.step_frequency > 0) c.frequency = spec.step_frequency;
  if (spec.duty_factor > 0) c.duty = spec.duty_factor;
  if (spec.step_height > 0) c.step_height = spec.step_height;
  return c;
}

Vec12 solve_legs(const RobotModel& model, const BasePose& base,
                 const std::array<Vec3, kNumLegs>& targets_world) {
  Vec12 q;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const Vec3 local = base.rotation.transpose() * (targets_world[leg] - base.position);
    q.segment<3>(3 * leg) = ik_leg(model, leg, local).angles;
  }
  return q;
}

ReferenceFrame make_frame(const BasePose& base, const Vec12& q) {
  ReferenceFrame f;
  f.joints = q;
  f.rotation = base.rotation;
  f.com = base.position;
  return f;
}

// Cyclic walking gaits: stance feet hold world anchors sampled at
// mid-stance, swing feet blend to the next anchor with a half-sine lift.
ReferenceFrame walk_frame(const GaitSpec& spec, const RobotModel& model, const CycleParams& cyc,
                          double h0, double t) {
  const PathState s = path_at(spec, t);
  BasePose base;
  base.position = Vec3(s.com.x(), s.com.y(), h0);
  base.rotation = rot_z(s.heading);

  std::array<Vec3, kNumLegs> targets;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const double sphase = cyc.frequency * t - cyc.phase_offset[leg] + 1.0;
    const double k = std::floor(sphase);
    const double phi = sphase - k;
    const auto mid_stance_time = [&](double cycle) {
      return (cycle + 0.5 * cyc.duty + cyc.phase_offset[leg] - 1.0) / cyc.frequency;
    };
    if (phi < cyc.duty) {
      targets[leg] = ground_home(spec, model, leg, mid_stance_time(k));
    } else {
      const double u = (phi - cyc.duty) / (1.0 - cyc.duty);
      const Vec3 a = ground_home(spec, model, leg, mid_stance_time(k));
      const Vec3 b = ground_home(spec, model, leg, mid_stance_time(k + 1.0));
      Vec3 p = a + smoothstep(u) * (b - a);
      p.z() = model.foot_radius + cyc.step_height * std::sin(M_PI * u);
      targets[leg] = p;
    }
  }
  return make_frame(base, solve_legs(model, base, targets));
}

// One jump cycle: crouch, push off, ballistic flight, absorb, recover.
struct JumpProfile {
  double period = 1.25;
  double crouch_end = 0.35;
  double push_end = 0.47;
  double crouch_depth = 0.05;
  double takeoff_speed = 0.7;  // m/s vertical

  double flight_time() const { return 2.0 * takeoff_speed / 9.81; }
  double land_time() const { return push_end + flight_time(); }

  // Base height offset relative to standing height.
  double height_offset(double tau) const {
    const double push_rise = 0.5 * takeoff_speed * (push_end - crouch_end);
    if (tau < crouch_end) return -crouch_depth * smoothstep(tau / crouch_end);
    if (tau < push_end) {
      const double w = (tau - crouch_end) / (push_end - crouch_end);
      return -crouch_depth + push_rise * w * w;
    }
    const double z_to = -crouch_depth + push_rise;
    if (tau < land_time()) {
      const double w = tau - push_end;
      return z_to + takeoff_speed * w - 0.5 * 9.81 * w * w;
    }
    const double absorb = 0.12;
    const double dip = 0.5 * takeoff_speed * absorb;
    if (tau < land_time() + absorb) {
      const double w = tau - land_time();
      return z_to - takeoff_speed * w + 0.5 * (takeoff_speed / absorb) * w * w;
    }
    const double u = (tau - land_time() - absorb) / std::max(period - land_time() - absorb, 1e-9);
    return (z_to - dip) + (0.0 - (z_to - dip)) * smoothstep(u);
  }
};

ReferenceFrame jump_frame(const GaitSpec& spec, const RobotModel& model, const JumpProfile& jp,
                          double h0, double t) {
  const PathState s = path_at(spec, t);
  const double tau = t - jp.period * std::floor(t / jp.period);
  BasePose base;
  base.position = Vec3(s.com.x(), s.com.y(), h0 + jp.height_offset(tau));
  base.rotation = rot_z(s.heading);

  const double cycle = std::floor(t / jp.period);
  std::array<Vec3, kNumLegs> targets;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    // Ground stretch of cycle k spans [k*T + land, (k+1)*T + push_end).
    const auto anchor = [&](double k) {
      const double mid = (k * jp.period + jp.land_time() + (k + 1.0) * jp.period + jp.push_end) / 2.0;
      return ground_home(spec, model, leg, mid);
    };
    if (tau < jp.push_end) {
      targets[leg] = anchor(cycle - 1.0);
    } else if (tau < jp.land_time()) {
      const double u = (tau - jp.push_end) / jp.flight_time();
      const Vec3 a = anchor(cycle - 1.0);
      const Vec3 b = anchor(cycle);
      Vec3 p = a + smoothstep(u) * (b - a);
      p.z() = model.foot_radius + 0.06 * std::sin(M_PI * u);
      targets[leg] = p;
    } else {
      targets[leg] = anchor(cycle);
    }
  }
  return make_frame(base, solve_legs(model, base, targets));
}

// Sit: pitch nose-up about the front-axle ground line; feet stay planted.
ReferenceFrame sit_frame(const GaitSpec& spec, const RobotModel& model, double h0, double t) {
  const double beta_max = 0.2;
  const double beta = beta_max * smoothstep(t / 1.5);
  const Mat3 r0 = rot_z(spec.initial_heading);
  const Vec3 base0(0.0, 0.0, h0);
  const Vec3 pivot = r0 * Vec3(model.mounts[kFR].x(), 0.0, 0.0) + Vec3(0.0, 0.0, model.foot_radius);

  BasePose base;
  const Mat3 pitch = r0 * rot_y(-beta) * r0.transpose();
  base.rotation = pitch * r0;
  base.position = pivot + pitch * (base0 - pivot);

  std::array<Vec3, kNumLegs> targets;
  for (int leg = 0; leg < kNumLegs; ++leg) targets[leg] = ground_home(spec, model, leg, 0.0);
  return make_frame(base, solve_legs(model, base, targets));
}

// Lie: scripted joint fold; base height follows FK so feet stay on ground.
ReferenceFrame lie_frame(const GaitSpec& spec, const RobotModel& model, double t) {
  const double u = smoothstep(t / 1.5);
  Vec12 folded;
  folded << -0.01, -0.05, -2.05, 0.01, -0.05, -2.05, -0.01, -0.05, -2.05, 0.01, -0.05, -2.05;
  const Vec12 q = (1.0 - u) * nominal_stand_pose() + u * folded;

  double min_z = 1e9;
  for (int leg = 0; leg < kNumLegs; ++leg)
    min_z = std::min(min_z, fk_foot_base_frame(model, leg, q.segment<3>(3 * leg)).z());
  BasePose base;
  base.rotation = rot_z(spec.initial_heading);
  base.position = Vec3(0.0, 0.0, model.foot_radius - min_z);
  return make_frame(base, q);
}

}  // namespace

double standing_base_height(const RobotModel& model) {
  const Vec12 q = nominal_stand_pose();
  double min_z = 1e9;
  for (int leg = 0; leg < kNumLegs; ++leg)
    min_z = std::min(min_z, fk_foot_base_frame(model, leg, q.segment<3>(3 * leg)).z());
  return model.foot_radius - min_z;
}

MotionClip synthesize_clip(const GaitSpec& spec, const RobotModel& model) {
  if (spec.duration <= 0.0) throw std::invalid_argument("gait spec: duration must be > 0");
  if (spec.fps <= 0.0) throw std::invalid_argument("gait spec: fps must be > 0");
  switch (spec.type) {
    case MotionType::kStand:
    case MotionType::kStep:
    case MotionType::kPace:
    case MotionType::kTrot:
    case MotionType::kJump:
    case MotionType::kTurnLeft:
    case MotionType::kTurnRight:
    case MotionType::kTurnLeftInPlace:
    case MotionType::kTurnRightInPlace:
    case MotionType::kSit:
    case MotionType::kLie:
      break;
    default:
      throw std::invalid_argument(std::string("gait spec: unsupported type ") + to_string(spec.type));
  }

  GaitSpec gs = spec;
  switch (gs.type) {
    case MotionType::kStand:
    case MotionType::kSit:
    case MotionType::kLie:
      gs.speed = 0.0;
      gs.yaw_rate = 0.0;
      break;
    case MotionType::kStep:
      gs.speed = 0.0;
      break;
    case MotionType::kTurnLeft:
      if (gs.yaw_rate == 0.0) gs.yaw_rate = 0.3;
      break;
    case MotionType::kTurnRight:
      if (gs.yaw_rate == 0.0) gs.yaw_rate = -0.3;
      break;
    case MotionType::kTurnLeftInPlace:
      gs.speed = 0.0;
      if (gs.yaw_rate == 0.0) gs.yaw_rate = 0.8;
      break;
    case MotionType::kTurnRightInPlace:
      gs.speed = 0.0;
      if (gs.yaw_rate == 0.0) gs.yaw_rate = -0.8;
      break;
    default:
      break;
  }

  const double h0 = standing_base_height(model);
  const CycleParams cyc = cycle_for(gs);
  const JumpProfile jp;
  const int n = static_cast<int>(std::llround(gs.duration * gs.fps)) + 1;

  std::vector<ReferenceFrame> frames;
  frames.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / gs.fps;
    switch (gs.type) {
      case MotionType::kStand: {
        const PathState s = path_at(gs, t);
        BasePose base{Vec3(s.com.x(), s.com.y(), h0), rot_z(s.heading)};
        frames.push_back(make_frame(base, nominal_stand_pose()));
        break;
      }
      case MotionType::kJump:
        frames.push_back(jump_frame(gs, model, jp, h0, t));
        break;
      case MotionType::kSit:
        frames.push_back(sit_frame(gs, model, h0, t));
        break;
      case MotionType::kLie:
        frames.push_back(lie_frame(gs, model, t));
        break;
      default:
        frames.push_back(walk_frame(gs, model, cyc, h0, t));
        break;
    }
  }
  MotionClip clip = MotionClip::make(gs.name, gs.type, gs.fps, std::move(frames));
  validate_clip(clip);
  return clip;
}

}  // namespace mimic
