#include "mimic/retarget.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "mimic/config.hpp"

namespace mimic {

namespace {

constexpr char kSourceHeader[] = "# qsource v1";

double foot_clearance(const RobotModel& model, const Vec3& foot_world, double ground) {
  return foot_world.z() - model.foot_radius - ground;
}

BasePose frame_pose(const ReferenceFrame& f) { return BasePose{f.com, f.rotation}; }

}  // namespace

void RetargetConfig::validate() const {
  if (scale <= 0.0) throw ValidationError("retarget config: scale must be > 0");
  if (smoothing_window < 1 || smoothing_window % 2 == 0)
    throw ValidationError("retarget config: smoothing_window must be odd and >= 1");
}

RetargetConfig RetargetConfig::for_type(MotionType type) {
  RetargetConfig cfg;
  cfg.use_knee_hint = (type == MotionType::kSit || type == MotionType::kLie);
  return cfg;
}

void save_source_motion(const SourceMotion& src, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << kSourceHeader << "\n";
  out << "name " << src.name << "\n";
  out << "type " << to_string(src.type) << "\n";
  out << "fps " << format_double(src.fps) << "\n";
  out << "knees " << (src.has_knees ? 1 : 0) << "\n";
  out << "frames " << src.frames.size() << "\n";
  auto put = [&out](const Vec3& v) {
    out << ' ' << format_double(v.x()) << ' ' << format_double(v.y()) << ' '
        << format_double(v.z());
  };
  for (const SourceFrame& f : src.frames) {
    for (int leg = 0; leg < kNumLegs; ++leg) put(f.hips[leg]);
    for (int leg = 0; leg < kNumLegs; ++leg) put(f.feet[leg]);
    const auto r = flatten_row_major(f.rotation);
    for (int i = 0; i < 9; ++i) out << ' ' << format_double(r[i]);
    put(f.com);
    if (src.has_knees)
      for (int leg = 0; leg < kNumLegs; ++leg) put(f.knees[leg]);
    out << "\n";
  }
}

SourceMotion load_source_motion(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kSourceHeader)
    throw ValidationError(path + ": not a source motion file");
  auto header = [&](const char* key) {
    std::string l;
    if (!std::getline(in, l)) throw ValidationError(path + ": missing header " + key);
    std::istringstream ls(l);
    std::string k, rest;
    ls >> k >> rest;
    if (k != key) throw ValidationError(path + ": expected header " + key);
    return rest;
  };
  SourceMotion src;
  src.name = header("name");
  src.type = motion_type_from_string(header("type"));
  src.fps = std::stod(header("fps"));
  src.has_knees = std::stoi(header("knees")) != 0;
  const size_t count = std::stoull(header("frames"));
  src.frames.reserve(count);
  for (size_t k = 0; k < count; ++k) {
    if (!std::getline(in, line))
      throw ValidationError(path + ": missing frame " + std::to_string(k));
    std::istringstream ls(line);
    SourceFrame f;
    auto get = [&](Vec3& v) {
      if (!(ls >> v.x() >> v.y() >> v.z()))
        throw ValidationError(path + ": frame " + std::to_string(k) + " parse failure");
    };
    for (int leg = 0; leg < kNumLegs; ++leg) get(f.hips[leg]);
    for (int leg = 0; leg < kNumLegs; ++leg) get(f.feet[leg]);
    Eigen::Matrix<double, 9, 1> r;
    for (int i = 0; i < 9; ++i)
      if (!(ls >> r[i])) throw ValidationError(path + ": frame " + std::to_string(k) + " parse failure");
    f.rotation = unflatten_row_major(r);
    get(f.com);
    if (src.has_knees)
      for (int leg = 0; leg < kNumLegs; ++leg) get(f.knees[leg]);
    src.frames.push_back(f);
  }
  if (src.fps <= 0.0) throw ValidationError(path + ": fps must be > 0");
  return src;
}

RetargetResult retarget_motion(const SourceMotion& src, const RobotModel& model,
                               const RetargetConfig& cfg) {
  cfg.validate();
  if (src.frames.empty()) throw ValidationError("source '" + src.name + "' has no frames");

  const bool knee_hints = cfg.use_knee_hint && src.has_knees;
  RetargetResult out;
  size_t clamped = 0, projected = 0, front_calf_frames = 0;

  std::vector<ReferenceFrame> frames;
  frames.reserve(src.frames.size());
  for (const SourceFrame& sf : src.frames) {
    ReferenceFrame rf;
    rf.rotation = orthonormalized(sf.rotation);
    rf.com = cfg.scale * sf.com;
    bool front_calf_clamped = false;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const Vec3 target = rf.rotation.transpose() * (cfg.scale * sf.feet[leg] - rf.com);
      IkResult ik;
      if (knee_hints) {
        const Vec3 knee = rf.rotation.transpose() * (cfg.scale * sf.knees[leg] - rf.com);
        ik = ik_leg_with_knee_hint(model, leg, target, knee);
      } else {
        ik = ik_leg(model, leg, target, /*graceful=*/true);
      }
      rf.joints.segment<3>(3 * leg) = ik.angles;
      if (ik.clamped) {
        ++clamped;
        if (leg == kFR || leg == kFL) {
          if (ik.joints_clamped[2]) front_calf_clamped = true;
        }
      }
      if (ik.projected) ++projected;
    }
    if (front_calf_clamped) ++front_calf_frames;
    frames.push_back(rf);
  }

  const double solves = static_cast<double>(src.frames.size() * kNumLegs);
  out.stats.clamped_fraction = clamped / solves;
  out.stats.projected_fraction = projected / solves;
  out.stats.front_calf_clamped_fraction =
      static_cast<double>(front_calf_frames) / static_cast<double>(src.frames.size());
  out.clip = MotionClip::make(src.name, src.type, src.fps, std::move(frames));
  validate_clip(out.clip);
  return out;
}

namespace {

// Rounding guard so feet resting exactly on the ground do not count as
// penetrating and already-fixed clips pass through untouched.
constexpr double kPenetrationDeadband = 1e-12;

// Shared core: lift each frame by lifts[k] (>= its own needed lift), clamp
// foot targets to the ground, re-solve IK. Zero-lift clean frames pass
// through bit-exact.
MotionClip apply_penetration_fix(const MotionClip& clip, const RobotModel& model, double ground,
                                 const std::vector<double>& lifts) {
  std::vector<ReferenceFrame> frames;
  frames.reserve(clip.frames.size());
  for (size_t k = 0; k < clip.frames.size(); ++k) {
    const ReferenceFrame& f = clip.frames[k];
    const auto feet = fk_feet(model, frame_pose(f), f.joints);
    bool any_below = false;
    for (int leg = 0; leg < kNumLegs; ++leg)
      if (foot_clearance(model, feet[leg], ground) < -kPenetrationDeadband) any_below = true;
    if (!any_below && lifts[k] <= kPenetrationDeadband) {
      frames.push_back(f);
      continue;
    }
    ReferenceFrame nf = f;
    nf.com.z() += lifts[k];
    for (int leg = 0; leg < kNumLegs; ++leg) {
      Vec3 target_world = feet[leg];
      target_world.z() = std::max(target_world.z(), ground + model.foot_radius);
      const Vec3 target = nf.rotation.transpose() * (target_world - nf.com);
      nf.joints.segment<3>(3 * leg) = ik_leg(model, leg, target, /*graceful=*/true).angles;
    }
    frames.push_back(nf);
  }
  return MotionClip::make(clip.name, clip.type, clip.fps, std::move(frames));
}

std::vector<double> needed_lifts(const MotionClip& clip, const RobotModel& model, double ground) {
  std::vector<double> lifts(clip.frames.size(), 0.0);
  for (size_t k = 0; k < clip.frames.size(); ++k) {
    const ReferenceFrame& f = clip.frames[k];
    const auto feet = fk_feet(model, frame_pose(f), f.joints);
    double worst = 0.0;
    for (int leg = 0; leg < kNumLegs; ++leg)
      worst = std::max(worst, -foot_clearance(model, feet[leg], ground));
    lifts[k] = worst > kPenetrationDeadband ? worst : 0.0;
  }
  return lifts;
}

std::vector<double> moving_average(const std::vector<double>& xs, int window) {
  const int h = window / 2;
  const int n = static_cast<int>(xs.size());
  std::vector<double> out(xs.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - h);
    const int hi = std::min(n - 1, i + h);
    double sum = 0.0;
    for (int j = lo; j <= hi; ++j) sum += xs[j];
    out[i] = sum / (hi - lo + 1);
  }
  return out;
}

}  // namespace

MotionClip remove_ground_penetration(const MotionClip& clip, const RobotModel& model,
                                     double ground) {
  return apply_penetration_fix(clip, model, ground, needed_lifts(clip, model, ground));
}

double max_ground_penetration(const MotionClip& clip, const RobotModel& model, double ground) {
  double worst = 0.0;
  for (const ReferenceFrame& f : clip.frames) {
    const auto feet = fk_feet(model, frame_pose(f), f.joints);
    for (int leg = 0; leg < kNumLegs; ++leg)
      worst = std::max(worst, -foot_clearance(model, feet[leg], ground));
  }
  return worst;
}

namespace {

struct StanceMask {
  // [frame][leg]
  std::vector<std::array<bool, kNumLegs>> stance;
  std::vector<std::array<Vec3, kNumLegs>> feet;
};

StanceMask stance_analysis(const MotionClip& clip, const RobotModel& model,
                           const RetargetConfig& cfg) {
  StanceMask m;
  const size_t n = clip.frames.size();
  m.stance.resize(n);
  m.feet.resize(n);
  for (size_t k = 0; k < n; ++k) {
    const ReferenceFrame& f = clip.frames[k];
    m.feet[k] = fk_feet(model, frame_pose(f), f.joints);
  }
  for (size_t k = 0; k < n; ++k) {
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const double clear = foot_clearance(model, m.feet[k][leg], cfg.ground_height);
      // Forward-difference horizontal speed; last frame reuses the previous.
      const size_t a = (k + 1 < n) ? k : k - 1;
      const size_t b = (k + 1 < n) ? k + 1 : k;
      const Vec3 d = m.feet[b][leg] - m.feet[a][leg];
      const double speed = n > 1 ? std::hypot(d.x(), d.y()) * clip.fps : 0.0;
      m.stance[k][leg] = clear < 0.005 && speed < cfg.skate_velocity_threshold;
    }
  }
  return m;
}

}  // namespace

double foot_skate_metric(const MotionClip& clip, const RobotModel& model,
                         const RetargetConfig& cfg) {
  const StanceMask m = stance_analysis(clip, model, cfg);
  double worst = 0.0;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    size_t k = 0;
    const size_t n = clip.frames.size();
    while (k < n) {
      if (!m.stance[k][leg]) {
        ++k;
        continue;
      }
      size_t end = k;
      while (end < n && m.stance[end][leg]) ++end;
      const Vec3 onset = m.feet[k][leg];
      for (size_t j = k; j < end; ++j) {
        const Vec3 d = m.feet[j][leg] - onset;
        worst = std::max(worst, std::hypot(d.x(), d.y()));
      }
      k = end;
    }
  }
  return worst;
}

MotionClip cleanup(const MotionClip& clip, const RobotModel& model, const RetargetConfig& cfg) {
  cfg.validate();
  const StanceMask m = stance_analysis(clip, model, cfg);
  const size_t n = clip.frames.size();

  // Pin stance feet to their stance-onset position.
  std::vector<ReferenceFrame> frames(clip.frames);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    size_t k = 0;
    while (k < n) {
      if (!m.stance[k][leg]) {
        ++k;
        continue;
      }
      size_t end = k;
      while (end < n && m.stance[end][leg]) ++end;
      const Vec3 anchor = m.feet[k][leg];
      for (size_t j = k; j < end; ++j) {
        ReferenceFrame& f = frames[j];
        const Vec3 target = f.rotation.transpose() * (anchor - f.com);
        f.joints.segment<3>(3 * leg) = ik_leg(model, leg, target, /*graceful=*/true).angles;
      }
      k = end;
    }
  }

  // Centered moving average over every joint trajectory.
  if (cfg.smoothing_window > 1 && n > 1) {
    std::vector<double> series(n);
    for (int j = 0; j < kNumJoints; ++j) {
      for (size_t k = 0; k < n; ++k) series[k] = frames[k].joints[j];
      const std::vector<double> smooth = moving_average(series, cfg.smoothing_window);
      for (size_t k = 0; k < n; ++k) frames[k].joints[j] = smooth[k];
    }
  }

  MotionClip out = MotionClip::make(clip.name, clip.type, clip.fps, std::move(frames));

  // Final penetration pass; lifts are smoothed so per-frame base
  // adjustments do not jitter, but never below what each frame needs.
  std::vector<double> lifts = needed_lifts(out, model, cfg.ground_height);
  if (cfg.smoothing_window > 1 && n > 1) {
    const std::vector<double> smooth = moving_average(lifts, cfg.smoothing_window);
    for (size_t k = 0; k < n; ++k) lifts[k] = std::max(lifts[k], smooth[k]);
  }
  out = apply_penetration_fix(out, model, cfg.ground_height, lifts);
  validate_clip(out);
  return out;
}

SourceMotion make_source_from_clip(const MotionClip& clip, const RobotModel& model) {
  SourceMotion src;
  src.name = clip.name;
  src.type = clip.type;
  src.fps = clip.fps;
  src.has_knees = true;
  src.frames.reserve(clip.frames.size());
  for (const ReferenceFrame& f : clip.frames) {
    const LinkPositions links = fk_links(model, frame_pose(f), f.joints);
    SourceFrame sf;
    sf.hips = links.hips;
    sf.knees = links.knees;
    sf.feet = links.feet;
    sf.rotation = f.rotation;
    sf.com = f.com;
    src.frames.push_back(sf);
  }
  return src;
}

}  // namespace mimic
