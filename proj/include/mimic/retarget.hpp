#pragma once

#include <array>
#include <string>
#include <vector>

#include "mimic/kinematics.hpp"
#include "mimic/motion_types.hpp"

namespace mimic {

// Source-skeleton keypoints for one frame, in source scale.
struct SourceFrame {
  std::array<Vec3, kNumLegs> hips;
  std::array<Vec3, kNumLegs> feet;
  std::array<Vec3, kNumLegs> knees;  // meaningful iff SourceMotion::has_knees
  Mat3 rotation = Mat3::Identity();
  Vec3 com = Vec3::Zero();
};

struct SourceMotion {
  std::string name;
  MotionType type = MotionType::kStand;
  double fps = 60.0;
  bool has_knees = false;
  std::vector<SourceFrame> frames;
};

void save_source_motion(const SourceMotion& src, const std::string& path);
SourceMotion load_source_motion(const std::string& path);

struct RetargetConfig {
  double scale = 1.0;                    // multiplies every source coordinate
  bool use_knee_hint = false;            // motion-type-aware IK
  double ground_height = 0.0;            // ground plane (m)
  double skate_velocity_threshold = 0.05;  // m/s horizontal, during stance
  int smoothing_window = 5;              // frames, odd

  void validate() const;
  // sit and lie retarget with knee hints; other types use plain IK.
  static RetargetConfig for_type(MotionType type);
};

struct RetargetStats {
  double clamped_fraction = 0.0;  // (frame,leg) IK solves that hit a limit
  double front_calf_clamped_fraction = 0.0;  // frames with a clamped front calf
  double projected_fraction = 0.0;           // unreachable targets projected
};

struct RetargetResult {
  MotionClip clip;
  RetargetStats stats;
};

// Keypoints -> robot clip: scale, keep base pose, per-leg IK on the scaled
// foot targets (knee-hinted when enabled and knees are present).
RetargetResult retarget_motion(const SourceMotion& src, const RobotModel& model,
                               const RetargetConfig& cfg);

// Lift the base minimally per frame so no foot is below the ground plane,
// then re-solve IK toward the original (height-clamped) foot positions.
// Frames without penetration pass through unchanged.
MotionClip remove_ground_penetration(const MotionClip& clip, const RobotModel& model,
                                     double ground);

// Foot-skate pinning plus joint smoothing. Stance feet (low and slow) are
// pinned to their stance-onset position via IK; all joint trajectories get a
// centered moving average; a final penetration pass (with smoothed lifts)
// keeps the result on the right side of the ground.
MotionClip cleanup(const MotionClip& clip, const RobotModel& model, const RetargetConfig& cfg);

// Worst-case foot penetration below the ground plane (0 when clean).
double max_ground_penetration(const MotionClip& clip, const RobotModel& model, double ground);

// Largest horizontal drift of any stance-segment foot (the skate metric).
double foot_skate_metric(const MotionClip& clip, const RobotModel& model,
                         const RetargetConfig& cfg);

// FK a clip back into keypoints; handy for building test sources and for
// round-trip checks against a differently scaled model.
SourceMotion make_source_from_clip(const MotionClip& clip, const RobotModel& model);

}  // namespace mimic
