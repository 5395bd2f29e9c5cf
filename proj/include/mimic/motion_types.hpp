#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mimic/rotation.hpp"

namespace mimic {

enum class MotionType {
  kStand,
  kStep,
  kPace,
  kTrot,
  kGallop,
  kJump,
  kTurnLeft,
  kTurnRight,
  kTurnLeftInPlace,
  kTurnRightInPlace,
  kSit,
  kLie,
  kTriangleTrace,
  kStarTrace,
  kRandomMixed,
};

const char* to_string(MotionType type);
MotionType motion_type_from_string(const std::string& name);

// One reference sample: 12 joint angles, base rotation, CoM position in the
// origin frame. Flat layout is (q[12], R row-major[9], x[3]) = 24 values,
// shared by clip files and the observation's reference block.
struct ReferenceFrame {
  static constexpr int kDim = 24;

  Vec12 joints = Vec12::Zero();
  Mat3 rotation = Mat3::Identity();
  Vec3 com = Vec3::Zero();

  Eigen::Matrix<double, kDim, 1> flatten() const;
  static ReferenceFrame from_flat(const Eigen::Matrix<double, kDim, 1>& v);
};

struct MotionClip {
  std::string name;
  MotionType type = MotionType::kStand;
  double fps = 60.0;
  std::vector<ReferenceFrame> frames;
  double duration = 0.0;  // seconds, (frames-1)/fps

  static MotionClip make(std::string name, MotionType type, double fps,
                         std::vector<ReferenceFrame> frames);
};

struct Dataset {
  std::map<std::string, MotionClip> clips;  // keyed by clip name
  std::map<MotionType, int> type_counts;

  void add(MotionClip clip);
  const MotionClip& at(const std::string& id) const;
  std::vector<std::string> ids() const;
  size_t size() const { return clips.size(); }
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Throw ValidationError naming the offending frame/field.
void validate_frame(const ReferenceFrame& frame, const std::string& context);
void validate_clip(const MotionClip& clip);
void validate_dataset(const Dataset& dataset);

}  // namespace mimic
