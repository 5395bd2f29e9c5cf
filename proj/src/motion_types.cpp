#include "mimic/motion_types.hpp"

#include <cmath>

#include "mimic/config.hpp"

namespace mimic {

namespace {

struct TypeName {
  MotionType type;
  const char* name;
};

constexpr TypeName kTypeNames[] = {
    {MotionType::kStand, "stand"},
    {MotionType::kStep, "step"},
    {MotionType::kPace, "pace"},
    {MotionType::kTrot, "trot"},
    {MotionType::kGallop, "gallop"},
    {MotionType::kJump, "jump"},
    {MotionType::kTurnLeft, "turn-left"},
    {MotionType::kTurnRight, "turn-right"},
    {MotionType::kTurnLeftInPlace, "turn-left-in-place"},
    {MotionType::kTurnRightInPlace, "turn-right-in-place"},
    {MotionType::kSit, "sit"},
    {MotionType::kLie, "lie"},
    {MotionType::kTriangleTrace, "triangle-trace"},
    {MotionType::kStarTrace, "star-trace"},
    {MotionType::kRandomMixed, "random-mixed"},
};

}  // namespace

const char* to_string(MotionType type) {
  for (const auto& tn : kTypeNames)
    if (tn.type == type) return tn.name;
  return "unknown";
}

MotionType motion_type_from_string(const std::string& name) {
  for (const auto& tn : kTypeNames)
    if (name == tn.name) return tn.type;
  throw ValidationError("unknown motion type: " + name);
}

Eigen::Matrix<double, ReferenceFrame::kDim, 1> ReferenceFrame::flatten() const {
  Eigen::Matrix<double, kDim, 1> v;
  v.segment<12>(0) = joints;
  v.segment<9>(12) = flatten_row_major(rotation);
  v.segment<3>(21) = com;
  return v;
}

ReferenceFrame ReferenceFrame::from_flat(const Eigen::Matrix<double, kDim, 1>& v) {
  ReferenceFrame f;
  f.joints = v.segment<12>(0);
  f.rotation = unflatten_row_major(Eigen::Matrix<double, 9, 1>(v.segment<9>(12)));
  f.com = v.segment<3>(21);
  return f;
}

MotionClip MotionClip::make(std::string name, MotionType type, double fps,
                            std::vector<ReferenceFrame> frames) {
  MotionClip clip;
  clip.name = std::move(name);
  clip.type = type;
  clip.fps = fps;
  clip.frames = std::move(frames);
  clip.duration = clip.frames.empty() ? 0.0
                                      : static_cast<double>(clip.frames.size() - 1) / fps;
  return clip;
}

void Dataset::add(MotionClip clip) {
  if (clips.count(clip.name))
    throw ValidationError("dataset: duplicate clip id '" + clip.name + "'");
  type_counts[clip.type] += 1;
  clips.emplace(clip.name, std::move(clip));
}

const MotionClip& Dataset::at(const std::string& id) const {
  auto it = clips.find(id);
  if (it == clips.end()) throw ValidationError("dataset: no clip with id '" + id + "'");
  return it->second;
}

std::vector<std::string> Dataset::ids() const {
  std::vector<std::string> out;
  out.reserve(clips.size());
  for (const auto& [id, clip] : clips) out.push_back(id);
  return out;
}

void validate_frame(const ReferenceFrame& frame, const std::string& context) {
  for (int i = 0; i < 12; ++i)
    if (!std::isfinite(frame.joints[i]))
      throw ValidationError(context + ": joint " + std::to_string(i) + " not finite");
  if (!frame.rotation.allFinite() || !frame.com.allFinite())
    throw ValidationError(context + ": rotation/com not finite");
  const double ortho = (frame.rotation.transpose() * frame.rotation - Mat3::Identity()).norm();
  if (ortho > 1e-8)
    throw ValidationError(context + ": rotation not orthonormal, |R'R - I| = " +
                          format_double_short(ortho));
  const double det = frame.rotation.determinant();
  if (std::abs(det - 1.0) > 1e-8)
    throw ValidationError(context + ": rotation determinant " + format_double_short(det));
}

void validate_clip(const MotionClip& clip) {
  if (clip.fps <= 0.0) throw ValidationError("clip '" + clip.name + "': fps must be > 0");
  if (clip.frames.empty()) throw ValidationError("clip '" + clip.name + "': no frames");
  const double expected = static_cast<double>(clip.frames.size() - 1) / clip.fps;
  if (std::abs(clip.duration - expected) > 1e-9)
    throw ValidationError("clip '" + clip.name + "': duration " + format_double_short(clip.duration) +
                          " inconsistent with " + std::to_string(clip.frames.size()) + " frames at fps " +
                          format_double_short(clip.fps));
  for (size_t i = 0; i < clip.frames.size(); ++i)
    validate_frame(clip.frames[i], "clip '" + clip.name + "' frame " + std::to_string(i));
}

void validate_dataset(const Dataset& dataset) {
  std::map<MotionType, int> counts;
  for (const auto& [id, clip] : dataset.clips) {
    if (id != clip.name)
      throw ValidationError("dataset: id '" + id + "' does not match clip name '" + clip.name + "'");
    validate_clip(clip);
    counts[clip.type] += 1;
  }
  if (counts != dataset.type_counts)
    throw ValidationError("dataset: type_counts inconsistent with clips");
}

}  // namespace mimic
