#include "mimic/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace mimic {

ReferenceFrame sample_frame(const MotionClip& clip, double t) {
  const int last = static_cast<int>(clip.frames.size()) - 1;
  if (last <= 0) return clip.frames.front();
  double s = t * clip.fps;
  // Snap to the grid so t = k/fps reproduces frame k bit-exactly despite
  // the k/fps*fps rounding.
  const double snapped = std::round(s);
  if (std::abs(s - snapped) < 1e-9 * std::max(1.0, std::abs(s))) s = snapped;
  if (s <= 0.0) return clip.frames.front();
  if (s >= last) return clip.frames.back();
  const int k = static_cast<int>(std::floor(s));
  const double u = s - k;
  if (u == 0.0) return clip.frames[k];
  const ReferenceFrame& a = clip.frames[k];
  const ReferenceFrame& b = clip.frames[k + 1];
  ReferenceFrame out;
  out.joints = (1.0 - u) * a.joints + u * b.joints;
  out.com = (1.0 - u) * a.com + u * b.com;
  out.rotation = slerp_rotation(a.rotation, b.rotation, u);
  return out;
}

ReferenceWindow sample_window(const MotionClip& clip, double t) {
  return sample_window_at(clip, t,
                          std::vector<double>(kWindowOffsets.begin(), kWindowOffsets.end()));
}

ReferenceWindow sample_window_at(const MotionClip& clip, double t,
                                 const std::vector<double>& offsets) {
  ReferenceWindow w;
  w.frames.reserve(offsets.size());
  for (double off : offsets) {
    const double tq = std::clamp(t + off, 0.0, clip.duration);
    w.frames.push_back(sample_frame(clip, tq));
  }
  return w;
}

}  // namespace mimic
