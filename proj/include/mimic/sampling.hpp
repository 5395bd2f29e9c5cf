#pragma once

#include <array>

#include "mimic/motion_types.hpp"

namespace mimic {

// Offsets (seconds) of the reference window around the query time. The
// current frame is deliberately absent.
constexpr std::array<double, 8> kWindowOffsets = {-1.0, -0.5, -0.2, -0.02,
                                                  0.02, 0.2,  0.5,  1.0};

struct ReferenceWindow {
  std::vector<ReferenceFrame> frames;  // one per offset, in offset order

  VecX flatten() const {
    VecX v(static_cast<int>(frames.size()) * ReferenceFrame::kDim);
    for (size_t i = 0; i < frames.size(); ++i)
      v.segment<ReferenceFrame::kDim>(static_cast<int>(i) * ReferenceFrame::kDim) =
          frames[i].flatten();
    return v;
  }
};

// Interpolated reference at time t. Joints and CoM are linear, rotation is
// geodesic (slerp). t clamps to [0, duration]; exact frame times return the
// stored frame unchanged.
ReferenceFrame sample_frame(const MotionClip& clip, double t);

// Window at the fixed kWindowOffsets; offsets outside the clip clamp to the
// first/last frame.
ReferenceWindow sample_window(const MotionClip& clip, double t);

// Window at caller-picked offsets (observation ablations).
ReferenceWindow sample_window_at(const MotionClip& clip, double t,
                                 const std::vector<double>& offsets);

}  // namespace mimic
