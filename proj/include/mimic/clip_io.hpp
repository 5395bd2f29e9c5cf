#pragma once

#include <string>

#include "mimic/motion_types.hpp"

namespace mimic {

// Clip files are self-describing: a header (format version, name, motion
// type, fps, frame count) followed by frame_count records of 24 numbers in
// flat frame order. Two encodings share the schema:
//   *.clip.txt  one frame per line, space separated, 17 significant digits
//   *.clip.bin  little-endian 8-byte floats after a "QCLP" magic header
// A dataset directory holds clip files plus manifest.txt with one
// "<id> <type> <file>" line per clip.

void save_clip_text(const MotionClip& clip, const std::string& path);
void save_clip_binary(const MotionClip& clip, const std::string& path);
MotionClip load_clip(const std::string& path);  // sniffs encoding

Dataset load_dataset(const std::string& dir);
void write_dataset(const Dataset& dataset, const std::string& dir, bool binary = false);

}  // namespace mimic
