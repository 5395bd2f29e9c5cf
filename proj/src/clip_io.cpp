#include "mimic/clip_io.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mimic/config.hpp"

namespace fs = std::filesystem;

namespace mimic {

namespace {

constexpr char kBinaryMagic[4] = {'Q', 'C', 'L', 'P'};
constexpr uint32_t kFormatVersion = 1;
constexpr char kTextHeader[] = "# qclip v1";

template <typename T>
void write_raw(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in, const std::string& path, const char* what) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ValidationError(path + ": truncated reading " + what);
  return v;
}

void write_string(std::ostream& out, const std::string& s) {
  write_raw<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in, const std::string& path, const char* what) {
  const uint32_t n = read_raw<uint32_t>(in, path, what);
  if (n > (1u << 20)) throw ValidationError(path + ": implausible string length in header");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw ValidationError(path + ": truncated reading " + what);
  return s;
}

std::string header_value(std::istream& in, const std::string& path, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": missing header line '" + key + "'");
  std::istringstream ls(line);
  std::string k;
  ls >> k;
  if (k != key) throw ValidationError(path + ": expected header '" + key + "', got '" + k + "'");
  std::string rest;
  std::getline(ls, rest);
  const size_t a = rest.find_first_not_of(" \t");
  return a == std::string::npos ? "" : rest.substr(a);
}

}  // namespace

void save_clip_text(const MotionClip& clip, const std::string& path) {
  validate_clip(clip);
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << kTextHeader << "\n";
  out << "name " << clip.name << "\n";
  out << "type " << to_string(clip.type) << "\n";
  out << "fps " << format_double(clip.fps) << "\n";
  out << "frames " << clip.frames.size() << "\n";
  for (const ReferenceFrame& f : clip.frames) {
    const auto flat = f.flatten();
    for (int i = 0; i < ReferenceFrame::kDim; ++i) {
      if (i) out << ' ';
      out << format_double(flat[i]);
    }
    out << "\n";
  }
}

void save_clip_binary(const MotionClip& clip, const std::string& path) {
  validate_clip(clip);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out.write(kBinaryMagic, 4);
  write_raw<uint32_t>(out, kFormatVersion);
  write_string(out, clip.name);
  write_string(out, to_string(clip.type));
  write_raw<double>(out, clip.fps);
  write_raw<uint64_t>(out, clip.frames.size());
  for (const ReferenceFrame& f : clip.frames) {
    const auto flat = f.flatten();
    out.write(reinterpret_cast<const char*>(flat.data()), ReferenceFrame::kDim * sizeof(double));
  }
}

namespace {

MotionClip load_clip_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kBinaryMagic, 4) != 0)
    throw ValidationError(path + ": not a binary clip file");
  const uint32_t version = read_raw<uint32_t>(in, path, "version");
  if (version != kFormatVersion)
    throw ValidationError(path + ": unsupported format version " + std::to_string(version));
  const std::string name = read_string(in, path, "name");
  const MotionType type = motion_type_from_string(read_string(in, path, "type"));
  const double fps = read_raw<double>(in, path, "fps");
  const uint64_t count = read_raw<uint64_t>(in, path, "frame count");
  if (count == 0 || count > (1ull << 32)) throw ValidationError(path + ": bad frame count");
  std::vector<ReferenceFrame> frames;
  frames.reserve(count);
  for (uint64_t k = 0; k < count; ++k) {
    Eigen::Matrix<double, ReferenceFrame::kDim, 1> flat;
    in.read(reinterpret_cast<char*>(flat.data()), ReferenceFrame::kDim * sizeof(double));
    if (!in)
      throw ValidationError("clip '" + name + "': truncated at frame " + std::to_string(k));
    frames.push_back(ReferenceFrame::from_flat(flat));
  }
  MotionClip clip = MotionClip::make(name, type, fps, std::move(frames));
  validate_clip(clip);
  return clip;
}

MotionClip load_clip_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::string first;
  if (!std::getline(in, first) || first != kTextHeader)
    throw ValidationError(path + ": not a text clip file (bad header line)");
  const std::string name = header_value(in, path, "name");
  const MotionType type = motion_type_from_string(header_value(in, path, "type"));
  const double fps = std::stod(header_value(in, path, "fps"));
  const uint64_t count = std::stoull(header_value(in, path, "frames"));
  std::vector<ReferenceFrame> frames;
  frames.reserve(count);
  std::string line;
  for (uint64_t k = 0; k < count; ++k) {
    if (!std::getline(in, line))
      throw ValidationError("clip '" + name + "': missing frame " + std::to_string(k));
    std::istringstream ls(line);
    Eigen::Matrix<double, ReferenceFrame::kDim, 1> flat;
    for (int i = 0; i < ReferenceFrame::kDim; ++i) {
      if (!(ls >> flat[i]))
        throw ValidationError("clip '" + name + "': frame " + std::to_string(k) +
                              " parse failure at value " + std::to_string(i));
    }
    double extra;
    if (ls >> extra)
      throw ValidationError("clip '" + name + "': frame " + std::to_string(k) +
                            " has more than 24 values");
    frames.push_back(ReferenceFrame::from_flat(flat));
  }
  MotionClip clip = MotionClip::make(name, type, fps, std::move(frames));
  validate_clip(clip);
  return clip;
}

}  // namespace

MotionClip load_clip(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw ValidationError("cannot open " + path);
  char magic[4] = {0, 0, 0, 0};
  probe.read(magic, 4);
  probe.close();
  if (std::memcmp(magic, kBinaryMagic, 4) == 0) return load_clip_binary(path);
  return load_clip_text(path);
}

Dataset load_dataset(const std::string& dir) {
  if (!fs::exists(dir)) throw ValidationError("dataset path does not exist: " + dir);
  if (!fs::is_directory(dir)) throw ValidationError("dataset path is not a directory: " + dir);
  Dataset dataset;
  const fs::path manifest = fs::path(dir) / "manifest.txt";
  if (!fs::exists(manifest)) {
    std::cerr << "warning: " << dir << " has no manifest.txt, loading empty dataset\n";
    return dataset;
  }
  std::ifstream in(manifest);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string id, type_name, file;
    if (!(ls >> id >> type_name >> file))
      throw ValidationError("manifest line " + std::to_string(lineno) + ": expected <id> <type> <file>");
    MotionClip clip = load_clip((fs::path(dir) / file).string());
    if (clip.name != id)
      throw ValidationError("manifest id '" + id + "' does not match clip name '" + clip.name + "'");
    if (to_string(clip.type) != type_name)
      throw ValidationError("manifest type '" + type_name + "' does not match clip '" + id + "'");
    dataset.add(std::move(clip));
  }
  validate_dataset(dataset);
  return dataset;
}

void write_dataset(const Dataset& dataset, const std::string& dir, bool binary) {
  fs::create_directories(dir);
  std::ofstream manifest(fs::path(dir) / "manifest.txt");
  if (!manifest) throw ValidationError("cannot write manifest in " + dir);
  for (const auto& [id, clip] : dataset.clips) {
    const std::string file = id + (binary ? ".clip.bin" : ".clip.txt");
    const std::string path = (fs::path(dir) / file).string();
    if (binary)
      save_clip_binary(clip, path);
    else
      save_clip_text(clip, path);
    manifest << id << " " << to_string(clip.type) << " " << file << "\n";
  }
}

}  // namespace mimic
