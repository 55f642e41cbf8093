#include "shopper/depth_io.hpp"

#include <cstdio>
#include <fstream>
#include <system_error>

#include "shopper/errors.hpp"
#include "shopper/pnm.hpp"

namespace shopper {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kIndexName = "index.json";
constexpr const char* kFormatTag = "shopper-depth-sequence";

template <typename T>
T get_field(const json& j, const char* key, const std::string& context) {
  if (!j.contains(key)) {
    throw FormatError(context + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw FormatError(context + ": field '" + key + "' has the wrong type");
  }
}

template <typename T>
void read_optional(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw FormatError(std::string("camera: field '") + key + "' has the wrong type");
  }
}

std::string frame_file_name(std::size_t i) {
  char name[32];
  std::snprintf(name, sizeof name, "frame_%06zu.pgm", i);
  return name;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create directory " + dir.string());
  }
}

void write_index(const fs::path& dir, int width, int height, const CameraConfig& camera,
                 const std::vector<SequenceEntry>& entries) {
  json frames = json::array();
  for (const auto& e : entries) {
    frames.push_back({{"file", e.file}, {"timestamp_ms", e.timestamp_ms}});
  }
  const json index = {{"format", kFormatTag}, {"version", 1},
                      {"width", width},       {"height", height},
                      {"camera", camera_to_json(camera)}, {"frames", frames}};
  std::ofstream out(dir / kIndexName, std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + (dir / kIndexName).string());
  }
  out << index.dump(1) << '\n';
  if (!out) {
    throw IoError("short write to " + (dir / kIndexName).string());
  }
}

}  // namespace

json camera_to_json(const CameraConfig& camera) {
  return {{"camera_id", camera.camera_id}, {"camera_height_mm", camera.camera_height_mm},
          {"fx", camera.fx}, {"fy", camera.fy}, {"cx", camera.cx}, {"cy", camera.cy}};
}

CameraConfig camera_from_json(const json& j, CameraConfig base) {
  if (!j.is_object()) {
    throw FormatError("camera: expected an object");
  }
  read_optional(j, "camera_id", base.camera_id);
  read_optional(j, "camera_height_mm", base.camera_height_mm);
  read_optional(j, "fx", base.fx);
  read_optional(j, "fy", base.fy);
  read_optional(j, "cx", base.cx);
  read_optional(j, "cy", base.cy);
  return base;
}

FrameSource::FrameSource(fs::path dir, int width, int height, CameraConfig camera,
                         std::vector<SequenceEntry> entries)
    : dir_(std::move(dir)),
      width_(width),
      height_(height),
      camera_(std::move(camera)),
      entries_(std::move(entries)) {}

std::optional<DepthFrame> FrameSource::next() {
  if (cursor_ >= entries_.size()) {
    return std::nullopt;
  }
  const SequenceEntry& entry = entries_[cursor_++];
  Gray16Image image = read_pgm(dir_ / entry.file);
  if (image.width != width_ || image.height != height_) {
    throw FormatError(entry.file + ": frame is " + std::to_string(image.width) + "x" +
                      std::to_string(image.height) + " but index declares " +
                      std::to_string(width_) + "x" + std::to_string(height_));
  }
  DepthFrame frame;
  frame.width = width_;
  frame.height = height_;
  frame.timestamp_ms = entry.timestamp_ms;
  frame.data = std::move(image.samples);
  validate_frame(frame);
  return frame;
}

std::vector<DepthFrame> FrameSource::read_all() {
  std::vector<DepthFrame> frames;
  frames.reserve(entries_.size() - cursor_);
  while (auto frame = next()) {
    frames.push_back(std::move(*frame));
  }
  return frames;
}

FrameSource load_sequence(const fs::path& dir) {
  const fs::path index_path = dir / kIndexName;
  std::ifstream in(index_path);
  if (!in) {
    throw FormatError("missing sequence index " + index_path.string());
  }
  json index;
  try {
    index = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(index_path.string() + ": " + e.what());
  }
  const std::string ctx = index_path.string();
  const int width = get_field<int>(index, "width", ctx);
  const int height = get_field<int>(index, "height", ctx);
  if (width <= 0 || height <= 0) {
    throw FormatError(ctx + ": width and height must be positive");
  }
  CameraConfig camera;
  if (index.contains("camera")) {
    camera = camera_from_json(index.at("camera"));
  }
  try {
    validate_camera(camera, width, height);
  } catch (const ArgumentError& e) {
    throw FormatError(ctx + ": " + e.what());
  }
  const auto frames = get_field<json>(index, "frames", ctx);
  if (!frames.is_array() || frames.empty()) {
    throw FormatError(ctx + ": 'frames' must be a non-empty array");
  }
  std::vector<SequenceEntry> entries;
  entries.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string fctx = ctx + ": frames[" + std::to_string(i) + "]";
    SequenceEntry e{get_field<std::string>(frames[i], "file", fctx),
                    get_field<std::int64_t>(frames[i], "timestamp_ms", fctx)};
    if (!entries.empty() && e.timestamp_ms <= entries.back().timestamp_ms) {
      throw FormatError(fctx + ": timestamps must strictly increase");
    }
    if (!fs::is_regular_file(dir / e.file)) {
      throw FormatError(fctx + ": missing frame file " + e.file);
    }
    entries.push_back(std::move(e));
  }
  return FrameSource(dir, width, height, std::move(camera), std::move(entries));
}

void save_sequence(std::span<const DepthFrame> frames, const CameraConfig& camera,
                   const fs::path& dir) {
  if (frames.empty()) {
    throw ArgumentError("save_sequence: no frames");
  }
  SequenceWriter writer(dir, camera);
  for (const auto& frame : frames) {
    writer.write(frame);
  }
  writer.finish();
}

SequenceWriter::SequenceWriter(fs::path dir, CameraConfig camera)
    : dir_(std::move(dir)), camera_(std::move(camera)) {
  ensure_directory(dir_);
}

void SequenceWriter::write(const DepthFrame& frame) {
  validate_frame(frame);
  if (entries_.empty()) {
    width_ = frame.width;
    height_ = frame.height;
    validate_camera(camera_, width_, height_);
  } else if (frame.width != width_ || frame.height != height_) {
    throw ArgumentError("save_sequence: frames differ in dimensions");
  } else if (frame.timestamp_ms <= entries_.back().timestamp_ms) {
    throw ArgumentError("save_sequence: timestamps must strictly increase");
  }
  SequenceEntry entry{frame_file_name(entries_.size()), frame.timestamp_ms};
  write_pgm16(dir_ / entry.file, frame.width, frame.height, frame.data);
  entries_.push_back(std::move(entry));
}

void SequenceWriter::finish() {
  if (entries_.empty()) {
    throw ArgumentError("save_sequence: no frames");
  }
  write_index(dir_, width_, height_, camera_, entries_);
}

}  // namespace shopper
