#pragma once

// Sequence directories: index.json plus one 16-bit PGM per frame.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "shopper/types.hpp"

namespace shopper {

nlohmann::json camera_to_json(const CameraConfig& camera);
/// Missing keys keep their defaults; wrong types raise FormatError naming the key.
CameraConfig camera_from_json(const nlohmann::json& j, CameraConfig base = {});

struct SequenceEntry {
  std::string file;
  std::int64_t timestamp_ms = 0;
};

/// Single-consumer iterator over the frames of a sequence directory.
/// Frames are read lazily; each is checked against the index dimensions.
class FrameSource {
 public:
  FrameSource(std::filesystem::path dir, int width, int height, CameraConfig camera,
              std::vector<SequenceEntry> entries);

  const CameraConfig& camera() const { return camera_; }
  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<SequenceEntry>& entries() const { return entries_; }

  /// Next frame in timestamp order, or nullopt when exhausted.
  std::optional<DepthFrame> next();
  std::vector<DepthFrame> read_all();

 private:
  std::filesystem::path dir_;
  int width_;
  int height_;
  CameraConfig camera_;
  std::vector<SequenceEntry> entries_;
  std::size_t cursor_ = 0;
};

/// Opens a sequence directory. Throws FormatError on a missing or malformed
/// index, missing frame files or non-increasing timestamps.
FrameSource load_sequence(const std::filesystem::path& dir);

/// Writes index.json and frame_NNNNNN.pgm files. Throws ArgumentError for an
/// empty or ragged frame list and IoError if the directory is not writable.
void save_sequence(std::span<const DepthFrame> frames, const CameraConfig& camera,
                   const std::filesystem::path& dir);

/// Incremental writer used when frames are produced one at a time.
class SequenceWriter {
 public:
  SequenceWriter(std::filesystem::path dir, CameraConfig camera);
  void write(const DepthFrame& frame);
  /// Writes index.json. Throws ArgumentError if no frame was written.
  void finish();

 private:
  std::filesystem::path dir_;
  CameraConfig camera_;
  int width_ = 0;
  int height_ = 0;
  std::vector<SequenceEntry> entries_;
};

}  // namespace shopper
