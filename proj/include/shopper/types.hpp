#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace shopper {

/// Depths at or above this value (mm) are outside the sensor range.
inline constexpr std::uint16_t kMaxDepthMm = 10000;

/// One top-view depth image. Row-major, millimeters, 0 = no return.
struct DepthFrame {
  int width = 0;
  int height = 0;
  std::int64_t timestamp_ms = 0;
  std::vector<std::uint16_t> data;

  static DepthFrame filled(int width, int height, std::uint16_t value,
                           std::int64_t timestamp_ms = 0);

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(u);
  }
  bool in_bounds(int u, int v) const { return u >= 0 && v >= 0 && u < width && v < height; }
  std::uint16_t at(int u, int v) const { return data[index(u, v)]; }
  std::uint16_t& at(int u, int v) { return data[index(u, v)]; }
  bool same_size(const DepthFrame& other) const {
    return width == other.width && height == other.height;
  }

  friend bool operator==(const DepthFrame&, const DepthFrame&) = default;
};

/// Throws FormatError when the buffer size or a depth value breaks the frame invariants.
void validate_frame(const DepthFrame& frame);

/// Pinhole intrinsics of a ceiling-mounted, downward-looking sensor.
struct CameraConfig {
  std::string camera_id = "cam1";
  double camera_height_mm = 3000.0;
  // 640x480 covering 3.2 m x 1.8 m of floor at 3 m.
  double fx = 600.0;
  double fy = 800.0;
  double cx = 320.0;
  double cy = 240.0;

  friend bool operator==(const CameraConfig&, const CameraConfig&) = default;
};

/// Throws ArgumentError if the intrinsics are inconsistent with a width x height image.
void validate_camera(const CameraConfig& config, int width, int height);

/// World coordinates in millimeters: x, y on the floor plane relative to the
/// optical axis, z height above the floor.
struct WorldPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const WorldPoint&, const WorldPoint&) = default;
};

struct CellIndex {
  int col = 0;
  int row = 0;

  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

enum class InteractionType { Positive, Negative, Neutral };

std::string_view to_string(InteractionType type);
/// Accepts "positive", "negative", "neutral" in any case.
std::optional<InteractionType> parse_interaction_type(std::string_view text);

}  // namespace shopper
