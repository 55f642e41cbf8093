#include "shopper/types.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "shopper/errors.hpp"

namespace shopper {

DepthFrame DepthFrame::filled(int width, int height, std::uint16_t value,
                              std::int64_t timestamp_ms) {
  if (width <= 0 || height <= 0) {
    throw ArgumentError("frame dimensions must be positive");
  }
  DepthFrame frame;
  frame.width = width;
  frame.height = height;
  frame.timestamp_ms = timestamp_ms;
  frame.data.assign(frame.pixel_count(), value);
  return frame;
}

void validate_frame(const DepthFrame& frame) {
  if (frame.width <= 0 || frame.height <= 0) {
    throw FormatError("frame dimensions must be positive");
  }
  if (frame.data.size() != frame.pixel_count()) {
    throw FormatError("frame buffer holds " + std::to_string(frame.data.size()) +
                      " samples, expected " + std::to_string(frame.pixel_count()));
  }
  const auto bad = std::find_if(frame.data.begin(), frame.data.end(),
                                [](std::uint16_t d) { return d >= kMaxDepthMm; });
  if (bad != frame.data.end()) {
    throw FormatError("depth sample " + std::to_string(*bad) + " mm is out of range");
  }
}

void validate_camera(const CameraConfig& config, int width, int height) {
  if (!(config.camera_height_mm > 0.0)) {
    throw ArgumentError("camera_height_mm must be positive");
  }
  if (!(config.fx > 0.0) || !(config.fy > 0.0)) {
    throw ArgumentError("focal lengths must be positive");
  }
  if (config.cx < 0.0 || config.cx >= width || config.cy < 0.0 || config.cy >= height) {
    throw ArgumentError("principal point lies outside the image");
  }
}

std::string_view to_string(InteractionType type) {
  switch (type) {
    case InteractionType::Positive:
      return "positive";
    case InteractionType::Negative:
      return "negative";
    case InteractionType::Neutral:
      return "neutral";
  }
  return "neutral";
}

std::optional<InteractionType> parse_interaction_type(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "positive") return InteractionType::Positive;
  if (lower == "negative") return InteractionType::Negative;
  if (lower == "neutral") return InteractionType::Neutral;
  return std::nullopt;
}

}  // namespace shopper
