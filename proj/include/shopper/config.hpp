#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shopper/background.hpp"
#include "shopper/detection.hpp"
#include "shopper/heatmap.hpp"
#include "shopper/interaction.hpp"
#include "shopper/tracking.hpp"

namespace shopper {

/// cam.* keys; unset fields keep the value stored with the sequence.
struct CameraOverrides {
  std::optional<std::string> camera_id;
  std::optional<double> camera_height_mm;
  std::optional<double> fx;
  std::optional<double> fy;
  std::optional<double> cx;
  std::optional<double> cy;

  CameraConfig apply(CameraConfig base) const;
};

struct PipelineConfig {
  CameraOverrides camera;
  BackgroundParams background;
  DetectionParams detection;
  TrackerParams tracking;
  InteractionParams interaction;
  std::vector<ShelfZone> zones{ShelfZone{}};
  PlanogramMapping map;
  std::int64_t zone_min_dwell_ms = 500;
};

/// INI-style text: "section.key = value" lines, optionally grouped under
/// "[section]" headers. '#' and ';' start comment lines. Any zone.* key
/// replaces the default zone list. Throws FormatError naming the key.
PipelineConfig parse_config(const std::string& text, const std::string& source = "config");
/// Throws IoError if the file cannot be read.
PipelineConfig load_config(const std::filesystem::path& path);

/// Effective values in the same syntax; parse_config inverts it.
std::string dump_config(const PipelineConfig& config);

/// Checks every parameter set against the frame size and camera.
void validate_config(const PipelineConfig& config, int width, int height,
                     const CameraConfig& camera);

const ShelfZone* find_zone(const PipelineConfig& config, const std::string& zone_id);

}  // namespace shopper
