#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "shopper/background.hpp"
#include "shopper/types.hpp"

namespace shopper {

struct PixelCoord {
  int u = 0;
  int v = 0;

  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

struct BoundingBox {
  int u_min = 0;
  int v_min = 0;
  int u_max = 0;
  int v_max = 0;

  bool contains(int u, int v) const {
    return u >= u_min && u <= u_max && v >= v_min && v <= v_max;
  }
};

/// Apex of a blob: its nearest (minimum depth) pixel.
struct HeadPoint {
  int u = 0;
  int v = 0;
  std::uint16_t depth_mm = 0;
};

/// One 8-connected foreground component.
struct Blob {
  std::size_t pixel_count = 0;
  BoundingBox bbox;
  std::vector<PixelCoord> contour;  // Moore boundary trace, clockwise
  HeadPoint head;
  double centroid_u = 0.0;
  double centroid_v = 0.0;
  std::vector<std::uint32_t> pixels;  // linear indices v*width+u, ascending

  bool contains(int u, int v, int width) const;
};

struct DetectionParams {
  std::size_t min_blob_area = 400;
  double jump_mm = 150.0;
  int ring_radius_px = 72;
  double height_min_mm = 800.0;
  double height_max_mm = 2200.0;
  int border_margin_px = 64;  // heads closer than this to the border are partial
};

void validate_detection_params(const DetectionParams& params);

struct PersonDetection {
  std::size_t blob_index = 0;
  HeadPoint head;
  double height_mm = 0.0;
  bool valid_head = false;
  bool in_height_range = false;
  bool clear_of_border = false;

  bool accepted() const { return valid_head && in_height_range && clear_of_border; }
};

/// Components with at least min_blob_area pixels, in raster order of their
/// first pixel. Apex ties resolve to the smallest (v, u).
/// Throws ArgumentError on a dimension mismatch.
std::vector<Blob> extract_blobs(const ForegroundMask& mask, const DepthFrame& frame,
                                std::size_t min_blob_area);

/// Pixels of the midpoint circle of radius r around (cu, cv), without duplicates.
std::vector<PixelCoord> circle_outline(int cu, int cv, int radius);

/// True iff at least 60% of the in-blob pixels on the circle of radius
/// ring_radius_px around the apex lie at least jump_mm deeper than the apex.
bool validate_head(const Blob& blob, const DepthFrame& frame, double jump_mm,
                   int ring_radius_px);

/// camera height minus apex depth. Throws GeometryError if the apex is not
/// above the floor.
double estimate_height(const Blob& blob, const CameraConfig& config);

/// Pinhole back-projection into floor-referenced world coordinates.
WorldPoint pixel_to_world(double u, double v, double depth_mm, const CameraConfig& config);

struct ImagePoint {
  double u = 0.0;
  double v = 0.0;
  double depth_mm = 0.0;
};

/// Forward projection; inverse of pixel_to_world.
ImagePoint world_to_pixel(const WorldPoint& p, const CameraConfig& config);

/// Runs head validation, height estimation and the height/border gates on every blob.
std::vector<PersonDetection> detect_people(std::span<const Blob> blobs, const DepthFrame& frame,
                                           const CameraConfig& config,
                                           const DetectionParams& params);

}  // namespace shopper
