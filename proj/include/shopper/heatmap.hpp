#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "shopper/interaction.hpp"
#include "shopper/pnm.hpp"

namespace shopper {

/// Where a shelf zone's cell grid sits on the planogram image.
struct PlanogramMapping {
  std::string zone_id = "shelf";
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  int marker_radius_px = 6;
};

struct Planogram {
  RgbImage image;
  PlanogramMapping mapping;
};

/// Throws ArgumentError when the rectangle is empty or leaves the image.
void validate_planogram(const Planogram& planogram, const ShelfZone& zone);

inline constexpr Rgb kPositiveColor{0, 255, 0};
inline constexpr Rgb kNegativeColor{255, 0, 0};
inline constexpr Rgb kNeutralColor{255, 255, 0};

Rgb marker_color(InteractionType type);

/// Integer midpoint-circle fill, clipped to the image.
void fill_disc(RgbImage& image, int cx, int cy, int radius, Rgb color);

struct MapPoint {
  int x = 0;
  int y = 0;
};

/// Projects the contact into the image, scales the zone rectangle onto the
/// mapped rectangle and clamps into the event's cell.
MapPoint map_contact(const InteractionEvent& event, const ShelfZone& zone,
                     const CameraConfig& camera, const PlanogramMapping& mapping);

struct RenderResult {
  RgbImage image;
  std::size_t drawn = 0;
  std::size_t skipped = 0;  // other zone or cell outside the grid
};

/// Paints one disc per event in order; later events cover earlier ones.
RenderResult render_map(const Planogram& planogram, const ShelfZone& zone,
                        const CameraConfig& camera, std::span<const InteractionEvent> events);

}  // namespace shopper
