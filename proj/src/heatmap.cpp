#include "shopper/heatmap.hpp"

#include <algorithm>
#include <cmath>

#include "shopper/detection.hpp"
#include "shopper/errors.hpp"

namespace shopper {

void validate_planogram(const Planogram& planogram, const ShelfZone& zone) {
  const auto& m = planogram.mapping;
  if (m.w <= 0 || m.h <= 0) throw ArgumentError("map.rect_px must have positive width and height");
  if (m.x < 0 || m.y < 0 || m.x + m.w > planogram.image.width ||
      m.y + m.h > planogram.image.height) {
    throw ArgumentError("map.rect_px lies outside the planogram image");
  }
  if (m.w < zone.grid_cols || m.h < zone.grid_rows) {
    throw ArgumentError("map.rect_px is smaller than the cell grid");
  }
  if (m.marker_radius_px < 0) throw ArgumentError("map.marker_radius_px must be >= 0");
}

Rgb marker_color(InteractionType type) {
  switch (type) {
    case InteractionType::Positive: return kPositiveColor;
    case InteractionType::Negative: return kNegativeColor;
    case InteractionType::Neutral: return kNeutralColor;
  }
  return kNeutralColor;
}

void fill_disc(RgbImage& image, int cx, int cy, int radius, Rgb color) {
  auto span = [&](int x0, int x1, int y) {
    if (y < 0 || y >= image.height) return;
    for (int x = std::max(x0, 0); x <= std::min(x1, image.width - 1); ++x) image.set(x, y, color);
  };
  int x = radius;
  int y = 0;
  int err = 1 - radius;
  while (x >= y) {
    span(cx - x, cx + x, cy + y);
    span(cx - x, cx + x, cy - y);
    span(cx - y, cx + y, cy + x);
    span(cx - y, cx + y, cy - x);
    ++y;
    if (err < 0) {
      err += 2 * y + 1;
    } else {
      --x;
      err += 2 * (y - x) + 1;
    }
  }
}

MapPoint map_contact(const InteractionEvent& event, const ShelfZone& zone,
                     const CameraConfig& camera, const PlanogramMapping& m) {
  const ImagePoint p = world_to_pixel(event.contact_world, camera);
  const long u = std::lround(p.u);
  const long v = std::lround(p.v);
  const long zw = zone.x_shelf_dist_dx - zone.x_shelf_dist_sx;
  const long zh = zone.y_shelf_dist;
  auto floor_div = [](long a, long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); };
  const long x = m.x + floor_div((u - zone.x_shelf_dist_sx) * m.w, zw);
  const long y = m.y + floor_div(v * m.h, zh);
  const long cx0 = m.x + static_cast<long>(event.cell.col) * m.w / zone.grid_cols;
  const long cx1 = m.x + static_cast<long>(event.cell.col + 1) * m.w / zone.grid_cols - 1;
  const long cy0 = m.y + static_cast<long>(event.cell.row) * m.h / zone.grid_rows;
  const long cy1 = m.y + static_cast<long>(event.cell.row + 1) * m.h / zone.grid_rows - 1;
  return {static_cast<int>(std::clamp(x, cx0, cx1)), static_cast<int>(std::clamp(y, cy0, cy1))};
}

RenderResult render_map(const Planogram& planogram, const ShelfZone& zone,
                        const CameraConfig& camera, std::span<const InteractionEvent> events) {
  validate_planogram(planogram, zone);
  RenderResult out{planogram.image, 0, 0};
  for (const auto& event : events) {
    if (event.zone_id != planogram.mapping.zone_id || !zone.valid_cell(event.cell)) {
      ++out.skipped;
      continue;
    }
    const MapPoint p = map_contact(event, zone, camera, planogram.mapping);
    fill_disc(out.image, p.x, p.y, planogram.mapping.marker_radius_px, marker_color(event.type));
    ++out.drawn;
  }
  return out;
}

}  // namespace shopper
