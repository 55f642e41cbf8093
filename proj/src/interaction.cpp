#include "shopper/interaction.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "shopper/errors.hpp"

namespace shopper {

CellIndex ShelfZone::cell_of(int u, int v) const {
  const int width = x_shelf_dist_dx - x_shelf_dist_sx;
  const int col = (u - x_shelf_dist_sx) * grid_cols / width;
  const int row = v * grid_rows / y_shelf_dist;
  return {std::clamp(col, 0, grid_cols - 1), std::clamp(row, 0, grid_rows - 1)};
}

void validate_zone(const ShelfZone& z, int width, int height, const CameraConfig& camera) {
  const std::string ctx = "zone." + z.zone_id + ": ";
  if (z.zone_id.empty()) throw ArgumentError("zone id must not be empty");
  if (z.x_shelf_dist_sx < 0 || z.x_shelf_dist_sx >= z.x_shelf_dist_dx ||
      z.x_shelf_dist_dx > width) {
    throw ArgumentError(ctx + "need 0 <= x_sx < x_dx <= image width");
  }
  if (z.y_shelf_dist <= 0 || z.y_shelf_dist > height) {
    throw ArgumentError(ctx + "need 0 < y_dist <= image height");
  }
  if (!(z.shelf_plane_mm > 0.0) || z.shelf_plane_mm >= camera.camera_height_mm) {
    throw ArgumentError(ctx + "shelf_plane_mm must lie between floor and camera");
  }
  if (z.grid_cols <= 0 || z.grid_rows <= 0) {
    throw ArgumentError(ctx + "grid_cols and grid_rows must be positive");
  }
  if (z.approach_px < 0) throw ArgumentError(ctx + "approach_px must be >= 0");
  for (const auto& [cell, info] : z.cells) {
    if (!z.valid_cell(cell)) throw ArgumentError(ctx + "product cell outside the grid");
  }
}

void validate_interaction_params(const InteractionParams& p) {
  if (p.patch_px < 3) throw ArgumentError("int.patch_px must be at least 3");
  if (!(p.sim_threshold > -1.0 && p.sim_threshold <= 1.0)) {
    throw ArgumentError("int.sim_threshold must lie in (-1, 1]");
  }
  if (!(p.area_tol >= 0.0 && p.area_tol < 1.0)) throw ArgumentError("int.area_tol must lie in [0, 1)");
  if (p.debounce_frames < 1) throw ArgumentError("int.debounce_frames must be at least 1");
  if (p.occupancy_margin_mm < 0.0) throw ArgumentError("int.occupancy_margin_mm must be >= 0");
}

std::optional<Contact> detect_contact(const Blob& blob, const DepthFrame& frame,
                                      const ShelfZone& zone, const CameraConfig& config) {
  if (blob.bbox.v_min >= zone.y_shelf_dist || blob.bbox.u_max < zone.x_shelf_dist_sx ||
      blob.bbox.u_min >= zone.x_shelf_dist_dx) {
    return std::nullopt;
  }
  const double max_depth = config.camera_height_mm - zone.shelf_plane_mm;
  const auto w = static_cast<std::uint32_t>(frame.width);
  std::optional<Contact> best;
  // Pixels are sorted by (v, u): the first qualifying row is the deepest reach.
  for (const auto idx : blob.pixels) {
    const int u = static_cast<int>(idx % w);
    const int v = static_cast<int>(idx / w);
    if (best && v > best->v) break;
    if (!zone.contains(u, v)) continue;
    const std::uint16_t d = frame.data[idx];
    if (d == 0 || d >= max_depth) continue;
    if (!best || d < best->depth_mm) {
      best = Contact{u, v, d, {}, {}};
    }
  }
  if (best) {
    best->world = pixel_to_world(best->u, best->v, best->depth_mm, config);
    best->cell = zone.cell_of(best->u, best->v);
  }
  return best;
}

OccupancyPatch capture_patch(const DepthFrame& frame, const ForegroundMask* foreground, int cu,
                             int cv, int size, double shelf_plane_mm, double margin_mm,
                             const CameraConfig& config) {
  OccupancyPatch patch;
  patch.size = size;
  const std::size_t n = static_cast<std::size_t>(size) * size;
  patch.occupied.assign(n, 0);
  patch.excluded.assign(n, 0);
  const double max_depth = config.camera_height_mm - shelf_plane_mm - margin_mm;
  const int u0 = cu - size / 2;
  const int v0 = cv - size / 2;
  std::array<std::uint16_t, 9> window{};
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const int u = u0 + c;
      const int v = v0 + r;
      const std::size_t i = static_cast<std::size_t>(r) * size + c;
      if (!frame.in_bounds(u, v)) {
        patch.excluded[i] = 1;
        continue;
      }
      std::size_t count = 0;
      bool near_foreground = false;
      for (int dv = -1; dv <= 1; ++dv) {
        for (int du = -1; du <= 1; ++du) {
          if (!frame.in_bounds(u + du, v + dv)) continue;
          if (foreground != nullptr && foreground->at(u + du, v + dv)) near_foreground = true;
          const std::uint16_t d = frame.at(u + du, v + dv);
          if (d != 0) window[count++] = d;
        }
      }
      patch.excluded[i] = near_foreground ? 1 : 0;
      if (count == 0) continue;
      std::nth_element(window.begin(), window.begin() + count / 2, window.begin() + count);
      patch.occupied[i] = window[count / 2] < max_depth ? 1 : 0;
    }
  }
  return patch;
}

double patch_similarity(const OccupancyPatch& a, const OccupancyPatch& b) {
  if (a.size != b.size) throw ArgumentError("patch_similarity: patch sizes differ");
  std::int64_t n = 0;
  std::int64_t sa = 0;
  std::int64_t sb = 0;
  std::int64_t sab = 0;
  for (std::size_t i = 0; i < a.occupied.size(); ++i) {
    if (a.excluded[i] != 0 || b.excluded[i] != 0) continue;
    ++n;
    sa += a.occupied[i];
    sb += b.occupied[i];
    sab += a.occupied[i] & b.occupied[i];
  }
  if (n == 0) return 1.0;
  // Binary samples: sum of squares equals the sum. Integer moments keep
  // identical patches at exactly 1.
  const std::int64_t var_a = n * sa - sa * sa;
  const std::int64_t var_b = n * sb - sb * sb;
  const std::int64_t cov = n * sab - sa * sb;
  if (var_a == 0 && var_b == 0) return sa == sb ? 1.0 : 0.0;
  if (var_a == 0 || var_b == 0) return 0.0;
  return static_cast<double>(cov) /
         std::sqrt(static_cast<double>(var_a) * static_cast<double>(var_b));
}

Classification classify_patches(const OccupancyPatch& start, const OccupancyPatch& end,
                                 const InteractionParams& params) {
  Classification out;
  out.similarity = patch_similarity(start, end);
  for (std::size_t i = 0; i < start.occupied.size(); ++i) {
    if (start.excluded[i] != 0 || end.excluded[i] != 0) continue;
    out.start_area += start.occupied[i];
    out.end_area += end.occupied[i];
  }
  if (out.similarity >= params.sim_threshold) {
    out.type = InteractionType::Neutral;
    return out;
  }
  const double tol = params.area_tol * static_cast<double>(start.size) * start.size;
  out.type = static_cast<double>(out.end_area) < static_cast<double>(out.start_area) - tol
                 ? InteractionType::Positive
                 : InteractionType::Negative;
  return out;
}

InteractionState open_interaction(int track_id, const Contact& contact, const DepthFrame& frame,
                                  const ForegroundMask& foreground, const ShelfZone& zone,
                                  const CameraConfig& config, const InteractionParams& params) {
  InteractionState state;
  state.track_id = track_id;
  state.zone_id = zone.zone_id;
  state.start_ms = frame.timestamp_ms;
  state.last_contact_ms = frame.timestamp_ms;
  state.contact = contact;
  state.start_patch = capture_patch(frame, &foreground, contact.u, contact.v, params.patch_px,
                                    zone.shelf_plane_mm, params.occupancy_margin_mm, config);
  return state;
}

InteractionEvent close_and_classify(InteractionState& state, const DepthFrame& end_frame,
                                    const ForegroundMask& foreground, std::int64_t end_ms,
                                    const ShelfZone& zone, const CameraConfig& config,
                                    const InteractionParams& params, Classification* detail) {
  if (state.status != InteractionStatus::Open) {
    throw StateError("interaction of track " + std::to_string(state.track_id) +
                     " is already closed");
  }
  const OccupancyPatch end_patch =
      capture_patch(end_frame, &foreground, state.contact.u, state.contact.v, params.patch_px,
                    zone.shelf_plane_mm, params.occupancy_margin_mm, config);
  const Classification cls = classify_patches(state.start_patch, end_patch, params);
  if (detail != nullptr) *detail = cls;
  state.status = InteractionStatus::Closed;
  InteractionEvent event;
  event.camera_id = config.camera_id;
  event.zone_id = state.zone_id;
  event.track_id = state.track_id;
  event.type = cls.type;
  event.start_ms = state.start_ms;
  event.end_ms = std::max(end_ms, state.start_ms);
  event.contact_world = state.contact.world;
  event.cell = state.contact.cell;
  return event;
}

InteractionMonitor::InteractionMonitor(ShelfZone zone, CameraConfig camera,
                                       InteractionParams params)
    : zone_(std::move(zone)), camera_(std::move(camera)), params_(params) {
  validate_interaction_params(params_);
}

void InteractionMonitor::open(int track_id, const Contact& contact, const DepthFrame& frame,
                              const ForegroundMask& foreground) {
  const bool duplicate = std::any_of(open_.begin(), open_.end(), [&](const InteractionState& s) {
    return s.track_id == track_id;
  });
  if (duplicate) {
    throw StateError("track " + std::to_string(track_id) + " already has an open interaction in zone " +
                     zone_.zone_id);
  }
  open_.push_back(open_interaction(track_id, contact, frame, foreground, zone_, camera_, params_));
}

InteractionEvent InteractionMonitor::close(InteractionState& state, const DepthFrame& frame,
                                           const ForegroundMask& foreground) {
  Classification detail;
  InteractionEvent event = close_and_classify(state, frame, foreground, state.last_contact_ms,
                                              zone_, camera_, params_, &detail);
  history_.push_back(detail);
  return event;
}

std::vector<InteractionEvent> InteractionMonitor::step(std::span<const TrackedBlob> blobs,
                                                       const DepthFrame& frame,
                                                       const ForegroundMask& foreground) {
  std::map<int, Contact> contacts;
  for (const TrackedBlob& tb : blobs) {
    if (tb.blob == nullptr) continue;
    auto contact = detect_contact(*tb.blob, frame, zone_, camera_);
    if (!contact) continue;
    auto [it, inserted] = contacts.emplace(tb.track_id, *contact);
    if (!inserted && contact->v < it->second.v) it->second = *contact;
  }

  std::vector<InteractionEvent> events;
  std::vector<InteractionState> still_open;
  for (auto& state : open_) {
    auto it = contacts.find(state.track_id);
    if (it != contacts.end()) {
      state.last_contact_ms = frame.timestamp_ms;
      state.frames_without_contact = 0;
      contacts.erase(it);
      still_open.push_back(std::move(state));
    } else if (++state.frames_without_contact >= params_.debounce_frames) {
      events.push_back(close(state, frame, foreground));
    } else {
      still_open.push_back(std::move(state));
    }
  }
  open_ = std::move(still_open);
  for (const auto& [track_id, contact] : contacts) {
    open(track_id, contact, frame, foreground);
  }
  return events;
}

std::vector<InteractionEvent> InteractionMonitor::flush(const DepthFrame& frame,
                                                        const ForegroundMask& foreground) {
  std::vector<InteractionEvent> events;
  for (auto& state : open_) events.push_back(close(state, frame, foreground));
  open_.clear();
  return events;
}

}  // namespace shopper
