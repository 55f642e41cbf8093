#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shopper/background.hpp"
#include "shopper/detection.hpp"
#include "shopper/types.hpp"

namespace shopper {

struct ProductInfo {
  std::string product;
  std::string category;

  friend bool operator==(const ProductInfo&, const ProductInfo&) = default;
};

/// Image-space band along the shelf edge (row 0) where hand contacts count.
struct ShelfZone {
  std::string zone_id = "shelf";
  int x_shelf_dist_sx = 40;
  int x_shelf_dist_dx = 600;
  int y_shelf_dist = 150;
  double shelf_plane_mm = 1200.0;
  int grid_cols = 8;
  int grid_rows = 2;
  // Rows beyond the zone, in front of the shelf, in which a head counts as
  // dwelling at this zone.
  int approach_px = 480;
  std::map<CellIndex, ProductInfo> cells;

  bool contains(int u, int v) const {
    return u >= x_shelf_dist_sx && u < x_shelf_dist_dx && v >= 0 && v < y_shelf_dist;
  }
  bool in_dwell_area(double u, double v) const {
    return u >= x_shelf_dist_sx && u < x_shelf_dist_dx && v >= 0 && v < y_shelf_dist + approach_px;
  }
  /// Uniform grid over the zone rectangle; (u, v) must lie inside the zone.
  CellIndex cell_of(int u, int v) const;
  bool valid_cell(CellIndex c) const {
    return c.col >= 0 && c.col < grid_cols && c.row >= 0 && c.row < grid_rows;
  }
};

/// Throws ArgumentError when the zone does not fit the image or camera.
void validate_zone(const ShelfZone& zone, int width, int height, const CameraConfig& camera);

struct InteractionParams {
  int patch_px = 64;
  double sim_threshold = 0.90;
  double area_tol = 0.05;  // fraction of the patch area
  int debounce_frames = 3;
  double occupancy_margin_mm = 20.0;  // material must rise this far above the shelf plane
};

void validate_interaction_params(const InteractionParams& params);

struct Contact {
  int u = 0;
  int v = 0;
  std::uint16_t depth_mm = 0;
  WorldPoint world;
  CellIndex cell;
};

/// The blob pixel inside the zone that reaches furthest toward the shelf
/// (minimum v, ties to minimum depth, then minimum u) among pixels whose world
/// height exceeds the shelf plane.
std::optional<Contact> detect_contact(const Blob& blob, const DepthFrame& frame,
                                      const ShelfZone& zone, const CameraConfig& config);

/// Shelf-relative occupancy around a contact. Pixels outside the image are
/// zero-padded and excluded; pixels on or next to foreground are excluded.
struct OccupancyPatch {
  int size = 0;
  std::vector<std::uint8_t> occupied;
  std::vector<std::uint8_t> excluded;
  // Reserved for an intensity channel captured alongside depth.
  std::optional<std::vector<std::uint8_t>> intensity;

  std::uint8_t occupied_at(int row, int col) const {
    return occupied[static_cast<std::size_t>(row) * size + col];
  }
};

/// Patch of size x size centered on (cu, cv). Occupancy is computed on a 3x3
/// median of valid depths; a pixel is occupied when its height exceeds
/// shelf_plane_mm + margin_mm.
OccupancyPatch capture_patch(const DepthFrame& frame, const ForegroundMask* foreground, int cu,
                             int cv, int size, double shelf_plane_mm, double margin_mm,
                             const CameraConfig& config);

/// Normalized cross-correlation over pixels excluded in neither patch.
/// Constant patches compare as 1 when equal and 0 otherwise.
double patch_similarity(const OccupancyPatch& a, const OccupancyPatch& b);

struct Classification {
  InteractionType type = InteractionType::Neutral;
  double similarity = 0.0;
  long start_area = 0;
  long end_area = 0;
};

Classification classify_patches(const OccupancyPatch& start, const OccupancyPatch& end,
                                 const InteractionParams& params);

enum class InteractionStatus { Open, Closed };

struct InteractionState {
  int track_id = 0;
  std::string zone_id;
  std::int64_t start_ms = 0;
  std::int64_t last_contact_ms = 0;
  int frames_without_contact = 0;
  OccupancyPatch start_patch;
  Contact contact;
  InteractionStatus status = InteractionStatus::Open;
};

struct InteractionEvent {
  std::string camera_id;
  std::string zone_id;
  int track_id = 0;
  InteractionType type = InteractionType::Neutral;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  WorldPoint contact_world;
  CellIndex cell;

  friend bool operator==(const InteractionEvent&, const InteractionEvent&) = default;
};

/// Captures the start patch at the first contact.
InteractionState open_interaction(int track_id, const Contact& contact, const DepthFrame& frame,
                                  const ForegroundMask& foreground, const ShelfZone& zone,
                                  const CameraConfig& config, const InteractionParams& params);

/// Captures the end patch at the same location and classifies. Marks the
/// state Closed. Throws StateError if the state is not Open.
InteractionEvent close_and_classify(InteractionState& state, const DepthFrame& end_frame,
                                    const ForegroundMask& foreground, std::int64_t end_ms,
                                    const ShelfZone& zone, const CameraConfig& config,
                                    const InteractionParams& params,
                                    Classification* detail = nullptr);

/// A blob attributed to a tracked person in the current frame.
struct TrackedBlob {
  int track_id = 0;
  const Blob* blob = nullptr;
};

/// Per-zone interaction lifecycle for one camera.
class InteractionMonitor {
 public:
  InteractionMonitor(ShelfZone zone, CameraConfig camera, InteractionParams params);

  /// Opens on new contacts, closes after debounce_frames frames without
  /// contact. At most one open interaction per track.
  std::vector<InteractionEvent> step(std::span<const TrackedBlob> blobs, const DepthFrame& frame,
                                     const ForegroundMask& foreground);

  /// Closes everything still open using the given frame.
  std::vector<InteractionEvent> flush(const DepthFrame& frame, const ForegroundMask& foreground);

  /// Throws StateError if (track, zone) already has an open interaction.
  void open(int track_id, const Contact& contact, const DepthFrame& frame,
            const ForegroundMask& foreground);

  const std::vector<InteractionState>& open_states() const { return open_; }
  const ShelfZone& zone() const { return zone_; }
  /// Classification details of every closed interaction, in emission order.
  const std::vector<Classification>& history() const { return history_; }

 private:
  InteractionEvent close(InteractionState& state, const DepthFrame& frame,
                         const ForegroundMask& foreground);

  ShelfZone zone_;
  CameraConfig camera_;
  InteractionParams params_;
  std::vector<InteractionState> open_;
  std::vector<Classification> history_;
};

}  // namespace shopper
