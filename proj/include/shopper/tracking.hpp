#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shopper/detection.hpp"

namespace shopper {

struct TrackerParams {
  double max_disp_px_per_frame = 60.0;
  double height_gate_mm = 100.0;
  std::int64_t lost_timeout_ms = 1500;
  double height_smoothing = 0.3;  // EMA weight of the newest height sample
  int max_coast_frames = 4;       // cap on gate growth while a track is missing
};

void validate_tracker_params(const TrackerParams& params);

enum class TrackState { Active, Lost };

struct HeadSample {
  std::int64_t timestamp_ms = 0;
  double u = 0.0;
  double v = 0.0;
  std::uint16_t depth_mm = 0;
};

struct ZoneInterval {
  std::string zone_id;
  std::int64_t enter_ms = 0;
  std::int64_t exit_ms = 0;

  friend bool operator==(const ZoneInterval&, const ZoneInterval&) = default;
};

struct Track {
  int id = 0;
  std::vector<HeadSample> head_history;
  double height_mm = 0.0;
  TrackState state = TrackState::Active;
  std::int64_t last_seen_ms = 0;
  std::int64_t entry_ms = 0;
  std::vector<ZoneInterval> zone_intervals;
  int missed_frames = 0;
  std::vector<std::string> open_zones;  // zones whose last interval is still running
};

/// Summary emitted when a track is closed.
struct VisitSummary {
  int track_id = 0;
  std::int64_t entry_ms = 0;
  std::int64_t exit_ms = 0;
  std::int64_t dwell_ms = 0;
  std::vector<ZoneInterval> zone_intervals;
};

struct AssociationResult {
  std::vector<int> track_of_detection;  // track ID per input detection
  std::vector<int> new_ids;
  std::vector<int> missed_ids;
  std::size_t matched = 0;
};

/// Per-camera identity keeper. Single-threaded; one instance per stream.
class Tracker {
 public:
  explicit Tracker(TrackerParams params = {});

  /// Greedy globally-nearest matching under the displacement and height gates.
  /// Tracks that missed frames are compared at their constant-velocity
  /// prediction with a gate of max_disp * min(1 + missed, max_coast_frames).
  AssociationResult associate(std::span<const PersonDetection> detections, std::int64_t now_ms);

  /// Closes tracks unseen for more than lost_timeout_ms.
  std::vector<VisitSummary> prune(std::int64_t now_ms);
  /// Closes every remaining track (end of stream).
  std::vector<VisitSummary> close_all();

  /// Records whether the track's head is inside a zone at now_ms.
  void update_zone(int track_id, const std::string& zone_id, bool inside, std::int64_t now_ms);

  const std::vector<Track>& tracks() const { return tracks_; }
  const Track* find(int track_id) const;
  const TrackerParams& params() const { return params_; }
  int issued_ids() const { return next_id_ - 1; }

 private:
  VisitSummary close(Track& track) const;

  TrackerParams params_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
};

}  // namespace shopper
