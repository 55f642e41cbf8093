#include "shopper/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shopper/errors.hpp"

namespace shopper {

void validate_tracker_params(const TrackerParams& p) {
  if (!(p.max_disp_px_per_frame > 0.0)) throw ArgumentError("trk.max_disp_px must be positive");
  if (!(p.height_gate_mm > 0.0)) throw ArgumentError("trk.height_gate_mm must be positive");
  if (p.lost_timeout_ms <= 0) throw ArgumentError("trk.lost_timeout_ms must be positive");
  if (!(p.height_smoothing > 0.0 && p.height_smoothing <= 1.0)) {
    throw ArgumentError("trk.height_smoothing must lie in (0, 1]");
  }
  if (p.max_coast_frames < 1) throw ArgumentError("trk.max_coast_frames must be at least 1");
}

Tracker::Tracker(TrackerParams params) : params_(params) { validate_tracker_params(params_); }

namespace {

struct Candidate {
  double distance;
  std::size_t track;
  std::size_t detection;
};

// Where the track's head is expected at now_ms.
void predict(const Track& t, std::int64_t now_ms, double& u, double& v) {
  const HeadSample& last = t.head_history.back();
  u = last.u;
  v = last.v;
  if (t.missed_frames == 0 || t.head_history.size() < 2) return;
  const HeadSample& prev = t.head_history[t.head_history.size() - 2];
  const double dt = static_cast<double>(last.timestamp_ms - prev.timestamp_ms);
  if (dt <= 0.0) return;
  const double ahead = static_cast<double>(now_ms - last.timestamp_ms);
  u += (last.u - prev.u) / dt * ahead;
  v += (last.v - prev.v) / dt * ahead;
}

}  // namespace

AssociationResult Tracker::associate(std::span<const PersonDetection> detections,
                                     std::int64_t now_ms) {
  AssociationResult result;
  result.track_of_detection.assign(detections.size(), 0);

  std::vector<Candidate> candidates;
  for (std::size_t ti = 0; ti < tracks_.size(); ++ti) {
    const Track& t = tracks_[ti];
    double pu = 0.0;
    double pv = 0.0;
    predict(t, now_ms, pu, pv);
    const double gate = params_.max_disp_px_per_frame *
                        std::min(1 + t.missed_frames, params_.max_coast_frames);
    for (std::size_t di = 0; di < detections.size(); ++di) {
      const PersonDetection& d = detections[di];
      if (std::abs(d.height_mm - t.height_mm) > params_.height_gate_mm) continue;
      const double dist = std::hypot(d.head.u - pu, d.head.v - pv);
      if (dist <= gate) candidates.push_back({dist, ti, di});
    }
  }
  // Ties resolve to the older track, then the earlier detection.
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.track != b.track) return a.track < b.track;
    return a.detection < b.detection;
  });

  std::vector<bool> track_used(tracks_.size(), false);
  std::vector<bool> det_used(detections.size(), false);
  for (const Candidate& c : candidates) {
    if (track_used[c.track] || det_used[c.detection]) continue;
    track_used[c.track] = true;
    det_used[c.detection] = true;
    Track& t = tracks_[c.track];
    const PersonDetection& d = detections[c.detection];
    t.head_history.push_back({now_ms, static_cast<double>(d.head.u),
                              static_cast<double>(d.head.v), d.head.depth_mm});
    t.height_mm += params_.height_smoothing * (d.height_mm - t.height_mm);
    t.last_seen_ms = now_ms;
    t.state = TrackState::Active;
    t.missed_frames = 0;
    result.track_of_detection[c.detection] = t.id;
    ++result.matched;
  }

  const std::size_t prior = tracks_.size();
  for (std::size_t ti = 0; ti < prior; ++ti) {
    if (track_used[ti]) continue;
    tracks_[ti].state = TrackState::Lost;
    ++tracks_[ti].missed_frames;
    result.missed_ids.push_back(tracks_[ti].id);
  }

  for (std::size_t di = 0; di < detections.size(); ++di) {
    if (det_used[di]) continue;
    const PersonDetection& d = detections[di];
    Track t;
    t.id = next_id_++;
    t.head_history.push_back({now_ms, static_cast<double>(d.head.u),
                              static_cast<double>(d.head.v), d.head.depth_mm});
    t.height_mm = d.height_mm;
    t.last_seen_ms = now_ms;
    t.entry_ms = now_ms;
    result.track_of_detection[di] = t.id;
    result.new_ids.push_back(t.id);
    tracks_.push_back(std::move(t));
  }
  return result;
}

VisitSummary Tracker::close(Track& track) const {
  for (auto& zone : track.zone_intervals) {
    zone.exit_ms = std::min(zone.exit_ms, track.last_seen_ms);
  }
  track.open_zones.clear();
  return {track.id, track.entry_ms, track.last_seen_ms, track.last_seen_ms - track.entry_ms,
          track.zone_intervals};
}

std::vector<VisitSummary> Tracker::prune(std::int64_t now_ms) {
  std::vector<VisitSummary> closed;
  std::vector<Track> alive;
  alive.reserve(tracks_.size());
  for (auto& t : tracks_) {
    if (now_ms - t.last_seen_ms > params_.lost_timeout_ms) {
      closed.push_back(close(t));
    } else {
      alive.push_back(std::move(t));
    }
  }
  tracks_ = std::move(alive);
  return closed;
}

std::vector<VisitSummary> Tracker::close_all() {
  std::vector<VisitSummary> closed;
  for (auto& t : tracks_) closed.push_back(close(t));
  tracks_.clear();
  return closed;
}

void Tracker::update_zone(int track_id, const std::string& zone_id, bool inside,
                          std::int64_t now_ms) {
  auto it = std::find_if(tracks_.begin(), tracks_.end(),
                         [&](const Track& t) { return t.id == track_id; });
  if (it == tracks_.end()) return;
  Track& t = *it;
  const auto open = std::find(t.open_zones.begin(), t.open_zones.end(), zone_id);
  if (inside) {
    if (open != t.open_zones.end()) {
      for (auto z = t.zone_intervals.rbegin(); z != t.zone_intervals.rend(); ++z) {
        if (z->zone_id == zone_id) {
          z->exit_ms = now_ms;
          break;
        }
      }
    } else {
      t.zone_intervals.push_back({zone_id, now_ms, now_ms});
      t.open_zones.push_back(zone_id);
    }
  } else if (open != t.open_zones.end()) {
    t.open_zones.erase(open);
  }
}

const Track* Tracker::find(int track_id) const {
  auto it = std::find_if(tracks_.begin(), tracks_.end(),
                         [&](const Track& t) { return t.id == track_id; });
  return it == tracks_.end() ? nullptr : &*it;
}

}  // namespace shopper
