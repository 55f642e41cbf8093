#include "shopper/pipeline.hpp"

#include <chrono>

#include "shopper/errors.hpp"

namespace shopper {

Pipeline::Pipeline(PipelineConfig config, CameraConfig camera, int width, int height,
                   EventStore* store)
    : config_(std::move(config)),
      camera_(std::move(camera)),
      width_(width),
      height_(height),
      store_(store),
      tracker_(config_.tracking) {
  validate_config(config_, width_, height_, camera_);
  for (const auto& zone : config_.zones) monitors_.emplace_back(zone, camera_, config_.interaction);
  init_frames_.reserve(static_cast<std::size_t>(config_.background.init_frames));
}

void Pipeline::emit(const InteractionEvent& event) {
  switch (event.type) {
    case InteractionType::Positive: ++summary_.positive; break;
    case InteractionType::Negative: ++summary_.negative; break;
    case InteractionType::Neutral: ++summary_.neutral; break;
  }
  events_.push_back(event);
  if (store_ != nullptr) store_->append(event);
}

void Pipeline::emit(const VisitSummary& visit) {
  ++summary_.visitors;
  visits_.push_back(make_visit_record(camera_.camera_id, visit));
  if (store_ != nullptr) store_->append(visits_.back());
}

void Pipeline::process(const DepthFrame& frame) {
  if (finished_) throw StateError("pipeline already finished");
  if (frame.width != width_ || frame.height != height_) {
    throw FormatError("frame size " + std::to_string(frame.width) + "x" +
                      std::to_string(frame.height) + " does not match the stream");
  }
  if (last_timestamp_ && frame.timestamp_ms <= *last_timestamp_) {
    throw FormatError("frame timestamps must strictly increase");
  }
  last_timestamp_ = frame.timestamp_ms;
  const auto t0 = std::chrono::steady_clock::now();
  ++summary_.frames;

  if (!model_) {
    init_frames_.push_back(frame);
    if (init_frames_.size() == static_cast<std::size_t>(config_.background.init_frames)) {
      model_ = init_background(init_frames_, config_.background.threshold_mm,
                               config_.background.alpha);
      init_frames_.clear();
      init_frames_.shrink_to_fit();
    }
    summary_.processing_seconds +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return;
  }

  const std::int64_t now = frame.timestamp_ms;
  ForegroundMask mask = subtract(*model_, frame);
  const std::vector<Blob> blobs = extract_blobs(mask, frame, config_.detection.min_blob_area);
  std::vector<PersonDetection> accepted;
  for (const auto& det : detect_people(blobs, frame, camera_, config_.detection)) {
    if (det.accepted()) accepted.push_back(det);
  }
  const AssociationResult assoc = tracker_.associate(accepted, now);

  std::vector<TrackedBlob> tracked;
  tracked.reserve(accepted.size());
  for (std::size_t i = 0; i < accepted.size(); ++i) {
    const int id = assoc.track_of_detection[i];
    tracked.push_back({id, &blobs[accepted[i].blob_index]});
    for (const auto& zone : config_.zones) {
      tracker_.update_zone(id, zone.zone_id,
                           zone.in_dwell_area(accepted[i].head.u, accepted[i].head.v), now);
    }
  }

  std::vector<InteractionEvent> frame_events;
  for (auto& monitor : monitors_) {
    for (auto& e : monitor.step(tracked, frame, mask)) frame_events.push_back(std::move(e));
  }
  for (const auto& e : frame_events) emit(e);

  update_background(*model_, frame, mask);
  for (const auto& visit : tracker_.prune(now)) emit(visit);

  if (observer_) {
    observer_(FrameObservation{&frame, &mask, blobs, accepted, &assoc, frame_events});
  }
  last_frame_ = frame;
  last_mask_ = std::move(mask);
  summary_.processing_seconds +=
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void Pipeline::finish() {
  if (finished_) return;
  finished_ = true;
  if (last_frame_) {
    for (auto& monitor : monitors_) {
      for (const auto& e : monitor.flush(*last_frame_, last_mask_)) emit(e);
    }
  }
  for (const auto& visit : tracker_.close_all()) emit(visit);
}

}  // namespace shopper
