#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "shopper/analytics.hpp"
#include "shopper/config.hpp"

namespace shopper {

struct PipelineSummary {
  std::size_t frames = 0;
  long visitors = 0;
  long positive = 0;
  long negative = 0;
  long neutral = 0;
  double processing_seconds = 0.0;

  double fps() const { return processing_seconds > 0.0 ? frames / processing_seconds : 0.0; }
};

/// What the pipeline saw in one post-initialization frame.
struct FrameObservation {
  const DepthFrame* frame = nullptr;
  const ForegroundMask* foreground = nullptr;
  std::span<const Blob> blobs;
  std::span<const PersonDetection> detections;  // accepted detections only
  const AssociationResult* association = nullptr;
  std::span<const InteractionEvent> events;
};

/// background -> detection -> tracking -> interaction for one camera stream.
class Pipeline {
 public:
  /// `store` may be null; records are then only kept in memory.
  Pipeline(PipelineConfig config, CameraConfig camera, int width, int height,
           EventStore* store = nullptr);

  /// Frames must arrive in timestamp order. The first bg.init_frames frames
  /// build the background model. Throws FormatError on a size mismatch.
  void process(const DepthFrame& frame);
  /// Closes open interactions and tracks. Further frames are rejected.
  void finish();

  void set_observer(std::function<void(const FrameObservation&)> observer) {
    observer_ = std::move(observer);
  }

  const PipelineSummary& summary() const { return summary_; }
  const std::vector<InteractionEvent>& events() const { return events_; }
  const std::vector<VisitRecord>& visits() const { return visits_; }
  const Tracker& tracker() const { return tracker_; }
  const CameraConfig& camera() const { return camera_; }
  const std::optional<BackgroundModel>& background() const { return model_; }

 private:
  void emit(const InteractionEvent& event);
  void emit(const VisitSummary& visit);

  PipelineConfig config_;
  CameraConfig camera_;
  int width_;
  int height_;
  EventStore* store_;
  Tracker tracker_;
  std::vector<InteractionMonitor> monitors_;
  std::vector<DepthFrame> init_frames_;
  std::optional<BackgroundModel> model_;
  std::optional<DepthFrame> last_frame_;
  ForegroundMask last_mask_;
  std::optional<std::int64_t> last_timestamp_;
  bool finished_ = false;
  std::function<void(const FrameObservation&)> observer_;
  PipelineSummary summary_;
  std::vector<InteractionEvent> events_;
  std::vector<VisitRecord> visits_;
};

}  // namespace shopper
