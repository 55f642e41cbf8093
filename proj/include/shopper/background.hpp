#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "shopper/types.hpp"

namespace shopper {

struct BackgroundParams {
  int init_frames = 30;
  double alpha = 0.05;
  double threshold_mm = 120.0;
};

void validate_background_params(const BackgroundParams& params);

/// Per-pixel foreground flags, row-major like the source frame.
struct ForegroundMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  bool at(int u, int v) const {
    return bits[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) +
                static_cast<std::size_t>(u)] != 0;
  }
  std::size_t count() const;
};

/// Reference depth per pixel with a selective running-average update.
struct BackgroundModel {
  int width = 0;
  int height = 0;
  std::vector<float> ref_depth;  // mm, 0 where no valid sample has been seen
  double alpha = 0.05;
  double threshold_mm = 120.0;
};

/// Per-pixel median of the valid (non-zero) samples of `frames`.
/// Throws ArgumentError for an empty list, mismatched dimensions or bad parameters.
BackgroundModel init_background(std::span<const DepthFrame> frames, double threshold_mm,
                                double alpha);

/// Foreground iff the sample is valid and nearer than the reference by more
/// than threshold_mm. Throws ArgumentError on a dimension mismatch.
ForegroundMask subtract(const BackgroundModel& model, const DepthFrame& frame);

/// ref <- (1 - alpha) ref + alpha depth on valid background pixels only.
void update_background(BackgroundModel& model, const DepthFrame& frame,
                       const ForegroundMask& mask);

}  // namespace shopper
