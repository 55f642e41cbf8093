#include "shopper/background.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "shopper/errors.hpp"

namespace shopper {
namespace {

// Median of n > 0 samples; the mean of the two middle samples when n is even.
double median_of(std::uint16_t* first, std::size_t n) {
  const auto [lo_it, hi_it] = std::minmax_element(first, first + n);
  const int lo = *lo_it;
  const int span = *hi_it - lo;
  const std::size_t mid = n / 2;
  if (span < 64) {
    // Narrow spread (sensor noise): rank by counting.
    std::array<std::uint16_t, 64> hist{};
    for (std::size_t i = 0; i < n; ++i) ++hist[static_cast<std::size_t>(first[i] - lo)];
    std::size_t seen = 0;
    int lower = -1;
    for (int b = 0; b <= span; ++b) {
      seen += hist[static_cast<std::size_t>(b)];
      if (n % 2 == 0 && lower < 0 && seen >= mid) lower = b;
      if (seen > mid) {
        return n % 2 == 1 ? lo + b : lo + 0.5 * (lower + b);
      }
    }
  }
  std::nth_element(first, first + mid, first + n);
  double median = first[mid];
  if (n % 2 == 0) median = 0.5 * (median + *std::max_element(first, first + mid));
  return median;
}

}  // namespace

void validate_background_params(const BackgroundParams& params) {
  if (params.init_frames < 1) throw ArgumentError("bg.init_frames must be at least 1");
  if (!(params.alpha > 0.0 && params.alpha < 1.0)) {
    throw ArgumentError("bg.alpha must lie in (0, 1)");
  }
  if (!(params.threshold_mm > 0.0)) throw ArgumentError("bg.threshold_mm must be positive");
}

std::size_t ForegroundMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

BackgroundModel init_background(std::span<const DepthFrame> frames, double threshold_mm,
                                double alpha) {
  if (frames.empty()) throw ArgumentError("init_background: no frames");
  validate_background_params({1, alpha, threshold_mm});
  const DepthFrame& first = frames.front();
  for (const auto& f : frames) {
    if (!f.same_size(first) || f.data.size() != f.pixel_count()) {
      throw ArgumentError("init_background: frames differ in dimensions");
    }
  }
  BackgroundModel model;
  model.width = first.width;
  model.height = first.height;
  model.alpha = alpha;
  model.threshold_mm = threshold_mm;
  model.ref_depth.assign(first.pixel_count(), 0.0f);

  // Tiles of pixels are transposed into contiguous sample lists.
  constexpr std::size_t kTile = 256;
  const std::size_t nf = frames.size();
  const std::size_t np = model.ref_depth.size();
  std::vector<const std::uint16_t*> sources;
  for (const auto& f : frames) sources.push_back(f.data.data());
  std::vector<std::uint16_t> tile(kTile * nf);
  std::vector<std::size_t> counts(kTile);
  for (std::size_t p0 = 0; p0 < np; p0 += kTile) {
    const std::size_t len = std::min(kTile, np - p0);
    std::fill(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(len), 0);
    for (const std::uint16_t* src : sources) {
      for (std::size_t k = 0; k < len; ++k) {
        const std::uint16_t d = src[p0 + k];
        if (d != 0) tile[k * nf + counts[k]++] = d;
      }
    }
    for (std::size_t k = 0; k < len; ++k) {
      const std::size_t count = counts[k];
      if (count == 0) continue;
      model.ref_depth[p0 + k] = static_cast<float>(median_of(tile.data() + k * nf, count));
    }
  }
  return model;
}

ForegroundMask subtract(const BackgroundModel& model, const DepthFrame& frame) {
  if (frame.width != model.width || frame.height != model.height) {
    throw ArgumentError("subtract: frame and model dimensions differ");
  }
  ForegroundMask mask;
  mask.width = frame.width;
  mask.height = frame.height;
  mask.bits.resize(frame.pixel_count());
  const auto threshold = static_cast<float>(model.threshold_mm);
  const std::size_t n = mask.bits.size();
  const std::uint16_t* __restrict depth = frame.data.data();
  const float* __restrict ref = model.ref_depth.data();
  std::uint8_t* __restrict bits = mask.bits.data();
  for (std::size_t p = 0; p < n; ++p) {
    const float d = static_cast<float>(depth[p]);
    bits[p] = static_cast<std::uint8_t>((d != 0.0f) & (ref[p] - d > threshold));
  }
  return mask;
}

void update_background(BackgroundModel& model, const DepthFrame& frame,
                       const ForegroundMask& mask) {
  if (frame.width != model.width || frame.height != model.height ||
      mask.width != model.width || mask.height != model.height) {
    throw ArgumentError("update_background: dimensions differ");
  }
  const auto a = static_cast<float>(model.alpha);
  const float keep = 1.0f - a;
  const std::size_t n = model.ref_depth.size();
  const std::uint16_t* __restrict depth = frame.data.data();
  const std::uint8_t* __restrict bits = mask.bits.data();
  float* __restrict ref = model.ref_depth.data();
  for (std::size_t p = 0; p < n; ++p) {
    const float d = static_cast<float>(depth[p]);
    // A pixel never seen valid has no reference yet; adopt the first sample.
    const float next = ref[p] == 0.0f ? d : keep * ref[p] + a * d;
    ref[p] = (d == 0.0f || bits[p] != 0) ? ref[p] : next;
  }
}

}  // namespace shopper
