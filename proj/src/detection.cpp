#include "shopper/detection.hpp"

#include <algorithm>
#include <array>
#include <limits>

#include "shopper/errors.hpp"

namespace shopper {
namespace {

// Clockwise in image coordinates (v grows downwards), starting West.
constexpr std::array<int, 8> kDu = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr std::array<int, 8> kDv = {0, -1, -1, -1, 0, 1, 1, 1};

int direction_of(int du, int dv) {
  for (int d = 0; d < 8; ++d) {
    if (kDu[d] == du && kDv[d] == dv) return d;
  }
  return 0;
}

std::vector<PixelCoord> trace_boundary(const std::vector<std::int32_t>& labels, int width,
                                       int height, std::int32_t label, PixelCoord start,
                                       std::size_t pixel_count) {
  auto inside = [&](int u, int v) {
    return u >= 0 && v >= 0 && u < width && v < height &&
           labels[static_cast<std::size_t>(v) * width + u] == label;
  };
  std::vector<PixelCoord> contour{start};
  // The start is the first pixel in raster order, so its West neighbour is outside.
  PixelCoord p = start;
  int back = 0;
  bool have_second = false;
  PixelCoord second;
  const std::size_t limit = 4 * pixel_count + 16;
  for (std::size_t step = 0; step < limit; ++step) {
    int found = -1;
    for (int k = 1; k <= 8; ++k) {
      const int d = (back + k) % 8;
      if (inside(p.u + kDu[d], p.v + kDv[d])) {
        found = d;
        break;
      }
    }
    if (found < 0) break;  // isolated pixel
    const PixelCoord q{p.u + kDu[found], p.v + kDv[found]};
    // Closed once the first move out of the start repeats.
    if (have_second && p == start && q == second) {
      contour.pop_back();
      break;
    }
    if (!have_second) {
      second = q;
      have_second = true;
    }
    const PixelCoord prev{p.u + kDu[(found + 7) % 8], p.v + kDv[(found + 7) % 8]};
    back = direction_of(prev.u - q.u, prev.v - q.v);
    p = q;
    contour.push_back(p);
  }
  return contour;
}

}  // namespace

void validate_detection_params(const DetectionParams& params) {
  if (params.min_blob_area < 1) throw ArgumentError("det.min_blob_area must be at least 1");
  if (!(params.jump_mm > 0.0)) throw ArgumentError("det.jump_mm must be positive");
  if (params.ring_radius_px < 1) throw ArgumentError("det.ring_radius_px must be at least 1");
  if (!(params.height_min_mm > 0.0) || params.height_max_mm <= params.height_min_mm) {
    throw ArgumentError("det.height_min_mm/height_max_mm must form a positive range");
  }
  if (params.border_margin_px < 0) throw ArgumentError("det.border_margin_px must be >= 0");
}

bool Blob::contains(int u, int v, int width) const {
  if (!bbox.contains(u, v)) return false;
  const auto idx = static_cast<std::uint32_t>(v) * static_cast<std::uint32_t>(width) +
                   static_cast<std::uint32_t>(u);
  return std::binary_search(pixels.begin(), pixels.end(), idx);
}

std::vector<Blob> extract_blobs(const ForegroundMask& mask, const DepthFrame& frame,
                                std::size_t min_blob_area) {
  if (mask.width != frame.width || mask.height != frame.height) {
    throw ArgumentError("extract_blobs: mask and frame dimensions differ");
  }
  const int w = mask.width;
  const int h = mask.height;

  // Horizontal runs in raster order, merged across rows with union-find.
  struct Run {
    int v;
    int u0;
    int u1;  // inclusive
  };
  std::vector<Run> runs;
  std::vector<std::uint32_t> parent;
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  auto unite = [&](std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) {
      parent[b] = a;
    } else {
      parent[a] = b;
    }
  };
  std::size_t prev_begin = 0;
  std::size_t prev_end = 0;
  for (int v = 0; v < h; ++v) {
    const std::uint8_t* row = mask.bits.data() + static_cast<std::size_t>(v) * w;
    const std::size_t row_begin = runs.size();
    std::size_t j = prev_begin;
    int u = 0;
    while (u < w) {
      if (row[u] == 0) {
        ++u;
        continue;
      }
      const int u0 = u;
      while (u < w && row[u] != 0) ++u;
      const int u1 = u - 1;
      const auto id = static_cast<std::uint32_t>(runs.size());
      runs.push_back({v, u0, u1});
      parent.push_back(id);
      // 8-connectivity: previous-row runs touching [u0 - 1, u1 + 1].
      while (j < prev_end && runs[j].u1 < u0 - 1) ++j;
      for (std::size_t k = j; k < prev_end && runs[k].u0 <= u1 + 1; ++k) {
        unite(id, static_cast<std::uint32_t>(k));
      }
    }
    prev_begin = row_begin;
    prev_end = runs.size();
  }

  // Components numbered by their first run, which is raster order of first pixels.
  std::vector<std::int32_t> comp_of_root(runs.size(), -1);
  std::vector<std::size_t> comp_area;
  std::vector<std::int32_t> comp_of_run(runs.size());
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto root = find(static_cast<std::uint32_t>(r));
    if (comp_of_root[root] < 0) {
      comp_of_root[root] = static_cast<std::int32_t>(comp_area.size());
      comp_area.push_back(0);
    }
    comp_of_run[r] = comp_of_root[root];
    comp_area[static_cast<std::size_t>(comp_of_run[r])] +=
        static_cast<std::size_t>(runs[r].u1 - runs[r].u0 + 1);
  }

  std::vector<std::int32_t> blob_of_comp(comp_area.size(), -1);
  std::vector<Blob> blobs;
  for (std::size_t c = 0; c < comp_area.size(); ++c) {
    if (comp_area[c] < min_blob_area) continue;
    blob_of_comp[c] = static_cast<std::int32_t>(blobs.size());
    Blob blob;
    blob.pixel_count = comp_area[c];
    blob.pixels.reserve(comp_area[c]);
    blob.bbox = {w, h, -1, -1};
    blobs.push_back(std::move(blob));
  }
  if (blobs.empty()) return blobs;

  std::vector<std::int32_t> labels(mask.bits.size(), 0);
  std::vector<double> su(blobs.size(), 0.0);
  std::vector<double> sv(blobs.size(), 0.0);
  std::vector<std::uint16_t> best(blobs.size(), std::numeric_limits<std::uint16_t>::max());
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const std::int32_t b = blob_of_comp[static_cast<std::size_t>(comp_of_run[r])];
    if (b < 0) continue;
    Blob& blob = blobs[static_cast<std::size_t>(b)];
    const Run& run = runs[r];
    blob.bbox.u_min = std::min(blob.bbox.u_min, run.u0);
    blob.bbox.v_min = std::min(blob.bbox.v_min, run.v);
    blob.bbox.u_max = std::max(blob.bbox.u_max, run.u1);
    blob.bbox.v_max = std::max(blob.bbox.v_max, run.v);
    const std::size_t n = static_cast<std::size_t>(run.u1 - run.u0 + 1);
    su[static_cast<std::size_t>(b)] += static_cast<double>(n) * (run.u0 + run.u1) / 2.0;
    sv[static_cast<std::size_t>(b)] += static_cast<double>(n) * run.v;
    const std::size_t base = static_cast<std::size_t>(run.v) * w;
    for (int u = run.u0; u <= run.u1; ++u) {
      const std::size_t idx = base + static_cast<std::size_t>(u);
      labels[idx] = b + 1;
      blob.pixels.push_back(static_cast<std::uint32_t>(idx));
      // Runs arrive in (v, u) order, so strict < keeps the first tie.
      if (frame.data[idx] < best[static_cast<std::size_t>(b)]) {
        best[static_cast<std::size_t>(b)] = frame.data[idx];
        blob.head = {u, run.v, frame.data[idx]};
      }
    }
  }
  for (std::size_t b = 0; b < blobs.size(); ++b) {
    Blob& blob = blobs[b];
    blob.centroid_u = su[b] / static_cast<double>(blob.pixel_count);
    blob.centroid_v = sv[b] / static_cast<double>(blob.pixel_count);
    const PixelCoord start{static_cast<int>(blob.pixels.front() % static_cast<std::uint32_t>(w)),
                           static_cast<int>(blob.pixels.front() / static_cast<std::uint32_t>(w))};
    blob.contour = trace_boundary(labels, w, h, static_cast<std::int32_t>(b) + 1, start,
                                  blob.pixel_count);
  }
  return blobs;
}

std::vector<PixelCoord> circle_outline(int cu, int cv, int radius) {
  std::vector<PixelCoord> points;
  int x = radius;
  int y = 0;
  int err = 1 - radius;
  while (x >= y) {
    const std::array<PixelCoord, 8> octants = {{{cu + x, cv + y},
                                                {cu + y, cv + x},
                                                {cu - y, cv + x},
                                                {cu - x, cv + y},
                                                {cu - x, cv - y},
                                                {cu - y, cv - x},
                                                {cu + y, cv - x},
                                                {cu + x, cv - y}}};
    points.insert(points.end(), octants.begin(), octants.end());
    ++y;
    if (err < 0) {
      err += 2 * y + 1;
    } else {
      --x;
      err += 2 * (y - x) + 1;
    }
  }
  std::sort(points.begin(), points.end(), [](const PixelCoord& a, const PixelCoord& b) {
    return a.v != b.v ? a.v < b.v : a.u < b.u;
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

bool validate_head(const Blob& blob, const DepthFrame& frame, double jump_mm,
                   int ring_radius_px) {
  std::size_t in_blob = 0;
  std::size_t dropped = 0;
  const double needed = blob.head.depth_mm + jump_mm;
  for (const auto& p : circle_outline(blob.head.u, blob.head.v, ring_radius_px)) {
    if (!frame.in_bounds(p.u, p.v) || !blob.contains(p.u, p.v, frame.width)) continue;
    ++in_blob;
    const std::uint16_t d = frame.at(p.u, p.v);
    if (d != 0 && d >= needed) ++dropped;
  }
  // Integer form of dropped / in_blob >= 0.6.
  return in_blob > 0 && 5 * dropped >= 3 * in_blob;
}

double estimate_height(const Blob& blob, const CameraConfig& config) {
  const double depth = blob.head.depth_mm;
  if (depth <= 0.0 || depth >= config.camera_height_mm) {
    throw GeometryError("apex depth " + std::to_string(blob.head.depth_mm) +
                        " mm is not above the floor");
  }
  return config.camera_height_mm - depth;
}

WorldPoint pixel_to_world(double u, double v, double depth_mm, const CameraConfig& config) {
  return {(u - config.cx) * depth_mm / config.fx, (v - config.cy) * depth_mm / config.fy,
          config.camera_height_mm - depth_mm};
}

ImagePoint world_to_pixel(const WorldPoint& p, const CameraConfig& config) {
  const double depth = config.camera_height_mm - p.z;
  return {config.cx + config.fx * p.x / depth, config.cy + config.fy * p.y / depth, depth};
}

std::vector<PersonDetection> detect_people(std::span<const Blob> blobs, const DepthFrame& frame,
                                           const CameraConfig& config,
                                           const DetectionParams& params) {
  std::vector<PersonDetection> detections;
  detections.reserve(blobs.size());
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    const Blob& blob = blobs[i];
    PersonDetection det;
    det.blob_index = i;
    det.head = blob.head;
    det.valid_head = validate_head(blob, frame, params.jump_mm, params.ring_radius_px);
    try {
      det.height_mm = estimate_height(blob, config);
      det.in_height_range =
          det.height_mm >= params.height_min_mm && det.height_mm <= params.height_max_mm;
    } catch (const GeometryError&) {
      det.in_height_range = false;
    }
    const int m = params.border_margin_px;
    det.clear_of_border = blob.head.u >= m && blob.head.v >= m &&
                          blob.head.u < frame.width - m && blob.head.v < frame.height - m;
    detections.push_back(det);
  }
  return detections;
}

}  // namespace shopper
