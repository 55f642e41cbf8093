#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "shopper/background.hpp"
#include "shopper/errors.hpp"
#include "shopper/interaction.hpp"
#include "shopper/simulator.hpp"

using namespace shopper;

namespace {

// Blob made of an explicit pixel list on a width-wide frame.
Blob blob_of(const std::vector<std::pair<int, int>>& pixels, int width) {
  Blob b;
  b.bbox = {1 << 20, 1 << 20, -1, -1};
  for (auto [u, v] : pixels) {
    b.pixels.push_back(static_cast<std::uint32_t>(v * width + u));
    b.bbox.u_min = std::min(b.bbox.u_min, u);
    b.bbox.v_min = std::min(b.bbox.v_min, v);
    b.bbox.u_max = std::max(b.bbox.u_max, u);
    b.bbox.v_max = std::max(b.bbox.v_max, v);
  }
  std::sort(b.pixels.begin(), b.pixels.end());
  b.pixel_count = b.pixels.size();
  return b;
}

OccupancyPatch patch_from(const std::vector<int>& bits, int size) {
  OccupancyPatch p;
  p.size = size;
  p.occupied.assign(bits.begin(), bits.end());
  p.excluded.assign(bits.size(), 0);
  return p;
}

ForegroundMask no_foreground(const DepthFrame& f) {
  return {f.width, f.height, std::vector<std::uint8_t>(f.data.size(), 0)};
}

// Background model from empty frames of the same scene.
struct Rig {
  Scenario scenario;
  SceneSimulator sim;
  BackgroundModel model;

  explicit Rig(Scenario s) : scenario(s), sim(s), model(make_model(s)) {}

  static BackgroundModel make_model(const Scenario& s) {
    Scenario empty = s;
    empty.persons.clear();
    const SceneSimulator e(empty);
    std::vector<DepthFrame> frames;
    for (std::size_t i = 0; i < 30; ++i) frames.push_back(e.render(i));
    return init_background(frames, 120, 0.05);
  }
};

}  // namespace

TEST_CASE("cell mapping over the zone grid") {
  const ShelfZone z;
  CHECK(z.cell_of(40, 0) == CellIndex{0, 0});
  CHECK(z.cell_of(109, 74) == CellIndex{0, 0});
  CHECK(z.cell_of(110, 75) == CellIndex{1, 1});
  CHECK(z.cell_of(599, 149) == CellIndex{7, 1});
  CHECK(z.contains(40, 0));
  CHECK_FALSE(z.contains(39, 0));
  CHECK_FALSE(z.contains(100, 150));
}

TEST_CASE("zone validation") {
  const CameraConfig cam;
  ShelfZone z;
  CHECK_NOTHROW(validate_zone(z, 640, 480, cam));
  z.x_shelf_dist_dx = 700;
  CHECK_THROWS_AS(validate_zone(z, 640, 480, cam), ArgumentError);
  z = ShelfZone{};
  z.shelf_plane_mm = 3000;
  CHECK_THROWS_AS(validate_zone(z, 640, 480, cam), ArgumentError);
  z = ShelfZone{};
  z.cells[{8, 0}] = {"x", "y"};
  CHECK_THROWS_AS(validate_zone(z, 640, 480, cam), ArgumentError);
  CHECK_THROWS_AS(validate_interaction_params({2, 0.9, 0.05, 3, 20}), ArgumentError);
  CHECK_THROWS_AS(validate_interaction_params({64, 0.9, 0.05, 0, 20}), ArgumentError);
}

TEST_CASE("contact detection") {
  const CameraConfig cam;
  const ShelfZone zone;
  DepthFrame f = DepthFrame::filled(640, 480, 3000);

  SUBCASE("blob outside the zone") {
    const Blob b = blob_of({{300, 300}, {301, 300}}, 640);
    f.at(300, 300) = 1000;
    CHECK_FALSE(detect_contact(b, f, zone, cam).has_value());
  }
  SUBCASE("single in-zone pixel above the plane") {
    const Blob b = blob_of({{200, 100}}, 640);
    f.at(200, 100) = static_cast<std::uint16_t>(3000 - 1200 - 50);
    const auto c = detect_contact(b, f, zone, cam);
    REQUIRE(c.has_value());
    CHECK(c->u == 200);
    CHECK(c->v == 100);
    CHECK(c->world.z == doctest::Approx(1250.0));
    CHECK(c->cell == zone.cell_of(200, 100));
  }
  SUBCASE("pixel at or below the plane does not count") {
    const Blob b = blob_of({{200, 100}}, 640);
    f.at(200, 100) = 1800;
    CHECK_FALSE(detect_contact(b, f, zone, cam).has_value());
  }
  SUBCASE("minimum row, then minimum depth, then minimum column") {
    const Blob b = blob_of({{200, 90}, {210, 90}, {205, 90}, {100, 95}, {150, 120}}, 640);
    f.at(200, 90) = 1500;
    f.at(210, 90) = 1400;
    f.at(205, 90) = 1400;
    f.at(100, 95) = 1000;
    f.at(150, 120) = 1000;
    const auto c = detect_contact(b, f, zone, cam);
    REQUIRE(c.has_value());
    CHECK(c->u == 205);
    CHECK(c->v == 90);
  }
}

TEST_CASE("patch at the image corner keeps its size") {
  const DepthFrame f = DepthFrame::filled(640, 480, 1700);
  const ForegroundMask fg = no_foreground(f);
  const OccupancyPatch p = capture_patch(f, &fg, 0, 0, 64, 1200, 20, CameraConfig{});
  CHECK(p.size == 64);
  CHECK(p.occupied.size() == 64u * 64u);
  CHECK(p.excluded[0] == 1);
  CHECK(p.occupied[0] == 0);
  CHECK(p.excluded[32 * 64 + 32] == 0);
  CHECK(p.occupied[32 * 64 + 32] == 1);
}

TEST_CASE("similarity edge cases") {
  const auto a = patch_from({1, 0, 1, 0}, 2);
  CHECK(patch_similarity(a, a) == 1.0);
  CHECK(patch_similarity(a, patch_from({0, 1, 0, 1}, 2)) == -1.0);
  CHECK(patch_similarity(patch_from({1, 1, 1, 1}, 2), patch_from({1, 1, 1, 1}, 2)) == 1.0);
  CHECK(patch_similarity(patch_from({0, 0, 0, 0}, 2), patch_from({1, 1, 1, 1}, 2)) == 0.0);
  CHECK(patch_similarity(patch_from({0, 0, 0, 0}, 2), a) == 0.0);
  auto masked = patch_from({1, 0, 1, 1}, 2);
  masked.excluded[3] = 1;
  CHECK(patch_similarity(masked, a) == 1.0);
  CHECK_THROWS_AS(patch_similarity(a, patch_from({1}, 1)), ArgumentError);
}

TEST_CASE("identical patches are neutral for any threshold") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> bits(64 * 64);
    for (auto& b : bits) b = static_cast<int>(rng() % 2);
    const auto p = patch_from(bits, 64);
    InteractionParams params;
    params.sim_threshold = trial == 0 ? 1.0 : static_cast<double>(rng() % 1000) / 1000.0;
    CHECK(classify_patches(p, p, params).type == InteractionType::Neutral);
  }
}

TEST_CASE("occupancy drop beyond tolerance is positive when dissimilar") {
  std::mt19937 rng(6);
  const InteractionParams params;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> start(64 * 64);
    std::vector<int> end(64 * 64);
    for (auto& b : start) b = rng() % 3 == 0;
    for (auto& b : end) b = rng() % (2 + trial % 5) == 0;
    const auto cls = classify_patches(patch_from(start, 64), patch_from(end, 64), params);
    if (cls.similarity >= params.sim_threshold) continue;
    const double tol = params.area_tol * 64 * 64;
    if (cls.end_area < cls.start_area - tol) {
      CHECK(cls.type == InteractionType::Positive);
    } else {
      CHECK(cls.type == InteractionType::Negative);
    }
  }
}

TEST_CASE("removing a product block classifies positive, shifting it negative") {
  DepthFrame before = DepthFrame::filled(200, 200, 1800);
  for (int v = 80; v < 120; ++v) {
    for (int u = 80; u < 120; ++u) before.at(u, v) = 1760;
  }
  DepthFrame removed = DepthFrame::filled(200, 200, 1800);
  DepthFrame shifted = DepthFrame::filled(200, 200, 1800);
  for (int v = 80; v < 120; ++v) {
    for (int u = 92; u < 132; ++u) shifted.at(u, v) = 1760;
  }
  const ForegroundMask fg = no_foreground(before);
  const CameraConfig cam{"c", 3000, 200, 200, 100, 100};
  const auto p0 = capture_patch(before, &fg, 100, 100, 64, 1200, 20, cam);
  const auto p1 = capture_patch(removed, &fg, 100, 100, 64, 1200, 20, cam);
  const auto p2 = capture_patch(shifted, &fg, 100, 100, 64, 1200, 20, cam);
  const InteractionParams params;
  CHECK(classify_patches(p0, p1, params).type == InteractionType::Positive);
  CHECK(classify_patches(p0, p2, params).type == InteractionType::Negative);
  CHECK(classify_patches(p0, p0, params).type == InteractionType::Neutral);
}

TEST_CASE("lifecycle errors") {
  const DepthFrame f = DepthFrame::filled(640, 480, 1500, 0);
  const ForegroundMask fg = no_foreground(f);
  const ShelfZone zone;
  const CameraConfig cam;
  const InteractionParams params;
  const Contact c{200, 50, 1500, {}, {2, 0}};
  InteractionState st = open_interaction(7, c, f, fg, zone, cam, params);
  CHECK(st.status == InteractionStatus::Open);
  const InteractionEvent e = close_and_classify(st, f, fg, 500, zone, cam, params);
  CHECK(e.type == InteractionType::Neutral);
  CHECK(e.track_id == 7);
  CHECK(e.end_ms == 500);
  CHECK(st.status == InteractionStatus::Closed);
  CHECK_THROWS_AS(close_and_classify(st, f, fg, 600, zone, cam, params), StateError);

  InteractionMonitor m(zone, cam, params);
  m.open(7, c, f, fg);
  CHECK_THROWS_AS(m.open(7, c, f, fg), StateError);
}

TEST_CASE("monitor emits one event after a sustained contact") {
  const ShelfZone zone;
  const CameraConfig cam;
  InteractionMonitor m(zone, cam, InteractionParams{});
  const Blob arm = blob_of({{300, 60}, {300, 61}, {301, 60}}, 640);
  std::vector<InteractionEvent> events;

  DepthFrame f = DepthFrame::filled(640, 480, 3000, 0);
  const ForegroundMask fg = no_foreground(f);
  CHECK(m.step({}, f, fg).empty());
  CHECK(m.open_states().empty());

  for (int k = 0; k < 10; ++k) {
    f.timestamp_ms = 100 + 33 * k;
    for (auto [u, v] : {std::pair{300, 60}, {300, 61}, {301, 60}}) f.at(u, v) = 1500;
    const std::vector<TrackedBlob> tb = {{4, &arm}};
    auto out = m.step(tb, f, fg);
    events.insert(events.end(), out.begin(), out.end());
  }
  CHECK(events.empty());
  REQUIRE(m.open_states().size() == 1);
  DepthFrame g = DepthFrame::filled(640, 480, 3000, 0);
  for (int k = 0; k < 5; ++k) {
    g.timestamp_ms = 500 + 33 * k;
    auto out = m.step({}, g, fg);
    events.insert(events.end(), out.begin(), out.end());
  }
  REQUIRE(events.size() == 1);
  CHECK(events[0].start_ms == 100);
  CHECK(events[0].end_ms == 100 + 33 * 9);
  CHECK(events[0].track_id == 4);
  CHECK(events[0].cell == zone.cell_of(300, 60));
  CHECK(m.open_states().empty());
  CHECK(m.history().size() == 1);
}

TEST_CASE("simulated reach: contact cell, world point and arm footprint") {
  Scenario s = make_reach_scenario(21, 1);
  s.noise_stddev_mm = 0.0;
  auto& reach = s.persons[0].reaches[0];
  // Keep the target cell empty so the patch holds only the arm.
  s.shelf.empty_cells.push_back(reach.cell);
  const Rig rig(s);
  const std::size_t i = static_cast<std::size_t>(std::ceil((reach.start_ms - s.start_ms) * s.fps / 1000.0)) + 2;
  const DepthFrame f = rig.sim.render(i);
  const ForegroundMask fg = subtract(rig.model, f);
  const auto blobs = extract_blobs(fg, f, 400);
  REQUIRE(blobs.size() == 1);
  const ShelfZone zone;
  const auto c = detect_contact(blobs[0], f, zone, s.camera);
  REQUIRE(c.has_value());
  CHECK(c->cell == reach.cell);
  CHECK(c->world.z > zone.shelf_plane_mm);

  int tu = 0;
  int tv = 0;
  rig.sim.reach_tip(reach, tu, tv);
  const WorldPoint target = rig.sim.unproject(tu, tv, f.at(tu, tv));
  CHECK(std::abs(c->world.x - target.x) <= 30.0);
  CHECK(std::abs(c->world.y - target.y) <= 30.0);
  CHECK(std::abs(c->world.z - target.z) <= 30.0);

  const OccupancyPatch p = capture_patch(f, nullptr, c->u, c->v, 64, zone.shelf_plane_mm, 20, s.camera);
  const auto arm = rig.sim.arm_footprint(0, i);
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (int r = 0; r < 64; ++r) {
    for (int col = 0; col < 64; ++col) {
      const int u = c->u - 32 + col;
      const int v = c->v - 32 + r;
      if (u < 0 || v < 0 || u >= s.width || v >= s.shelf.rows) continue;
      const bool a = arm[static_cast<std::size_t>(v) * s.width + u] != 0;
      const bool b = p.occupied[static_cast<std::size_t>(r) * 64 + col] != 0;
      inter += a && b;
      uni += a || b;
    }
  }
  REQUIRE(uni > 0);
  CHECK(static_cast<double>(inter) / static_cast<double>(uni) >= 0.8);
}
