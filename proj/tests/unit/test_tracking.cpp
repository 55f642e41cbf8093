#include <doctest.h>

#include <random>
#include <set>

#include "shopper/errors.hpp"
#include "shopper/tracking.hpp"

using namespace shopper;

namespace {

PersonDetection det(int u, int v, double height) {
  PersonDetection d;
  d.head = {u, v, static_cast<std::uint16_t>(3000 - height)};
  d.height_mm = height;
  d.valid_head = d.in_height_range = d.clear_of_border = true;
  return d;
}

}  // namespace

TEST_CASE("nearby detection keeps the same identifier") {
  Tracker t;
  const std::vector<PersonDetection> a = {det(100, 100, 1750)};
  const auto r1 = t.associate(a, 0);
  REQUIRE(r1.new_ids.size() == 1);
  const std::vector<PersonDetection> b = {det(104, 101, 1760)};
  const auto r2 = t.associate(b, 33);
  CHECK(r2.track_of_detection[0] == r1.track_of_detection[0]);
  CHECK(r2.new_ids.empty());
  CHECK(r2.matched == 1);
  const Track* tr = t.find(r1.track_of_detection[0]);
  REQUIRE(tr != nullptr);
  CHECK(tr->height_mm == doctest::Approx(1753.0));
  CHECK(tr->last_seen_ms == 33);
  CHECK(tr->head_history.back().timestamp_ms == 33);
}

TEST_CASE("two detections with no tracks get two new distinct ids") {
  Tracker t;
  const std::vector<PersonDetection> d = {det(100, 100, 1700), det(400, 300, 1800)};
  const auto r = t.associate(d, 0);
  CHECK(r.new_ids.size() == 2);
  CHECK(r.track_of_detection[0] != r.track_of_detection[1]);
}

TEST_CASE("height gate and displacement gate spawn new tracks") {
  Tracker t;
  t.associate(std::vector<PersonDetection>{det(100, 100, 1700)}, 0);
  auto r = t.associate(std::vector<PersonDetection>{det(102, 100, 1850)}, 33);
  CHECK(r.new_ids.size() == 1);
  r = t.associate(std::vector<PersonDetection>{det(300, 100, 1700)}, 66);
  CHECK(r.new_ids.size() == 1);
}

TEST_CASE("greedy matching prefers the globally nearest pair") {
  Tracker t;
  const auto r0 = t.associate(std::vector<PersonDetection>{det(100, 100, 1700), det(150, 100, 1700)}, 0);
  const auto r1 = t.associate(std::vector<PersonDetection>{det(140, 100, 1700), det(112, 100, 1700)}, 33);
  CHECK(r1.track_of_detection[1] == r0.track_of_detection[0]);
  CHECK(r1.track_of_detection[0] == r0.track_of_detection[1]);
}

TEST_CASE("coasting track is found again along its motion") {
  Tracker t;
  int id = 0;
  for (int k = 0; k < 5; ++k) {
    id = t.associate(std::vector<PersonDetection>{det(100 + 20 * k, 200, 1700)}, 33 * k).track_of_detection[0];
  }
  t.associate(std::vector<PersonDetection>{}, 165);
  t.associate(std::vector<PersonDetection>{}, 198);
  // Four frames after the last sighting, 80 px further on.
  const auto r = t.associate(std::vector<PersonDetection>{det(260, 200, 1700)}, 231);
  CHECK(r.track_of_detection[0] == id);
}

TEST_CASE("prune closes stale tracks only") {
  Tracker t;
  const auto r = t.associate(std::vector<PersonDetection>{det(100, 100, 1700)}, 0);
  CHECK(t.prune(1000).empty());
  const auto closed = t.prune(5000);
  REQUIRE(closed.size() == 1);
  CHECK(closed[0].track_id == r.track_of_detection[0]);
  CHECK(closed[0].entry_ms == 0);
  CHECK(closed[0].exit_ms == 0);
  CHECK(t.tracks().empty());
}

TEST_CASE("zone dwell intervals follow head presence") {
  Tracker t;
  auto step = [&](std::int64_t now, bool inside) {
    const auto r = t.associate(std::vector<PersonDetection>{det(100, 100, 1700)}, now);
    t.update_zone(r.track_of_detection[0], "shelf", inside, now);
  };
  step(0, false);
  step(100, true);
  step(200, true);
  step(300, false);
  step(400, true);
  const auto visits = t.close_all();
  REQUIRE(visits.size() == 1);
  const std::vector<ZoneInterval> expected = {{"shelf", 100, 200}, {"shelf", 400, 400}};
  CHECK(visits[0].zone_intervals == expected);
  CHECK(visits[0].dwell_ms == 400);
}

TEST_CASE("identity and conservation properties on random streams") {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    Tracker t;
    std::set<int> all_ids;
    int last_issued = 0;
    for (int frame = 0; frame < 60; ++frame) {
      std::vector<PersonDetection> dets;
      const int n = static_cast<int>(rng() % 5);
      for (int i = 0; i < n; ++i) {
        dets.push_back(det(static_cast<int>(rng() % 640), static_cast<int>(rng() % 480),
                           1500 + static_cast<double>(rng() % 400)));
      }
      std::size_t active_before = 0;
      std::vector<std::pair<int, double>> heights;
      for (const auto& tr : t.tracks()) {
        ++active_before;
        heights.emplace_back(tr.id, tr.height_mm);
      }
      const auto r = t.associate(dets, frame * 33);
      CHECK(r.matched + r.new_ids.size() == dets.size());
      CHECK(r.matched + r.missed_ids.size() == active_before);
      std::set<int> in_frame(r.track_of_detection.begin(), r.track_of_detection.end());
      CHECK(in_frame.size() == dets.size());
      for (int id : r.new_ids) {
        CHECK(id > last_issued);
        last_issued = id;
        CHECK(all_ids.insert(id).second);
      }
      for (std::size_t i = 0; i < dets.size(); ++i) {
        for (const auto& [id, h] : heights) {
          if (id == r.track_of_detection[i]) CHECK(std::abs(h - dets[i].height_mm) <= 100.0);
        }
      }
      t.prune(frame * 33);
    }
  }
}

TEST_CASE("tracker parameter validation") {
  CHECK_THROWS_AS(Tracker(TrackerParams{0, 100, 1500, 0.3, 4}), ArgumentError);
  CHECK_THROWS_AS(Tracker(TrackerParams{60, 100, 0, 0.3, 4}), ArgumentError);
  CHECK_THROWS_AS(Tracker(TrackerParams{60, 100, 1500, 0.0, 4}), ArgumentError);
}
