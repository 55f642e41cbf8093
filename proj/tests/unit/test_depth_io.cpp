#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "helpers.hpp"
#include "shopper/depth_io.hpp"
#include "shopper/errors.hpp"
#include "shopper/pnm.hpp"
#include "shopper/simulator.hpp"

using namespace shopper;
using testing::TempDir;

namespace {

std::vector<DepthFrame> ramp_frames(int n, int w, int h) {
  std::vector<DepthFrame> frames;
  for (int i = 0; i < n; ++i) {
    DepthFrame f = DepthFrame::filled(w, h, 3000, 100 + 33 * i);
    for (std::size_t p = 0; p < f.data.size(); ++p) {
      f.data[p] = static_cast<std::uint16_t>((p * 7 + static_cast<std::size_t>(i) * 13) % 9999);
    }
    frames.push_back(f);
  }
  return frames;
}

}  // namespace

TEST_CASE("pgm16 round trip keeps every sample") {
  TempDir dir;
  std::vector<std::uint16_t> samples = {0, 1, 255, 256, 3000, 9999, 65535, 12345};
  write_pgm16(dir / "a.pgm", 4, 2, samples);
  const Gray16Image img = read_pgm(dir / "a.pgm");
  CHECK(img.width == 4);
  CHECK(img.height == 2);
  CHECK(img.samples == samples);
}

TEST_CASE("ppm round trip and 8-bit pgm widening") {
  TempDir dir;
  RgbImage img = RgbImage::filled(3, 2, {10, 20, 30});
  img.set(2, 1, {255, 0, 128});
  write_ppm(dir / "a.ppm", img);
  CHECK(read_pnm_rgb(dir / "a.ppm") == img);

  std::ofstream(dir / "g.pgm", std::ios::binary) << "P5\n# comment\n2 1\n255\n" << '\x07' << '\xff';
  const RgbImage gray = read_pnm_rgb(dir / "g.pgm");
  CHECK(gray.at(0, 0) == Rgb{7, 7, 7});
  CHECK(gray.at(1, 0) == Rgb{255, 255, 255});
}

TEST_CASE("truncated netpbm is a format error") {
  TempDir dir;
  std::ofstream(dir / "bad.pgm", std::ios::binary) << "P5\n4 4\n65535\n\x01\x02";
  CHECK_THROWS_AS(read_pgm(dir / "bad.pgm"), FormatError);
  std::ofstream(dir / "bad2.pgm", std::ios::binary) << "P7\n4 4\n";
  CHECK_THROWS_AS(read_pgm(dir / "bad2.pgm"), FormatError);
}

TEST_CASE("three saved frames load back in order") {
  TempDir dir;
  const auto frames = ramp_frames(3, 8, 6);
  const CameraConfig cam{"c", 3000, 4, 4, 4, 3};
  save_sequence(frames, cam, dir.path());
  FrameSource src = load_sequence(dir.path());
  CHECK(src.size() == 3);
  CHECK(src.width() == 8);
  CHECK(src.camera() == cam);
  const auto loaded = src.read_all();
  REQUIRE(loaded.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(loaded[i] == frames[i]);
  CHECK(loaded[0].timestamp_ms < loaded[1].timestamp_ms);
  CHECK(loaded[1].timestamp_ms < loaded[2].timestamp_ms);
}

TEST_CASE("constant frame file has max sample 3000") {
  TempDir dir;
  const std::vector<DepthFrame> frames = {DepthFrame::filled(5, 4, 3000, 0)};
  save_sequence(frames, CameraConfig{"c", 3000, 4, 4, 2, 2}, dir.path());
  const Gray16Image img = read_pgm(dir / "frame_000000.pgm");
  CHECK(*std::max_element(img.samples.begin(), img.samples.end()) == 3000);
}

TEST_CASE("save_sequence rejects empty and ragged input") {
  TempDir dir;
  CHECK_THROWS_AS(save_sequence({}, CameraConfig{}, dir.path()), ArgumentError);
  const std::vector<DepthFrame> ragged = {DepthFrame::filled(4, 4, 1, 0),
                                          DepthFrame::filled(4, 3, 1, 1)};
  CHECK_THROWS_AS(save_sequence(ragged, CameraConfig{"c", 3000, 2, 2, 1, 1}, dir.path()),
                  ArgumentError);
}

TEST_CASE("unwritable sequence path is an io error") {
  TempDir dir;
  std::ofstream(dir / "plain_file") << "x";
  const std::vector<DepthFrame> frames = {DepthFrame::filled(4, 4, 3000, 0)};
  CHECK_THROWS_AS(save_sequence(frames, CameraConfig{"c", 3000, 2, 2, 1, 1}, dir / "plain_file"),
                  IoError);
}

TEST_CASE("missing index is a format error") {
  TempDir dir;
  CHECK_THROWS_AS(load_sequence(dir.path()), FormatError);
}

TEST_CASE("frame size disagreeing with the index is a format error") {
  TempDir dir;
  const std::vector<DepthFrame> frames = {DepthFrame::filled(640, 480, 3000, 0)};
  save_sequence(frames, CameraConfig{}, dir.path());
  const std::vector<std::uint16_t> small(320 * 240, 3000);
  write_pgm16(dir / "frame_000000.pgm", 320, 240, small);
  FrameSource src = load_sequence(dir.path());
  CHECK_THROWS_AS(src.next(), FormatError);
}

TEST_CASE("index problems are format errors") {
  TempDir dir;
  const auto frames = ramp_frames(2, 4, 4);
  save_sequence(frames, CameraConfig{"c", 3000, 2, 2, 1, 1}, dir.path());
  auto rewrite = [&](const std::string& text) { std::ofstream(dir / "index.json") << text; };

  rewrite(R"({"format":"shopper-depth-sequence","version":1,"width":4,"height":4,
              "camera":{},"frames":[{"file":"frame_000001.pgm","timestamp_ms":5},
                                    {"file":"frame_000000.pgm","timestamp_ms":5}]})");
  CHECK_THROWS_AS(load_sequence(dir.path()), FormatError);

  rewrite(R"({"format":"shopper-depth-sequence","version":1,"width":4,"height":4,
              "camera":{},"frames":[{"file":"nope.pgm","timestamp_ms":5}]})");
  CHECK_THROWS_AS(load_sequence(dir.path()), FormatError);

  rewrite(R"({"format":"shopper-depth-sequence","version":1,"width":4,"height":4,
              "camera":{},"frames":[]})");
  CHECK_THROWS_AS(load_sequence(dir.path()), FormatError);

  rewrite("{not json");
  CHECK_THROWS_AS(load_sequence(dir.path()), FormatError);
}

TEST_CASE("simulated sequence round-trips bit-identically") {
  TempDir dir;
  Scenario s = make_reach_scenario(3, 1);
  s.duration_ms = 3333;  // 100 frames
  const SimulationResult sim = simulate(s);
  REQUIRE(sim.frames.size() == 100);
  save_sequence(sim.frames, s.camera, dir.path());
  FrameSource src = load_sequence(dir.path());
  CHECK(src.camera() == s.camera);
  std::size_t i = 0;
  while (auto f = src.next()) {
    REQUIRE(i < sim.frames.size());
    CHECK(*f == sim.frames[i]);
    ++i;
  }
  CHECK(i == 100);
}

TEST_CASE("sequence writer streams frames") {
  TempDir dir;
  const auto frames = ramp_frames(4, 6, 5);
  {
    SequenceWriter w(dir.path(), CameraConfig{"c", 3000, 3, 3, 3, 2});
    for (const auto& f : frames) w.write(f);
    w.finish();
  }
  CHECK(load_sequence(dir.path()).read_all() == frames);
  SequenceWriter empty(dir / "e", CameraConfig{});
  CHECK_THROWS_AS(empty.finish(), ArgumentError);
}

TEST_CASE("empty scenario renders floor within the noise band") {
  const Scenario s = testing::empty_scenario(200, 8.0);
  const SceneSimulator sim(s);
  const DepthFrame f = sim.render(3);
  const auto shelf_depth = static_cast<int>(s.camera.camera_height_mm - s.shelf.plane_mm);
  for (int v = s.shelf.rows; v < s.height; ++v) {
    for (int u = 0; u < s.width; ++u) {
      const int d = f.at(u, v);
      REQUIRE(std::abs(d - 3000) <= 24);
    }
  }
  CHECK(std::abs(f.at(0, 0) - shelf_depth) <= 24);
}

TEST_CASE("head apex equals camera height minus body height") {
  const Scenario s = testing::standing_scenario(1750, 0, 200, 200);
  const SceneSimulator sim(s);
  const DepthFrame clean = sim.render_clean(0);
  const DepthFrame noisy = sim.render(0);
  const auto apex = *std::min_element(clean.data.begin(), clean.data.end());
  CHECK(apex == 1250);
  const auto pos = sim.project({0, 200, 1750});
  const int u = static_cast<int>(std::lround(pos.u));
  const int v = static_cast<int>(std::lround(pos.v));
  CHECK(clean.at(u, v) == 1250);
  CHECK(std::abs(noisy.at(u, v) - 1250) <= 24);

  // Shoulder ring around the head is at least 150 mm deeper than the apex.
  const auto ring = 72;
  for (int k = 0; k < 16; ++k) {
    const double a = k * 3.14159265358979 / 8;
    const int ru = u + static_cast<int>(std::lround(ring * std::cos(a)));
    const int rv = v + static_cast<int>(std::lround(ring * std::sin(a)));
    CHECK(clean.at(ru, rv) >= 1250 + 150);
  }
}

TEST_CASE("rendering is deterministic per seed") {
  const Scenario s = make_reach_scenario(11, 2);
  const SceneSimulator a(s);
  const SceneSimulator b(s);
  for (std::size_t i : {0u, 40u, 90u}) CHECK(a.render(i) == b.render(i));
  Scenario other = s;
  other.seed = 12;
  CHECK_FALSE(SceneSimulator(other).render(40) == a.render(40));
}

TEST_CASE("scripted positive reach yields exactly one positive truth event") {
  Scenario s = make_reach_scenario(5, 1);
  s.persons[0].reaches[0].type = InteractionType::Positive;
  const GroundTruthLog truth = SceneSimulator(s).event_truth();
  REQUIRE(truth.interactions.size() == 1);
  CHECK(truth.interactions[0].type == InteractionType::Positive);
  CHECK(truth.interactions[0].end_frame < s.frame_count());
}

TEST_CASE("positive reach removes the product, negative puts it back displaced") {
  Scenario s = make_reach_scenario(5, 2);
  auto& r = s.persons[0].reaches;
  r[0].type = InteractionType::Positive;
  r[1].type = InteractionType::Negative;
  const SceneSimulator sim(s);
  int u0 = 0;
  int v0 = 0;
  int u1 = 0;
  int v1 = 0;
  CHECK(sim.product_at(r[0].cell, r[0].start_ms - 1, u0, v0));
  CHECK_FALSE(sim.product_at(r[0].cell, r[0].end_ms, u0, v0));
  REQUIRE(sim.product_at(r[1].cell, r[1].start_ms - 1, u0, v0));
  REQUIRE(sim.product_at(r[1].cell, r[1].end_ms, u1, v1));
  CHECK(u1 - u0 == r[1].displace_u_px);
  CHECK(v1 == v0);
}

TEST_CASE("scenario validation names the offending field") {
  Scenario s = make_reach_scenario(1, 1);
  s.persons[0].reaches[0].end_ms = s.persons[0].exit_ms() + 10;
  try {
    validate_scenario(s);
    FAIL("expected ArgumentError");
  } catch (const ArgumentError& e) {
    CHECK(std::string(e.what()).find("reaches[0]") != std::string::npos);
  }
  Scenario tall = testing::standing_scenario(3100, 0, 0, 100);
  CHECK_THROWS_AS(validate_scenario(tall), ArgumentError);
}

TEST_CASE("scenario json round trip and malformed fields") {
  const Scenario s = make_reach_scenario(9, 3);
  const Scenario back = scenario_from_json(scenario_to_json(s));
  CHECK(scenario_to_json(back) == scenario_to_json(s));
  CHECK(SceneSimulator(back).render(50) == SceneSimulator(s).render(50));

  auto j = scenario_to_json(s);
  j["persons"][0]["height_mm"] = "tall";
  try {
    scenario_from_json(j);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("height_mm") != std::string::npos);
  }
  auto k = scenario_to_json(s);
  k.erase("duration_ms");
  CHECK_THROWS_WITH_AS(scenario_from_json(k), doctest::Contains("duration_ms"), FormatError);
}

TEST_CASE("nearer depth wins where agents overlap") {
  Scenario s = testing::standing_scenario(1800, 0, 300, 100);
  ScriptedAgent b = s.persons[0];
  b.body_height_mm = 1500;
  b.waypoints = {{0, 100, 300}, {100, 100, 300}};
  s.persons.push_back(b);
  const SceneSimulator sim(s);
  const DepthFrame f = sim.render_clean(0);
  const auto pa = sim.project({0, 300, 1800});
  CHECK(f.at(static_cast<int>(std::lround(pa.u)), static_cast<int>(std::lround(pa.v))) == 1200);
}
