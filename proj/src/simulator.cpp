#include "shopper/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "shopper/depth_io.hpp"
#include "shopper/errors.hpp"

namespace shopper {
using nlohmann::json;

namespace {

constexpr std::size_t kNoiseTableSize = 1u << 16;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double standard_normal_quantile(double p) {
  double lo = -9.0;
  double hi = 9.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (standard_normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Quantized Gaussian, truncated at +-3 sigma, indexed by 16 hash bits.
std::vector<std::int16_t> make_noise_table(double stddev) {
  std::vector<std::int16_t> table(kNoiseTableSize, 0);
  if (stddev <= 0.0) return table;
  for (std::size_t i = 0; i < kNoiseTableSize; ++i) {
    const double p = (static_cast<double>(i) + 0.5) / kNoiseTableSize;
    const double z = std::clamp(standard_normal_quantile(p), -3.0, 3.0);
    table[i] = static_cast<std::int16_t>(std::lround(z * stddev));
  }
  return table;
}

std::uint16_t clamp_depth(long d) {
  return static_cast<std::uint16_t>(std::clamp<long>(d, 1, kMaxDepthMm - 1));
}

// ---- JSON reading with field paths in diagnostics ----

template <typename T>
void read_opt(const json& j, const char* key, T& out, const std::string& ctx) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw FormatError("scenario field '" + ctx + key + "' has the wrong type");
  }
}

template <typename T>
T read_req(const json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key)) {
    throw FormatError("scenario field '" + ctx + key + "' is missing");
  }
  T out{};
  read_opt(j, key, out, ctx);
  return out;
}

CellIndex read_cell(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() ||
      !j[1].is_number_integer()) {
    throw FormatError("scenario field '" + field + "' must be [col, row]");
  }
  return {j[0].get<int>(), j[1].get<int>()};
}

json cell_json(CellIndex c) { return json::array({c.col, c.row}); }

std::string agent_ctx(std::size_t i) { return "persons[" + std::to_string(i) + "]."; }

}  // namespace

// ---------------------------------------------------------------- Scenario

std::size_t Scenario::frame_count() const {
  const double n = std::ceil(static_cast<double>(duration_ms) * fps / 1000.0 - 1e-9);
  return n > 0 ? static_cast<std::size_t>(n) : 0;
}

std::int64_t Scenario::frame_timestamp(std::size_t i) const {
  return start_ms + static_cast<std::int64_t>(std::floor(i * 1000.0 / fps + 1e-9));
}

void validate_scenario(const Scenario& s) {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ArgumentError("scenario field '" + field + "' " + why);
  };
  if (s.width <= 0) fail("width", "must be positive");
  if (s.height <= 0) fail("height", "must be positive");
  if (!(s.fps > 0.0) || s.fps > 1000.0) fail("fps", "must be in (0, 1000]");
  if (s.duration_ms <= 0) fail("duration_ms", "must be positive");
  if (!(s.floor_depth_mm > 0.0) || s.floor_depth_mm >= kMaxDepthMm) {
    fail("floor_depth_mm", "must be in (0, 10000)");
  }
  if (s.noise_stddev_mm < 0.0) fail("noise_stddev_mm", "must be non-negative");
  try {
    validate_camera(s.camera, s.width, s.height);
  } catch (const ArgumentError& e) {
    fail("camera", e.what());
  }
  const ShelfLayout& sh = s.shelf;
  if (sh.rows < 0 || sh.rows > s.height) fail("shelf.rows", "must lie in [0, height]");
  if (sh.rows > 0) {
    if (!(sh.plane_mm > 0.0) || sh.plane_mm >= s.camera.camera_height_mm) {
      fail("shelf.plane_mm", "must lie strictly between floor and camera");
    }
    if (sh.x_sx < 0 || sh.x_sx >= sh.x_dx || sh.x_dx > s.width) {
      fail("shelf.x_sx", "and x_dx must satisfy 0 <= x_sx < x_dx <= width");
    }
    if (sh.grid_cols <= 0 || sh.grid_rows <= 0) fail("shelf.grid_cols", "must be positive");
    const double cw = static_cast<double>(sh.x_dx - sh.x_sx) / sh.grid_cols;
    const double ch = static_cast<double>(sh.rows) / sh.grid_rows;
    if (sh.product_w_px <= 0 || sh.product_w_px > cw || sh.product_h_px <= 0 ||
        sh.product_h_px > ch) {
      fail("shelf.product_w_px", "products must fit inside a cell");
    }
  }
  for (std::size_t i = 0; i < s.persons.size(); ++i) {
    const ScriptedAgent& a = s.persons[i];
    const std::string ctx = agent_ctx(i);
    if (!(a.body_height_mm > 0.0) || a.body_height_mm >= s.camera.camera_height_mm) {
      fail(ctx + "height_mm", "must be below the camera height");
    }
    if (!(a.semi_axis_front_mm > 0.0) || !(a.semi_axis_side_mm > 0.0)) {
      fail(ctx + "semi_axis_front_mm", "semi-axes must be positive");
    }
    if (a.waypoints.empty()) fail(ctx + "waypoints", "must not be empty");
    for (std::size_t k = 1; k < a.waypoints.size(); ++k) {
      if (a.waypoints[k].t_ms <= a.waypoints[k - 1].t_ms) {
        fail(ctx + "waypoints[" + std::to_string(k) + "].t_ms", "must strictly increase");
      }
    }
    for (std::size_t k = 0; k < a.reaches.size(); ++k) {
      const ReachAction& r = a.reaches[k];
      const std::string rctx = ctx + "reaches[" + std::to_string(k) + "].";
      if (a.shape != AgentShape::Person) fail(rctx + "type", "only people can reach");
      if (r.start_ms >= r.end_ms) fail(rctx + "end_ms", "must follow start_ms");
      if (r.start_ms < a.entry_ms() || r.end_ms > a.exit_ms()) {
        fail(rctx + "start_ms", "reach window must lie inside the presence window");
      }
      if (sh.rows == 0) fail(rctx + "cell", "scene has no shelf");
      if (r.cell.col < 0 || r.cell.col >= sh.grid_cols || r.cell.row < 0 ||
          r.cell.row >= sh.grid_rows) {
        fail(rctx + "cell", "is outside the shelf grid");
      }
      if (sh.plane_mm + s.body.hand_clearance_mm >= a.body_height_mm) {
        fail(rctx + "cell", "hand height is above the person's head");
      }
    }
  }
}

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("scenario must be a JSON object");
  Scenario s;
  read_opt(j, "width", s.width, "");
  read_opt(j, "height", s.height, "");
  read_opt(j, "fps", s.fps, "");
  read_opt(j, "start_ms", s.start_ms, "");
  s.duration_ms = read_req<std::int64_t>(j, "duration_ms", "");
  read_opt(j, "noise_stddev_mm", s.noise_stddev_mm, "");
  read_opt(j, "seed", s.seed, "");
  if (j.contains("camera")) {
    try {
      s.camera = camera_from_json(j.at("camera"));
    } catch (const FormatError& e) {
      throw FormatError(std::string("scenario field 'camera': ") + e.what());
    }
  }
  s.floor_depth_mm = s.camera.camera_height_mm;
  read_opt(j, "floor_depth_mm", s.floor_depth_mm, "");
  if (j.contains("shelf")) {
    const json& sh = j.at("shelf");
    if (!sh.is_object()) throw FormatError("scenario field 'shelf' must be an object");
    read_opt(sh, "rows", s.shelf.rows, "shelf.");
    read_opt(sh, "plane_mm", s.shelf.plane_mm, "shelf.");
    read_opt(sh, "x_sx", s.shelf.x_sx, "shelf.");
    read_opt(sh, "x_dx", s.shelf.x_dx, "shelf.");
    read_opt(sh, "grid_cols", s.shelf.grid_cols, "shelf.");
    read_opt(sh, "grid_rows", s.shelf.grid_rows, "shelf.");
    read_opt(sh, "product_w_px", s.shelf.product_w_px, "shelf.");
    read_opt(sh, "product_h_px", s.shelf.product_h_px, "shelf.");
    read_opt(sh, "product_raise_mm", s.shelf.product_raise_mm, "shelf.");
    if (sh.contains("empty_cells")) {
      const json& cells = sh.at("empty_cells");
      if (!cells.is_array()) throw FormatError("scenario field 'shelf.empty_cells' must be an array");
      for (std::size_t i = 0; i < cells.size(); ++i) {
        s.shelf.empty_cells.push_back(
            read_cell(cells[i], "shelf.empty_cells[" + std::to_string(i) + "]"));
      }
    }
  }
  if (j.contains("body")) {
    const json& b = j.at("body");
    if (!b.is_object()) throw FormatError("scenario field 'body' must be an object");
    read_opt(b, "head_radius_mm", s.body.head_radius_mm, "body.");
    read_opt(b, "shoulder_drop_mm", s.body.shoulder_drop_mm, "body.");
    read_opt(b, "edge_drop_mm", s.body.edge_drop_mm, "body.");
    read_opt(b, "arm_radius_px", s.body.arm_radius_px, "body.");
    read_opt(b, "hand_clearance_mm", s.body.hand_clearance_mm, "body.");
  }
  if (j.contains("persons")) {
    const json& persons = j.at("persons");
    if (!persons.is_array()) throw FormatError("scenario field 'persons' must be an array");
    for (std::size_t i = 0; i < persons.size(); ++i) {
      const json& p = persons[i];
      const std::string ctx = agent_ctx(i);
      if (!p.is_object()) throw FormatError("scenario field '" + ctx.substr(0, ctx.size() - 1) + "' must be an object");
      ScriptedAgent a;
      std::string shape = "person";
      read_opt(p, "shape", shape, ctx);
      if (shape == "person") {
        a.shape = AgentShape::Person;
      } else if (shape == "box") {
        a.shape = AgentShape::Box;
      } else {
        throw FormatError("scenario field '" + ctx + "shape' must be \"person\" or \"box\"");
      }
      a.body_height_mm = read_req<double>(p, "height_mm", ctx);
      read_opt(p, "semi_axis_front_mm", a.semi_axis_front_mm, ctx);
      read_opt(p, "semi_axis_side_mm", a.semi_axis_side_mm, ctx);
      const json wps = read_req<json>(p, "waypoints", ctx);
      if (!wps.is_array()) throw FormatError("scenario field '" + ctx + "waypoints' must be an array");
      for (std::size_t k = 0; k < wps.size(); ++k) {
        const std::string wctx = ctx + "waypoints[" + std::to_string(k) + "].";
        a.waypoints.push_back({read_req<std::int64_t>(wps[k], "t_ms", wctx),
                               read_req<double>(wps[k], "x_mm", wctx),
                               read_req<double>(wps[k], "y_mm", wctx)});
      }
      if (p.contains("reaches")) {
        const json& rs = p.at("reaches");
        if (!rs.is_array()) throw FormatError("scenario field '" + ctx + "reaches' must be an array");
        for (std::size_t k = 0; k < rs.size(); ++k) {
          const std::string rctx = ctx + "reaches[" + std::to_string(k) + "].";
          ReachAction r;
          r.start_ms = read_req<std::int64_t>(rs[k], "start_ms", rctx);
          r.end_ms = read_req<std::int64_t>(rs[k], "end_ms", rctx);
          r.cell = read_cell(read_req<json>(rs[k], "cell", rctx), rctx + "cell");
          const auto type = parse_interaction_type(read_req<std::string>(rs[k], "type", rctx));
          if (!type) throw FormatError("scenario field '" + rctx + "type' must be positive, negative or neutral");
          r.type = *type;
          if (rs[k].contains("displace_px")) {
            const CellIndex d = read_cell(rs[k].at("displace_px"), rctx + "displace_px");
            r.displace_u_px = d.col;
            r.displace_v_px = d.row;
          }
          a.reaches.push_back(r);
        }
      }
      s.persons.push_back(std::move(a));
    }
  }
  return s;
}

json scenario_to_json(const Scenario& s) {
  json empty = json::array();
  for (const auto& c : s.shelf.empty_cells) empty.push_back(cell_json(c));
  json persons = json::array();
  for (const auto& a : s.persons) {
    json wps = json::array();
    for (const auto& w : a.waypoints) {
      wps.push_back({{"t_ms", w.t_ms}, {"x_mm", w.x_mm}, {"y_mm", w.y_mm}});
    }
    json reaches = json::array();
    for (const auto& r : a.reaches) {
      reaches.push_back({{"start_ms", r.start_ms},
                         {"end_ms", r.end_ms},
                         {"cell", cell_json(r.cell)},
                         {"type", std::string(to_string(r.type))},
                         {"displace_px", json::array({r.displace_u_px, r.displace_v_px})}});
    }
    persons.push_back({{"shape", a.shape == AgentShape::Person ? "person" : "box"},
                       {"height_mm", a.body_height_mm},
                       {"semi_axis_front_mm", a.semi_axis_front_mm},
                       {"semi_axis_side_mm", a.semi_axis_side_mm},
                       {"waypoints", wps},
                       {"reaches", reaches}});
  }
  return {{"width", s.width},
          {"height", s.height},
          {"fps", s.fps},
          {"start_ms", s.start_ms},
          {"duration_ms", s.duration_ms},
          {"floor_depth_mm", s.floor_depth_mm},
          {"noise_stddev_mm", s.noise_stddev_mm},
          {"seed", s.seed},
          {"camera", camera_to_json(s.camera)},
          {"shelf",
           {{"rows", s.shelf.rows},
            {"plane_mm", s.shelf.plane_mm},
            {"x_sx", s.shelf.x_sx},
            {"x_dx", s.shelf.x_dx},
            {"grid_cols", s.shelf.grid_cols},
            {"grid_rows", s.shelf.grid_rows},
            {"product_w_px", s.shelf.product_w_px},
            {"product_h_px", s.shelf.product_h_px},
            {"product_raise_mm", s.shelf.product_raise_mm},
            {"empty_cells", empty}}},
          {"body",
           {{"head_radius_mm", s.body.head_radius_mm},
            {"shoulder_drop_mm", s.body.shoulder_drop_mm},
            {"edge_drop_mm", s.body.edge_drop_mm},
            {"arm_radius_px", s.body.arm_radius_px},
            {"hand_clearance_mm", s.body.hand_clearance_mm}}},
          {"persons", persons}};
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("scenario " + path.string() + " is not valid JSON: " + e.what());
  }
  return scenario_from_json(j);
}

// ---------------------------------------------------------------- truth log

void GroundTruthLog::write_jsonl(const std::filesystem::path& path,
                                 const std::string& camera_id) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& f : frames) {
    json agents = json::array();
    for (const auto& a : f.agents) {
      agents.push_back({{"id", a.agent_id},
                        {"person", a.is_person},
                        {"u", a.u},
                        {"v", a.v},
                        {"head_depth_mm", a.head_depth_mm},
                        {"x_mm", a.x_mm},
                        {"y_mm", a.y_mm},
                        {"in_view", a.in_view}});
    }
    out << json{{"kind", "frame"}, {"frame", f.frame}, {"timestamp_ms", f.timestamp_ms},
                {"agents", agents}}.dump()
        << '\n';
  }
  for (const auto& e : interactions) {
    out << json{{"kind", "interaction"},
                {"camera_id", camera_id},
                {"agent_id", e.agent_id},
                {"type", std::string(to_string(e.type))},
                {"start_ms", e.start_ms},
                {"end_ms", e.end_ms},
                {"start_frame", e.start_frame},
                {"end_frame", e.end_frame},
                {"cell", cell_json(e.cell)},
                {"contact_px", json::array({e.contact_u, e.contact_v})},
                {"contact_depth_mm", e.contact_depth_mm},
                {"contact", {{"x", e.contact_world.x}, {"y", e.contact_world.y}, {"z", e.contact_world.z}}}}
               .dump()
        << '\n';
  }
  for (const auto& v : visits) {
    out << json{{"kind", "visit"},     {"camera_id", camera_id},   {"agent_id", v.agent_id},
                {"person", v.is_person}, {"entry_ms", v.entry_ms}, {"exit_ms", v.exit_ms}}
               .dump()
        << '\n';
  }
  if (!out) throw IoError("short write to " + path.string());
}

// ---------------------------------------------------------------- simulator

SceneSimulator::SceneSimulator(Scenario scenario) : scenario_(std::move(scenario)) {
  validate_scenario(scenario_);
  noise_table_ = make_noise_table(scenario_.noise_stddev_mm);
}

SceneSimulator::Projection SceneSimulator::project(const WorldPoint& p) const {
  const CameraConfig& c = scenario_.camera;
  const double depth = c.camera_height_mm - p.z;
  return {c.cx + c.fx * p.x / depth, c.cy + c.fy * p.y / depth, depth};
}

WorldPoint SceneSimulator::unproject(double u, double v, double depth_mm) const {
  const CameraConfig& c = scenario_.camera;
  return {(u - c.cx) * depth_mm / c.fx, (v - c.cy) * depth_mm / c.fy,
          c.camera_height_mm - depth_mm};
}

std::size_t SceneSimulator::cell_slot(CellIndex cell) const {
  return static_cast<std::size_t>(cell.row) * scenario_.shelf.grid_cols + cell.col;
}

void SceneSimulator::product_origin(CellIndex cell, int& u0, int& v0) const {
  const ShelfLayout& sh = scenario_.shelf;
  const double cw = static_cast<double>(sh.x_dx - sh.x_sx) / sh.grid_cols;
  const double ch = static_cast<double>(sh.rows) / sh.grid_rows;
  const int uc = sh.x_sx + static_cast<int>(std::floor((cell.col + 0.5) * cw));
  const int vc = static_cast<int>(std::floor((cell.row + 0.5) * ch));
  u0 = uc - sh.product_w_px / 2;
  v0 = vc - sh.product_h_px / 2;
}

std::vector<SceneSimulator::ProductState> SceneSimulator::products_at(std::int64_t t) const {
  const ShelfLayout& sh = scenario_.shelf;
  std::vector<ProductState> state(static_cast<std::size_t>(sh.grid_cols) * sh.grid_rows);
  for (const auto& c : sh.empty_cells) {
    if (c.col >= 0 && c.col < sh.grid_cols && c.row >= 0 && c.row < sh.grid_rows) {
      state[cell_slot(c)].present = false;
    }
  }
  std::vector<const ReachAction*> reaches;
  for (const auto& a : scenario_.persons) {
    for (const auto& r : a.reaches) reaches.push_back(&r);
  }
  std::stable_sort(reaches.begin(), reaches.end(),
                   [](const ReachAction* a, const ReachAction* b) { return a->start_ms < b->start_ms; });
  for (const ReachAction* r : reaches) {
    const std::int64_t span = r->end_ms - r->start_ms;
    const std::int64_t removed = r->start_ms + span * 3 / 10;
    const std::int64_t restored = r->start_ms + span * 7 / 10;
    ProductState& p = state[cell_slot(r->cell)];
    if (r->type == InteractionType::Positive && t >= removed) {
      p.present = false;
    } else if (r->type == InteractionType::Negative && t >= removed) {
      if (t < restored) {
        p.present = false;
      } else {
        p.present = true;
        p.du += r->displace_u_px;
        p.dv += r->displace_v_px;
      }
    }
  }
  return state;
}

bool SceneSimulator::product_at(CellIndex cell, std::int64_t t_ms, int& u0, int& v0) const {
  const auto state = products_at(t_ms);
  const ProductState& p = state.at(cell_slot(cell));
  product_origin(cell, u0, v0);
  u0 += p.du;
  v0 += p.dv;
  return p.present;
}

void SceneSimulator::reach_tip(const ReachAction& reach, int& u, int& v) const {
  int u0 = 0;
  int v0 = 0;
  product_at(reach.cell, reach.start_ms, u0, v0);
  u = u0 + scenario_.shelf.product_w_px / 2;
  v = v0 + scenario_.shelf.product_h_px / 2;
}

SceneSimulator::AgentPose SceneSimulator::pose(std::size_t agent, std::int64_t t) const {
  const ScriptedAgent& a = scenario_.persons[agent];
  AgentPose p;
  if (t < a.entry_ms() || t > a.exit_ms()) return p;
  p.present = true;
  const auto& w = a.waypoints;
  if (w.size() == 1) {
    p.x_mm = w[0].x_mm;
    p.y_mm = w[0].y_mm;
  } else {
    std::size_t k = 1;
    while (k + 1 < w.size() && w[k].t_ms < t) ++k;
    const double f = static_cast<double>(t - w[k - 1].t_ms) /
                     static_cast<double>(w[k].t_ms - w[k - 1].t_ms);
    const double g = std::clamp(f, 0.0, 1.0);
    p.x_mm = w[k - 1].x_mm + g * (w[k].x_mm - w[k - 1].x_mm);
    p.y_mm = w[k - 1].y_mm + g * (w[k].y_mm - w[k - 1].y_mm);
  }
  p.apex_depth = static_cast<int>(std::lround(scenario_.camera.camera_height_mm - a.body_height_mm));
  const Projection proj = project({p.x_mm, p.y_mm, a.body_height_mm});
  p.u = proj.u;
  p.v = proj.v;
  return p;
}

const ReachAction* SceneSimulator::active_reach(std::size_t agent, std::int64_t t) const {
  for (const auto& r : scenario_.persons[agent].reaches) {
    if (t >= r.start_ms && t < r.end_ms) return &r;
  }
  return nullptr;
}

namespace {

struct Capsule {
  double u0, v0, u1, v1, radius;

  double distance_sq(double u, double v) const {
    const double du = u1 - u0;
    const double dv = v1 - v0;
    const double len_sq = du * du + dv * dv;
    double s = len_sq > 0 ? ((u - u0) * du + (v - v0) * dv) / len_sq : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    const double eu = u - (u0 + s * du);
    const double ev = v - (v0 + s * dv);
    return eu * eu + ev * ev;
  }
};

}  // namespace

void SceneSimulator::render_agent(std::vector<std::uint16_t>& depth, std::size_t agent,
                                  std::int64_t t) const {
  const AgentPose p = pose(agent, t);
  if (!p.present) return;
  const ScriptedAgent& a = scenario_.persons[agent];
  const CameraConfig& cam = scenario_.camera;
  const BodyModel& body = scenario_.body;
  const int w = scenario_.width;
  const int h = scenario_.height;
  const double apex = p.apex_depth;
  const double mm_per_px_u = apex / cam.fx;
  const double mm_per_px_v = apex / cam.fy;
  const double au = a.semi_axis_side_mm / mm_per_px_u;
  const double av = a.semi_axis_front_mm / mm_per_px_v;
  const int u_lo = std::max(0, static_cast<int>(std::floor(p.u - au)));
  const int u_hi = std::min(w - 1, static_cast<int>(std::ceil(p.u + au)));
  const int v_lo = std::max(0, static_cast<int>(std::floor(p.v - av)));
  const int v_hi = std::min(h - 1, static_cast<int>(std::ceil(p.v + av)));
  const double head_r_sq = body.head_radius_mm * body.head_radius_mm;
  for (int v = v_lo; v <= v_hi; ++v) {
    const double dy = (v - p.v) * mm_per_px_v;
    const double ey = dy / a.semi_axis_front_mm;
    for (int u = u_lo; u <= u_hi; ++u) {
      const double dx = (u - p.u) * mm_per_px_u;
      const double ex = dx / a.semi_axis_side_mm;
      double d = 0.0;
      if (a.shape == AgentShape::Box) {
        if (std::abs(ex) > 1.0 || std::abs(ey) > 1.0) continue;
        d = apex;
      } else {
        const double rho_sq = ex * ex + ey * ey;
        if (rho_sq > 1.0) continue;
        const double r_sq = dx * dx + dy * dy;
        d = r_sq < head_r_sq ? apex + body.shoulder_drop_mm * r_sq / head_r_sq
                             : apex + body.shoulder_drop_mm + body.edge_drop_mm * rho_sq;
      }
      std::uint16_t& px = depth[static_cast<std::size_t>(v) * w + u];
      px = std::min<std::uint16_t>(px, clamp_depth(std::lround(d)));
    }
  }

  const ReachAction* reach = active_reach(agent, t);
  if (reach == nullptr) return;
  int tip_u = 0;
  int tip_v = 0;
  reach_tip(*reach, tip_u, tip_v);
  const double r = body.arm_radius_px;
  const Capsule arm{p.u, p.v, static_cast<double>(tip_u), static_cast<double>(tip_v) + r, r};
  const std::uint16_t hand_depth = clamp_depth(std::lround(
      cam.camera_height_mm - scenario_.shelf.plane_mm - body.hand_clearance_mm));
  const int cu_lo = std::max(0, static_cast<int>(std::floor(std::min(arm.u0, arm.u1) - r)));
  const int cu_hi = std::min(w - 1, static_cast<int>(std::ceil(std::max(arm.u0, arm.u1) + r)));
  const int cv_lo = std::max(0, static_cast<int>(std::floor(std::min(arm.v0, arm.v1) - r)));
  const int cv_hi = std::min(h - 1, static_cast<int>(std::ceil(std::max(arm.v0, arm.v1) + r)));
  for (int v = cv_lo; v <= cv_hi; ++v) {
    for (int u = cu_lo; u <= cu_hi; ++u) {
      if (arm.distance_sq(u, v) > r * r) continue;
      std::uint16_t& px = depth[static_cast<std::size_t>(v) * w + u];
      px = std::min(px, hand_depth);
    }
  }
}

void SceneSimulator::render_into(std::vector<std::uint16_t>& depth, std::int64_t t) const {
  const int w = scenario_.width;
  const ShelfLayout& sh = scenario_.shelf;
  depth.assign(static_cast<std::size_t>(w) * scenario_.height,
               clamp_depth(std::lround(scenario_.floor_depth_mm)));
  if (sh.rows > 0) {
    const double shelf_depth = scenario_.camera.camera_height_mm - sh.plane_mm;
    std::fill(depth.begin(), depth.begin() + static_cast<std::ptrdiff_t>(sh.rows) * w,
              clamp_depth(std::lround(shelf_depth)));
    const std::uint16_t product_depth =
        clamp_depth(std::lround(shelf_depth - sh.product_raise_mm));
    const auto products = products_at(t);
    for (int row = 0; row < sh.grid_rows; ++row) {
      for (int col = 0; col < sh.grid_cols; ++col) {
        const ProductState& p = products[cell_slot({col, row})];
        if (!p.present) continue;
        int u0 = 0;
        int v0 = 0;
        product_origin({col, row}, u0, v0);
        u0 += p.du;
        v0 += p.dv;
        for (int v = std::max(0, v0); v < std::min(sh.rows, v0 + sh.product_h_px); ++v) {
          for (int u = std::max(0, u0); u < std::min(w, u0 + sh.product_w_px); ++u) {
            depth[static_cast<std::size_t>(v) * w + u] = product_depth;
          }
        }
      }
    }
  }
  for (std::size_t a = 0; a < scenario_.persons.size(); ++a) {
    render_agent(depth, a, t);
  }
}

DepthFrame SceneSimulator::render_clean(std::size_t i) const {
  DepthFrame frame;
  frame.width = scenario_.width;
  frame.height = scenario_.height;
  frame.timestamp_ms = scenario_.frame_timestamp(i);
  render_into(frame.data, frame.timestamp_ms);
  return frame;
}

DepthFrame SceneSimulator::render(std::size_t i) const {
  DepthFrame frame = render_clean(i);
  if (scenario_.noise_stddev_mm <= 0.0) return frame;
  // One hash feeds four pixels, 16 bits each.
  const std::size_t n = frame.data.size();
  const std::size_t blocks = (n + 3) / 4;
  const std::uint64_t base = splitmix64(scenario_.seed ^ 0x5DEECE66Dull) +
                             static_cast<std::uint64_t>(i) * blocks;
  std::uint16_t* out = frame.data.data();
  const std::int16_t* table = noise_table_.data();
  for (std::size_t k = 0; k < blocks; ++k) {
    std::uint64_t h = splitmix64(base + k);
    const std::size_t end = std::min(n, 4 * k + 4);
    for (std::size_t p = 4 * k; p < end; ++p, h >>= 16) {
      const int d = static_cast<int>(out[p]) + table[h & 0xFFFF];
      out[p] = static_cast<std::uint16_t>(std::clamp(d, 1, static_cast<int>(kMaxDepthMm) - 1));
    }
  }
  return frame;
}

FrameTruth SceneSimulator::frame_truth(std::size_t i) const {
  FrameTruth truth;
  truth.frame = i;
  truth.timestamp_ms = scenario_.frame_timestamp(i);
  for (std::size_t a = 0; a < scenario_.persons.size(); ++a) {
    const AgentPose p = pose(a, truth.timestamp_ms);
    if (!p.present) continue;
    AgentSample s;
    s.agent_id = static_cast<int>(a);
    s.is_person = scenario_.persons[a].shape == AgentShape::Person;
    s.u = p.u;
    s.v = p.v;
    s.head_depth_mm = p.apex_depth;
    s.x_mm = p.x_mm;
    s.y_mm = p.y_mm;
    s.in_view = p.u >= 0 && p.v >= 0 && p.u < scenario_.width && p.v < scenario_.height;
    truth.agents.push_back(s);
  }
  return truth;
}

GroundTruthLog SceneSimulator::event_truth() const {
  GroundTruthLog log;
  const std::size_t n = frame_count();
  const std::uint16_t hand_depth = clamp_depth(std::lround(scenario_.camera.camera_height_mm -
                                                           scenario_.shelf.plane_mm -
                                                           scenario_.body.hand_clearance_mm));
  for (std::size_t a = 0; a < scenario_.persons.size(); ++a) {
    const ScriptedAgent& agent = scenario_.persons[a];
    log.visits.push_back({static_cast<int>(a), agent.shape == AgentShape::Person,
                          agent.entry_ms(), agent.exit_ms()});
    for (const auto& r : agent.reaches) {
      TruthInteraction e;
      e.agent_id = static_cast<int>(a);
      e.type = r.type;
      e.start_ms = r.start_ms;
      e.end_ms = r.end_ms;
      e.cell = r.cell;
      std::size_t first = n;
      std::size_t last = n;
      for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t t = scenario_.frame_timestamp(i);
        if (t >= r.start_ms && t < r.end_ms) {
          if (first == n) first = i;
          last = i;
        }
      }
      if (first == n) continue;  // falls between frames; never rendered
      e.start_frame = first;
      e.end_frame = last;
      reach_tip(r, e.contact_u, e.contact_v);
      e.contact_depth_mm = hand_depth;
      e.contact_world = unproject(e.contact_u, e.contact_v, hand_depth);
      log.interactions.push_back(e);
    }
  }
  std::stable_sort(log.interactions.begin(), log.interactions.end(),
                   [](const TruthInteraction& x, const TruthInteraction& y) {
                     return x.start_ms < y.start_ms;
                   });
  return log;
}

std::vector<std::uint8_t> SceneSimulator::agent_footprint(std::size_t agent, std::size_t i) const {
  // Render the agent alone over an "infinitely far" background.
  std::vector<std::uint16_t> depth(static_cast<std::size_t>(scenario_.width) * scenario_.height,
                                   kMaxDepthMm - 1);
  render_agent(depth, agent, scenario_.frame_timestamp(i));
  std::vector<std::uint8_t> mask(depth.size());
  for (std::size_t p = 0; p < depth.size(); ++p) mask[p] = depth[p] < kMaxDepthMm - 1 ? 1 : 0;
  return mask;
}

std::vector<std::uint8_t> SceneSimulator::arm_footprint(std::size_t agent, std::size_t i) const {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(scenario_.width) * scenario_.height, 0);
  const std::int64_t t = scenario_.frame_timestamp(i);
  const AgentPose p = pose(agent, t);
  const ReachAction* reach = p.present ? active_reach(agent, t) : nullptr;
  if (reach == nullptr) return mask;
  int tip_u = 0;
  int tip_v = 0;
  reach_tip(*reach, tip_u, tip_v);
  const double r = scenario_.body.arm_radius_px;
  const Capsule arm{p.u, p.v, static_cast<double>(tip_u), static_cast<double>(tip_v) + r, r};
  for (int v = 0; v < scenario_.height; ++v) {
    for (int u = 0; u < scenario_.width; ++u) {
      if (arm.distance_sq(u, v) <= r * r) mask[static_cast<std::size_t>(v) * scenario_.width + u] = 1;
    }
  }
  return mask;
}

SimulationResult simulate(const Scenario& scenario) {
  const SceneSimulator sim(scenario);
  SimulationResult result;
  const std::size_t n = sim.frame_count();
  result.frames.reserve(n);
  result.truth = sim.event_truth();
  result.truth.frames.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    result.frames.push_back(sim.render(i));
    result.truth.frames.push_back(sim.frame_truth(i));
  }
  return result;
}

// ---------------------------------------------------------------- presets

namespace {

constexpr std::int64_t kWarmupMs = 1200;  // empty scene while the background initializes

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Floor-plane x of a head at pixel column u.
double world_x(const Scenario& s, double u, double height_mm) {
  return (u - s.camera.cx) * (s.camera.camera_height_mm - height_mm) / s.camera.fx;
}

double world_y(const Scenario& s, double v, double height_mm) {
  return (v - s.camera.cy) * (s.camera.camera_height_mm - height_mm) / s.camera.fy;
}

double half_width_px(const Scenario& s, const ScriptedAgent& a) {
  return a.semi_axis_side_mm * s.camera.fx / (s.camera.camera_height_mm - a.body_height_mm);
}

double half_depth_px(const Scenario& s, const ScriptedAgent& a) {
  return a.semi_axis_front_mm * s.camera.fy / (s.camera.camera_height_mm - a.body_height_mm);
}

// Walk from off-image on one side to off-image on the other along row v.
void add_crossing_walk(const Scenario& s, ScriptedAgent& a, double v, bool left_to_right,
                       std::int64_t t0, double speed_mm_s) {
  const double margin = half_width_px(s, a) + 10.0;
  const double u_from = left_to_right ? -margin : s.width + margin;
  const double u_to = left_to_right ? s.width + margin : -margin;
  const double x0 = world_x(s, u_from, a.body_height_mm);
  const double x1 = world_x(s, u_to, a.body_height_mm);
  const double y = world_y(s, v, a.body_height_mm);
  const auto dt = static_cast<std::int64_t>(std::abs(x1 - x0) / speed_mm_s * 1000.0);
  a.waypoints = {{t0, x0, y}, {t0 + dt, x1, y}};
}

}  // namespace

Scenario make_reach_scenario(std::uint64_t seed, int reaches) {
  std::mt19937_64 rng(seed);
  Scenario s;
  s.seed = seed;
  ScriptedAgent a;
  a.body_height_mm = std::round(uniform(rng, 1550.0, 1950.0));
  const double av = half_depth_px(s, a);
  const double v_stand = s.shelf.rows + 15.0 + av + uniform(rng, 0.0, 10.0);
  const double u_stand = uniform(rng, 200.0, 440.0);
  const bool from_left = (rng() & 1u) != 0;
  const double margin = half_width_px(s, a) + 10.0;
  const double u_enter = from_left ? -margin : s.width + margin;
  const double u_leave = from_left ? s.width + margin : -margin;
  const double y = world_y(s, v_stand, a.body_height_mm);
  const double speed = uniform(rng, 1000.0, 1400.0);
  auto walk_ms = [&](double u_a, double u_b) {
    return static_cast<std::int64_t>(std::abs(world_x(s, u_b, a.body_height_mm) -
                                              world_x(s, u_a, a.body_height_mm)) /
                                     speed * 1000.0);
  };
  std::int64_t t = kWarmupMs;
  a.waypoints.push_back({t, world_x(s, u_enter, a.body_height_mm), y});
  t += walk_ms(u_enter, u_stand);
  a.waypoints.push_back({t, world_x(s, u_stand, a.body_height_mm), y});
  t += 400;

  std::vector<CellIndex> cells;
  for (int r = 0; r < s.shelf.grid_rows; ++r) {
    for (int c = 0; c < s.shelf.grid_cols; ++c) cells.push_back({c, r});
  }
  std::shuffle(cells.begin(), cells.end(), rng);
  for (int k = 0; k < reaches; ++k) {
    ReachAction r;
    r.cell = cells[static_cast<std::size_t>(k) % cells.size()];
    r.type = static_cast<InteractionType>(rng() % 3);
    r.start_ms = t;
    r.end_ms = t + static_cast<std::int64_t>(uniform(rng, 800.0, 1400.0));
    r.displace_u_px = (rng() & 1u) ? 12 : -12;
    a.reaches.push_back(r);
    t = r.end_ms + static_cast<std::int64_t>(uniform(rng, 400.0, 700.0));
  }
  a.waypoints.push_back({t, world_x(s, u_stand, a.body_height_mm), y});
  t += walk_ms(u_stand, u_leave);
  a.waypoints.push_back({t, world_x(s, u_leave, a.body_height_mm), y});
  s.persons.push_back(a);
  s.duration_ms = t + 600;
  return s;
}

Scenario make_entrance_scenario(std::uint64_t seed, int people) {
  std::mt19937_64 rng(seed);
  Scenario s;
  s.seed = seed;
  std::int64_t t = kWarmupMs;
  std::int64_t end = t;
  for (int i = 0; i < people; ++i) {
    ScriptedAgent a;
    a.body_height_mm = std::round(uniform(rng, 1500.0, 1950.0));
    const double v = uniform(rng, 285.0, 330.0);
    add_crossing_walk(s, a, v, true, t, uniform(rng, 1000.0, 1500.0));
    end = std::max(end, a.exit_ms());
    // Next person enters once this one is past mid-frame, so blobs never touch.
    t = a.exit_ms() - 800 + static_cast<std::int64_t>(uniform(rng, 0.0, 1500.0));
    s.persons.push_back(a);
  }
  s.duration_ms = end + 600;
  return s;
}

Scenario make_crossing_scenario(std::uint64_t seed, double height_a_mm, double height_b_mm) {
  std::mt19937_64 rng(seed);
  Scenario s;
  s.seed = seed;
  ScriptedAgent a;
  a.body_height_mm = height_a_mm;
  ScriptedAgent b;
  b.body_height_mm = height_b_mm;
  const double speed = uniform(rng, 1000.0, 1300.0);
  add_crossing_walk(s, a, uniform(rng, 285.0, 300.0), true, kWarmupMs, speed);
  add_crossing_walk(s, b, uniform(rng, 365.0, 380.0), false, kWarmupMs, speed);
  s.persons = {a, b};
  s.duration_ms = std::max(a.exit_ms(), b.exit_ms()) + 600;
  return s;
}

}  // namespace shopper
