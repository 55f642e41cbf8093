#include "shopper/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "shopper/errors.hpp"

namespace shopper {

CameraConfig CameraOverrides::apply(CameraConfig base) const {
  if (camera_id) base.camera_id = *camera_id;
  if (camera_height_mm) base.camera_height_mm = *camera_height_mm;
  if (fx) base.fx = *fx;
  if (fy) base.fy = *fy;
  if (cx) base.cx = *cx;
  if (cy) base.cy = *cy;
  return base;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(s);
  while (std::getline(in, part, sep)) parts.push_back(trim(part));
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, value);
  if (text.empty() || r.ec != std::errc() || r.ptr != end) {
    throw FormatError("config key '" + key + "': invalid number '" + text + "'");
  }
  return value;
}

struct Key {
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::optional<std::string>(const PipelineConfig&)> get;
};

template <typename T, typename Member>
Key number_key(Member member) {
  return {[member](PipelineConfig& c, const std::string& v) {
            // The key name is filled in by the caller's error handler.
            std::invoke(member, c) = parse_number<T>("", v);
          },
          [member](const PipelineConfig& c) -> std::optional<std::string> {
            const auto value = std::invoke(member, const_cast<PipelineConfig&>(c));
            if constexpr (std::is_floating_point_v<T>) {
              return fmt(value);
            } else {
              return std::to_string(value);
            }
          }};
}

template <typename Member>
Key camera_key(Member member) {
  return {[member](PipelineConfig& c, const std::string& v) {
            c.camera.*member = parse_number<double>("", v);
          },
          [member](const PipelineConfig& c) -> std::optional<std::string> {
            const auto& value = c.camera.*member;
            if (!value) return std::nullopt;
            return fmt(*value);
          }};
}

const std::map<std::string, Key>& keys() {
  static const std::map<std::string, Key> table = [] {
    std::map<std::string, Key> t;
    t["cam.camera_id"] = {[](PipelineConfig& c, const std::string& v) { c.camera.camera_id = v; },
                          [](const PipelineConfig& c) { return c.camera.camera_id; }};
    t["cam.camera_height_mm"] = camera_key(&CameraOverrides::camera_height_mm);
    t["cam.fx"] = camera_key(&CameraOverrides::fx);
    t["cam.fy"] = camera_key(&CameraOverrides::fy);
    t["cam.cx"] = camera_key(&CameraOverrides::cx);
    t["cam.cy"] = camera_key(&CameraOverrides::cy);
    t["bg.init_frames"] = number_key<int>([](PipelineConfig& c) -> int& { return c.background.init_frames; });
    t["bg.alpha"] = number_key<double>([](PipelineConfig& c) -> double& { return c.background.alpha; });
    t["bg.threshold_mm"] =
        number_key<double>([](PipelineConfig& c) -> double& { return c.background.threshold_mm; });
    t["det.min_blob_area"] =
        number_key<std::size_t>([](PipelineConfig& c) -> std::size_t& { return c.detection.min_blob_area; });
    t["det.jump_mm"] = number_key<double>([](PipelineConfig& c) -> double& { return c.detection.jump_mm; });
    t["det.ring_radius_px"] =
        number_key<int>([](PipelineConfig& c) -> int& { return c.detection.ring_radius_px; });
    t["det.height_min_mm"] =
        number_key<double>([](PipelineConfig& c) -> double& { return c.detection.height_min_mm; });
    t["det.height_max_mm"] =
        number_key<double>([](PipelineConfig& c) -> double& { return c.detection.height_max_mm; });
    t["det.border_margin_px"] =
        number_key<int>([](PipelineConfig& c) -> int& { return c.detection.border_margin_px; });
    t["trk.max_disp_px"] =
        number_key<double>([](PipelineConfig& c) -> double& { return c.tracking.max_disp_px_per_frame; });
    t["trk.height_gate_mm"] =
        number_key<double>([](PipelineConfig& c) -> double& { return c.tracking.height_gate_mm; });
    t["trk.lost_timeout_ms"] = number_key<std::int64_t>(
        [](PipelineConfig& c) -> std::int64_t& { return c.tracking.lost_timeout_ms; });
    t["trk.height_smoothing"] =
        number_key<double>([](PipelineConfig& c) -> double& { return c.tracking.height_smoothing; });
    t["trk.max_coast_frames"] =
        number_key<int>([](PipelineConfig& c) -> int& { return c.tracking.max_coast_frames; });
    t["int.patch_px"] = number_key<int>([](PipelineConfig& c) -> int& { return c.interaction.patch_px; });
    t["int.sim_threshold"] =
        number_key<double>([](PipelineConfig& c) -> double& { return c.interaction.sim_threshold; });
    t["int.area_tol"] = number_key<double>([](PipelineConfig& c) -> double& { return c.interaction.area_tol; });
    t["int.debounce_frames"] =
        number_key<int>([](PipelineConfig& c) -> int& { return c.interaction.debounce_frames; });
    t["int.occupancy_margin_mm"] =
        number_key<double>([](PipelineConfig& c) -> double& { return c.interaction.occupancy_margin_mm; });
    t["map.zone_id"] = {[](PipelineConfig& c, const std::string& v) { c.map.zone_id = v; },
                        [](const PipelineConfig& c) { return std::optional(c.map.zone_id); }};
    t["map.rect_px"] = {
        [](PipelineConfig& c, const std::string& v) {
          std::string s = v;
          if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
          const auto parts = split(s, ',');
          if (parts.size() != 4) throw FormatError("expected [x,y,w,h]");
          c.map.x = parse_number<int>("", parts[0]);
          c.map.y = parse_number<int>("", parts[1]);
          c.map.w = parse_number<int>("", parts[2]);
          c.map.h = parse_number<int>("", parts[3]);
        },
        [](const PipelineConfig& c) {
          return std::optional("[" + std::to_string(c.map.x) + "," + std::to_string(c.map.y) + "," +
                               std::to_string(c.map.w) + "," + std::to_string(c.map.h) + "]");
        }};
    t["map.marker_radius_px"] =
        number_key<int>([](PipelineConfig& c) -> int& { return c.map.marker_radius_px; });
    t["ana.zone_min_dwell_ms"] =
        number_key<std::int64_t>([](PipelineConfig& c) -> std::int64_t& { return c.zone_min_dwell_ms; });
    return t;
  }();
  return table;
}

std::string format_cells(const std::map<CellIndex, ProductInfo>& cells) {
  std::string out;
  for (const auto& [cell, info] : cells) {
    if (!out.empty()) out += "; ";
    out += std::to_string(cell.col) + "," + std::to_string(cell.row) + ":" + info.product + "/" +
           info.category;
  }
  return out;
}

std::map<CellIndex, ProductInfo> parse_cells(const std::string& text) {
  std::map<CellIndex, ProductInfo> cells;
  for (const auto& entry : split(text, ';')) {
    if (entry.empty()) continue;
    const auto colon = entry.find(':');
    if (colon == std::string::npos) throw FormatError("expected 'col,row:product/category'");
    const auto idx = split(entry.substr(0, colon), ',');
    if (idx.size() != 2) throw FormatError("expected 'col,row' before ':'");
    const std::string rest = trim(entry.substr(colon + 1));
    const auto slash = rest.find('/');
    ProductInfo info;
    info.product = trim(rest.substr(0, slash));
    info.category = slash == std::string::npos ? "" : trim(rest.substr(slash + 1));
    if (info.product.empty()) throw FormatError("empty product name");
    const CellIndex cell{parse_number<int>("", idx[0]), parse_number<int>("", idx[1])};
    if (!cells.emplace(cell, info).second) throw FormatError("cell listed twice");
  }
  return cells;
}

void set_zone_field(ShelfZone& z, const std::string& field, const std::string& v) {
  if (field == "x_sx") {
    z.x_shelf_dist_sx = parse_number<int>("", v);
  } else if (field == "x_dx") {
    z.x_shelf_dist_dx = parse_number<int>("", v);
  } else if (field == "y_dist") {
    z.y_shelf_dist = parse_number<int>("", v);
  } else if (field == "shelf_plane_mm") {
    z.shelf_plane_mm = parse_number<double>("", v);
  } else if (field == "grid_cols") {
    z.grid_cols = parse_number<int>("", v);
  } else if (field == "grid_rows") {
    z.grid_rows = parse_number<int>("", v);
  } else if (field == "approach_px") {
    z.approach_px = parse_number<int>("", v);
  } else if (field == "cells") {
    z.cells = parse_cells(v);
  } else {
    throw ArgumentError("unknown key");
  }
}

}  // namespace

PipelineConfig parse_config(const std::string& text, const std::string& source) {
  PipelineConfig config;
  std::vector<ShelfZone> zones;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    const std::string where = source + ":" + std::to_string(line_no);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw FormatError(where + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError(where + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!section.empty()) key = section + "." + key;
    try {
      if (key.rfind("zone.", 0) == 0) {
        const auto dot = key.rfind('.');
        const std::string id = key.substr(5, dot > 5 ? dot - 5 : 0);
        if (id.empty() || dot <= 5) throw ArgumentError("unknown key");
        auto it = std::find_if(zones.begin(), zones.end(),
                               [&](const ShelfZone& z) { return z.zone_id == id; });
        if (it == zones.end()) {
          ShelfZone z;
          z.zone_id = id;
          zones.push_back(z);
          it = zones.end() - 1;
        }
        set_zone_field(*it, key.substr(dot + 1), value);
        continue;
      }
      const auto it = keys().find(key);
      if (it == keys().end()) throw ArgumentError("unknown key");
      it->second.set(config, value);
    } catch (const ArgumentError&) {
      throw FormatError(where + ": unknown config key '" + key + "'");
    } catch (const FormatError& e) {
      std::string msg = e.what();
      const std::string prefix = "config key '': ";
      if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
      throw FormatError(where + ": config key '" + key + "': " + msg);
    }
  }
  if (!zones.empty()) config.zones = zones;
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

std::string dump_config(const PipelineConfig& config) {
  std::ostringstream out;
  for (const auto& [name, key] : keys()) {
    const auto value = key.get(config);
    if (value) {
      out << name << " = " << *value << '\n';
    } else {
      out << "# " << name << " = (from sequence)\n";
    }
  }
  for (const auto& z : config.zones) {
    const std::string p = "zone." + z.zone_id + ".";
    out << p << "x_sx = " << z.x_shelf_dist_sx << '\n'
        << p << "x_dx = " << z.x_shelf_dist_dx << '\n'
        << p << "y_dist = " << z.y_shelf_dist << '\n'
        << p << "shelf_plane_mm = " << fmt(z.shelf_plane_mm) << '\n'
        << p << "grid_cols = " << z.grid_cols << '\n'
        << p << "grid_rows = " << z.grid_rows << '\n'
        << p << "approach_px = " << z.approach_px << '\n'
        << p << "cells = " << format_cells(z.cells) << '\n';
  }
  return out.str();
}

void validate_config(const PipelineConfig& config, int width, int height,
                     const CameraConfig& camera) {
  validate_camera(camera, width, height);
  validate_background_params(config.background);
  validate_detection_params(config.detection);
  validate_tracker_params(config.tracking);
  validate_interaction_params(config.interaction);
  if (config.zones.empty()) throw ArgumentError("at least one zone is required");
  for (std::size_t i = 0; i < config.zones.size(); ++i) {
    validate_zone(config.zones[i], width, height, camera);
    for (std::size_t j = 0; j < i; ++j) {
      if (config.zones[j].zone_id == config.zones[i].zone_id) {
        throw ArgumentError("zone '" + config.zones[i].zone_id + "' is defined twice");
      }
    }
  }
  if (config.zone_min_dwell_ms < 0) throw ArgumentError("ana.zone_min_dwell_ms must be >= 0");
}

const ShelfZone* find_zone(const PipelineConfig& config, const std::string& zone_id) {
  for (const auto& z : config.zones) {
    if (z.zone_id == zone_id) return &z;
  }
  return nullptr;
}

}  // namespace shopper
