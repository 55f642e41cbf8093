#pragma once

// Synthetic top-view depth scenes with exact ground truth.
//
// Scene layout (image coordinates, v grows away from the shelf):
//   rows [0, shelf.rows)          shelf top surface at shelf.plane_mm above the floor
//   zone rect [x_sx, x_dx) x rows  product grid, one product patch per cell
//   remaining rows                floor at floor_depth_mm
// People are ellipses with a head dome (parabolic, peaking at the apex) and a
// shoulder plateau shoulder_drop_mm below the apex. Reaches add an arm capsule
// from the head center to a tip pixel at the target product.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "shopper/types.hpp"

namespace shopper {

struct Waypoint {
  std::int64_t t_ms = 0;
  double x_mm = 0.0;  // head position on the floor plane, relative to the optical axis
  double y_mm = 0.0;
};

struct ReachAction {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  CellIndex cell;
  InteractionType type = InteractionType::Neutral;
  // Where a Negative reach puts the product back, relative to where it was.
  int displace_u_px = 12;
  int displace_v_px = 0;
};

enum class AgentShape { Person, Box };

struct ScriptedAgent {
  AgentShape shape = AgentShape::Person;
  double body_height_mm = 1750.0;
  double semi_axis_front_mm = 180.0;  // along image v
  double semi_axis_side_mm = 250.0;   // along image u
  std::vector<Waypoint> waypoints;    // presence window = [first.t_ms, last.t_ms]
  std::vector<ReachAction> reaches;

  std::int64_t entry_ms() const { return waypoints.front().t_ms; }
  std::int64_t exit_ms() const { return waypoints.back().t_ms; }
};

struct ShelfLayout {
  int rows = 150;
  double plane_mm = 1200.0;
  int x_sx = 40;
  int x_dx = 600;
  int grid_cols = 8;
  int grid_rows = 2;
  int product_w_px = 40;
  int product_h_px = 40;
  double product_raise_mm = 40.0;
  std::vector<CellIndex> empty_cells;
};

struct BodyModel {
  double head_radius_mm = 80.0;
  double shoulder_drop_mm = 200.0;
  double edge_drop_mm = 100.0;
  int arm_radius_px = 12;
  double hand_clearance_mm = 200.0;  // hand height above the shelf plane
};

struct Scenario {
  int width = 640;
  int height = 480;
  double fps = 30.0;
  std::int64_t start_ms = 0;
  std::int64_t duration_ms = 10000;
  double floor_depth_mm = 3000.0;
  double noise_stddev_mm = 8.0;
  std::uint64_t seed = 1;
  CameraConfig camera;
  ShelfLayout shelf;
  BodyModel body;
  std::vector<ScriptedAgent> persons;

  std::size_t frame_count() const;
  std::int64_t frame_timestamp(std::size_t frame_index) const;
};

/// Throws ArgumentError naming the offending field.
void validate_scenario(const Scenario& scenario);

/// Throws FormatError naming the offending field.
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& scenario);
Scenario load_scenario(const std::filesystem::path& path);

struct AgentSample {
  int agent_id = 0;
  bool is_person = true;
  double u = 0.0;  // head center in pixels (may lie outside the image)
  double v = 0.0;
  int head_depth_mm = 0;
  double x_mm = 0.0;
  double y_mm = 0.0;
  bool in_view = false;  // head center inside the image
};

struct FrameTruth {
  std::size_t frame = 0;
  std::int64_t timestamp_ms = 0;
  std::vector<AgentSample> agents;
};

struct TruthInteraction {
  int agent_id = 0;
  InteractionType type = InteractionType::Neutral;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::size_t start_frame = 0;
  std::size_t end_frame = 0;  // last frame showing the arm
  CellIndex cell;
  int contact_u = 0;
  int contact_v = 0;
  int contact_depth_mm = 0;
  WorldPoint contact_world;
};

struct TruthVisit {
  int agent_id = 0;
  bool is_person = true;
  std::int64_t entry_ms = 0;
  std::int64_t exit_ms = 0;
};

struct GroundTruthLog {
  std::vector<FrameTruth> frames;
  std::vector<TruthInteraction> interactions;
  std::vector<TruthVisit> visits;

  /// One JSON object per line: frames, then interactions, then visits.
  void write_jsonl(const std::filesystem::path& path, const std::string& camera_id) const;
};

struct SimulationResult {
  std::vector<DepthFrame> frames;
  GroundTruthLog truth;
};

/// Streaming renderer. Frame i depends only on (scenario, i).
class SceneSimulator {
 public:
  explicit SceneSimulator(Scenario scenario);

  const Scenario& scenario() const { return scenario_; }
  std::size_t frame_count() const { return scenario_.frame_count(); }

  /// Renders frame i with sensor noise.
  DepthFrame render(std::size_t frame_index) const;
  /// Same scene without noise.
  DepthFrame render_clean(std::size_t frame_index) const;

  FrameTruth frame_truth(std::size_t frame_index) const;
  /// Interactions and visits, independent of any frame.
  GroundTruthLog event_truth() const;

  /// Pixels covered by agent a (body plus any active arm) in frame i, 0/1 per pixel.
  std::vector<std::uint8_t> agent_footprint(std::size_t agent, std::size_t frame_index) const;
  /// Pixels covered by agent a's arm capsule in frame i.
  std::vector<std::uint8_t> arm_footprint(std::size_t agent, std::size_t frame_index) const;

  /// Pinhole forward projection used for rendering: world -> (u, v) and depth.
  struct Projection {
    double u = 0.0;
    double v = 0.0;
    double depth_mm = 0.0;
  };
  Projection project(const WorldPoint& p) const;
  /// Inverse of project for a pixel center at a given depth.
  WorldPoint unproject(double u, double v, double depth_mm) const;

  /// Product patch position for a cell at time t, or false when absent.
  bool product_at(CellIndex cell, std::int64_t t_ms, int& u0, int& v0) const;
  /// Tip pixel of the arm for a reach (the product center at reach start).
  void reach_tip(const ReachAction& reach, int& u, int& v) const;

 private:
  struct ProductState {
    bool present = true;
    int du = 0;
    int dv = 0;
  };
  struct AgentPose {
    bool present = false;
    double u = 0.0;
    double v = 0.0;
    double x_mm = 0.0;
    double y_mm = 0.0;
    int apex_depth = 0;
  };

  AgentPose pose(std::size_t agent, std::int64_t t_ms) const;
  std::vector<ProductState> products_at(std::int64_t t_ms) const;
  void render_into(std::vector<std::uint16_t>& depth, std::int64_t t_ms) const;
  void render_agent(std::vector<std::uint16_t>& depth, std::size_t agent,
                    std::int64_t t_ms) const;
  std::size_t cell_slot(CellIndex cell) const;
  void product_origin(CellIndex cell, int& u0, int& v0) const;
  const ReachAction* active_reach(std::size_t agent, std::int64_t t_ms) const;

  Scenario scenario_;
  std::vector<std::int16_t> noise_table_;
};

/// Renders every frame and collects the full ground truth.
SimulationResult simulate(const Scenario& scenario);

// Preset scenario generators used by the test suites and the CLI.

/// One shopper walks in, stands at the shelf, performs `reaches` scripted
/// reaches of random type, then leaves. Types cycle deterministically from seed.
Scenario make_reach_scenario(std::uint64_t seed, int reaches);

/// `people` shoppers cross the view one after another on non-overlapping paths.
Scenario make_entrance_scenario(std::uint64_t seed, int people);

/// Two shoppers walk towards each other on adjacent lanes and pass.
Scenario make_crossing_scenario(std::uint64_t seed, double height_a_mm, double height_b_mm);

}  // namespace shopper
