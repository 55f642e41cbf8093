#include "shopper/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <functional>
#include <ostream>

#include "shopper/analytics.hpp"
#include "shopper/config.hpp"
#include "shopper/depth_io.hpp"
#include "shopper/errors.hpp"
#include "shopper/heatmap.hpp"
#include "shopper/pipeline.hpp"
#include "shopper/simulator.hpp"

namespace shopper {

namespace {

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

PipelineConfig config_or_default(const std::optional<std::filesystem::path>& path) {
  return path ? load_config(*path) : PipelineConfig{};
}

}  // namespace

std::int64_t parse_duration_ms(const std::string& text) {
  std::size_t pos = 0;
  long long value = 0;
  try {
    value = std::stoll(text, &pos);
  } catch (const std::exception&) {
    throw ArgumentError("invalid duration '" + text + "'");
  }
  const std::string unit = text.substr(pos);
  long long scale = 0;
  if (unit.empty() || unit == "ms") {
    scale = 1;
  } else if (unit == "s") {
    scale = 1000;
  } else if (unit == "m") {
    scale = 60'000;
  } else if (unit == "h") {
    scale = 3'600'000;
  } else {
    throw ArgumentError("invalid duration unit in '" + text + "' (use ms, s, m or h)");
  }
  if (value <= 0) throw ArgumentError("duration must be positive: '" + text + "'");
  return value * scale;
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (o.scenario_path.has_value() == o.preset.has_value()) {
      throw ArgumentError("give exactly one of a scenario file or --preset");
    }
    Scenario scenario;
    if (o.scenario_path) {
      scenario = load_scenario(*o.scenario_path);
      if (o.seed) scenario.seed = *o.seed;
    } else {
      const std::uint64_t seed = o.seed.value_or(1);
      if (*o.preset == "reach") {
        scenario = make_reach_scenario(seed, o.count);
      } else if (*o.preset == "entrance") {
        scenario = make_entrance_scenario(seed, o.count);
      } else if (*o.preset == "crossing") {
        scenario = make_crossing_scenario(seed, 1800.0, 1550.0);
      } else {
        throw ArgumentError("unknown preset '" + *o.preset + "' (reach, entrance, crossing)");
      }
    }
    if (o.camera_id) scenario.camera.camera_id = *o.camera_id;
    validate_scenario(scenario);

    std::filesystem::create_directories(o.out_dir);
    const SceneSimulator sim(scenario);
    SequenceWriter writer(o.out_dir, scenario.camera);
    GroundTruthLog truth = sim.event_truth();
    for (std::size_t i = 0; i < sim.frame_count(); ++i) {
      writer.write(sim.render(i));
      truth.frames.push_back(sim.frame_truth(i));
    }
    writer.finish();
    truth.write_jsonl(o.out_dir / "truth.jsonl", scenario.camera.camera_id);
    std::ofstream scenario_out(o.out_dir / "scenario.json", std::ios::trunc);
    scenario_out << scenario_to_json(scenario).dump(2) << '\n';
    if (!scenario_out) throw IoError("cannot write " + (o.out_dir / "scenario.json").string());
    out << "frames=" << sim.frame_count() << " interactions=" << truth.interactions.size()
        << " visits=" << truth.visits.size() << '\n';
    return kExitOk;
  });
}

int cmd_process(const ProcessOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const PipelineConfig config = config_or_default(o.config_path);
    FrameSource source = load_sequence(o.seq_dir);
    CameraConfig camera = config.camera.apply(source.camera());
    if (o.camera_id) camera.camera_id = *o.camera_id;
    EventStore store(o.out_log);
    Pipeline pipeline(config, camera, source.width(), source.height(), &store);
    const auto start = std::chrono::steady_clock::now();
    while (auto frame = source.next()) pipeline.process(*frame);
    pipeline.finish();
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const PipelineSummary& s = pipeline.summary();
    out << "camera=" << camera.camera_id << " frames=" << s.frames << " visitors=" << s.visitors
        << " positive=" << s.positive << " negative=" << s.negative << " neutral=" << s.neutral
        << '\n';
    err << "processed " << s.frames << " frames: " << s.fps() << " fps pipeline, "
        << (wall > 0.0 ? s.frames / wall : 0.0) << " fps including I/O\n";
    return kExitOk;
  });
}

int cmd_report(const ReportOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ReportFormat format = parse_report_format(o.format);
    const std::int64_t bucket = parse_duration_ms(o.bucket);
    const PipelineConfig config = config_or_default(o.config_path);
    const auto records = read_event_log(o.log_path);

    TimeWindow window;
    if (o.from_ms && o.to_ms) {
      window = {*o.from_ms, *o.to_ms};
    } else {
      // Default window: the span of the log.
      std::optional<std::int64_t> lo;
      std::optional<std::int64_t> hi;
      auto extend = [&](std::int64_t a, std::int64_t b) {
        lo = lo ? std::min(*lo, a) : a;
        hi = hi ? std::max(*hi, b) : b;
      };
      for (const auto& r : records) {
        if (const auto* v = std::get_if<VisitRecord>(&r.record)) {
          extend(v->entry_ms, v->exit_ms);
        } else {
          const auto& e = std::get<InteractionEvent>(r.record);
          extend(e.start_ms, e.end_ms);
        }
      }
      window.start_ms = o.from_ms.value_or(lo.value_or(0));
      window.end_ms = o.to_ms.value_or(hi ? *hi + 1 : window.start_ms);
    }

    IndicatorFilters filters;
    filters.camera_id = o.camera_id;
    filters.zone_id = o.zone_id;
    filters.entrance_camera = o.entrance_camera;
    filters.zone_min_dwell_ms = config.zone_min_dwell_ms;
    std::optional<PurchaseFeed> feed;
    if (o.purchases_path) feed = read_purchase_feed(*o.purchases_path);
    const IndicatorReport report = compute_indicators(records, window, bucket, filters,
                                                      make_catalog(config.zones),
                                                      feed ? &*feed : nullptr);
    const std::string text = format_report(report, format);
    if (o.out_path) {
      std::ofstream file(*o.out_path, std::ios::trunc);
      file << text;
      if (!file) throw IoError("cannot write " + o.out_path->string());
    } else {
      out << text;
    }
    return kExitOk;
  });
}

int cmd_rendermap(const RenderMapOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const PipelineConfig config = config_or_default(o.config_path);
    const ShelfZone* zone = find_zone(config, config.map.zone_id);
    if (zone == nullptr) {
      throw ArgumentError("map.zone_id '" + config.map.zone_id + "' names no configured zone");
    }
    CameraConfig camera;
    if (o.sequence_dir) camera = load_sequence(*o.sequence_dir).camera();
    camera = config.camera.apply(camera);

    Planogram planogram{read_pnm_rgb(o.planogram_path), config.map};
    std::vector<InteractionEvent> events;
    for (const auto& r : read_event_log(o.log_path)) {
      if (const auto* e = std::get_if<InteractionEvent>(&r.record)) {
        if (!o.camera_id || e->camera_id == *o.camera_id) events.push_back(*e);
      }
    }
    const RenderResult result = render_map(planogram, *zone, camera, events);
    write_ppm(o.out_image, result.image);
    out << "drawn: " << result.drawn << " skipped: " << result.skipped << '\n';
    return kExitOk;
  });
}

int cmd_dump_config(const std::optional<std::filesystem::path>& config_path, std::ostream& out,
                    std::ostream& err) {
  return guarded(err, [&] {
    out << dump_config(config_or_default(config_path));
    return kExitOk;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shopper activity analytics from top-view depth sequences"};
  app.require_subcommand(1);
  std::optional<std::filesystem::path> config_path;
  bool dump = false;

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Render a scenario into a depth sequence");
  simulate->add_option("scenario", sim.scenario_path, "Scenario JSON file");
  simulate->add_option("--preset", sim.preset, "Built-in scenario: reach, entrance, crossing");
  simulate->add_option("--count", sim.count, "Reaches or people for presets");
  simulate->add_option("-o,--out", sim.out_dir, "Output sequence directory")->required();
  simulate->add_option("--seed", sim.seed, "Random seed");
  simulate->add_option("--camera-id", sim.camera_id, "Camera id stored with the sequence");

  ProcessOptions proc;
  auto* process = app.add_subcommand("process", "Run the pipeline over a sequence");
  process->add_option("sequence", proc.seq_dir, "Sequence directory");
  process->add_option("--config", config_path, "Pipeline configuration file");
  process->add_option("-o,--out", proc.out_log, "Event log (JSON Lines, appended)");
  process->add_option("--camera-id", proc.camera_id, "Override the camera id");
  process->add_flag("--dump-config", dump, "Print the effective configuration and exit");

  ReportOptions rep;
  auto* report = app.add_subcommand("report", "Compute indicators from an event log");
  report->add_option("log", rep.log_path, "Event log")->required();
  report->add_option("--config", config_path, "Pipeline configuration file");
  report->add_option("--from", rep.from_ms, "Window start (ms)");
  report->add_option("--to", rep.to_ms, "Window end (ms, exclusive)");
  report->add_option("--bucket", rep.bucket, "Bucket size, e.g. 1h, 15m, 500ms");
  report->add_option("--format", rep.format, "text, json or csv");
  report->add_option("--camera", rep.camera_id, "Only this camera");
  report->add_option("--zone", rep.zone_id, "Only this zone");
  report->add_option("--entrance-camera", rep.entrance_camera, "Count visitors at this camera");
  report->add_option("--purchases", rep.purchases_path, "Purchase feed CSV");
  report->add_option("-o,--out", rep.out_path, "Write the report to a file");

  RenderMapOptions ren;
  auto* rendermap = app.add_subcommand("rendermap", "Draw interactions on a planogram");
  rendermap->add_option("log", ren.log_path, "Event log");
  rendermap->add_option("--planogram", ren.planogram_path, "Planogram PPM/PGM");
  rendermap->add_option("--config", config_path, "Pipeline configuration file");
  rendermap->add_option("-o,--out", ren.out_image, "Output PPM");
  rendermap->add_option("--sequence", ren.sequence_dir, "Take camera intrinsics from a sequence");
  rendermap->add_option("--camera", ren.camera_id, "Only events from this camera");
  rendermap->add_flag("--dump-config", dump, "Print the effective configuration and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  auto need = [&](bool ok, const char* what) {
    if (!ok) err << "error: " << what << " is required\n";
    return ok;
  };
  if (simulate->parsed()) return cmd_simulate(sim, out, err);
  if (dump) return cmd_dump_config(config_path, out, err);
  if (process->parsed()) {
    if (!need(!proc.seq_dir.empty(), "sequence") || !need(!proc.out_log.empty(), "--out")) {
      return kExitUsage;
    }
    proc.config_path = config_path;
    return cmd_process(proc, out, err);
  }
  if (report->parsed()) {
    rep.config_path = config_path;
    return cmd_report(rep, out, err);
  }
  if (!need(!ren.log_path.empty(), "log") || !need(!ren.planogram_path.empty(), "--planogram") ||
      !need(!ren.out_image.empty(), "--out")) {
    return kExitUsage;
  }
  ren.config_path = config_path;
  return cmd_rendermap(ren, out, err);
}

}  // namespace shopper
