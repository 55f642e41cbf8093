#pragma once

// Command implementations behind the `shopper` executable. Each returns a
// process exit code: 0 success, 2 usage or format error, 3 runtime I/O error.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace shopper {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

struct SimulateOptions {
  std::optional<std::filesystem::path> scenario_path;
  std::optional<std::string> preset;  // reach, entrance or crossing
  int count = 4;                       // reaches or people for presets
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> camera_id;
};

struct ProcessOptions {
  std::filesystem::path seq_dir;
  std::optional<std::filesystem::path> config_path;
  std::filesystem::path out_log;
  std::optional<std::string> camera_id;
};

struct ReportOptions {
  std::filesystem::path log_path;
  std::optional<std::filesystem::path> config_path;
  std::optional<std::int64_t> from_ms;
  std::optional<std::int64_t> to_ms;
  std::string bucket = "1h";
  std::string format = "text";
  std::optional<std::string> camera_id;
  std::optional<std::string> zone_id;
  std::optional<std::string> entrance_camera;
  std::optional<std::filesystem::path> purchases_path;
  std::optional<std::filesystem::path> out_path;
};

struct RenderMapOptions {
  std::filesystem::path log_path;
  std::filesystem::path planogram_path;
  std::optional<std::filesystem::path> config_path;
  std::filesystem::path out_image;
  std::optional<std::filesystem::path> sequence_dir;  // camera intrinsics source
  std::optional<std::string> camera_id;
};

int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err);
int cmd_process(const ProcessOptions& options, std::ostream& out, std::ostream& err);
int cmd_report(const ReportOptions& options, std::ostream& out, std::ostream& err);
int cmd_rendermap(const RenderMapOptions& options, std::ostream& out, std::ostream& err);
/// Prints the effective configuration.
int cmd_dump_config(const std::optional<std::filesystem::path>& config_path, std::ostream& out,
                    std::ostream& err);

/// Parses "500", "500ms", "30s", "15m", "1h" into milliseconds.
/// Throws ArgumentError on anything else or a non-positive value.
std::int64_t parse_duration_ms(const std::string& text);

/// Full command line: `shopper <command> [options]`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace shopper
