#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include "shopper/simulator.hpp"

namespace testing {

/// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("shopper_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// One agent standing still at floor position (x, y) for the whole scenario.
inline shopper::Scenario standing_scenario(double height_mm, double x_mm, double y_mm,
                                           std::int64_t duration_ms, double noise = 8.0,
                                           shopper::AgentShape shape = shopper::AgentShape::Person) {
  shopper::Scenario s;
  s.duration_ms = duration_ms;
  s.noise_stddev_mm = noise;
  shopper::ScriptedAgent a;
  a.shape = shape;
  a.body_height_mm = height_mm;
  a.waypoints = {{0, x_mm, y_mm}, {duration_ms, x_mm, y_mm}};
  s.persons.push_back(a);
  return s;
}

inline shopper::Scenario empty_scenario(std::int64_t duration_ms, double noise = 8.0) {
  shopper::Scenario s;
  s.duration_ms = duration_ms;
  s.noise_stddev_mm = noise;
  return s;
}

}  // namespace testing
