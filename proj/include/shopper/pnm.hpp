#pragma once

// Binary netpbm readers/writers: 16-bit big-endian PGM for depth, 8-bit PPM for maps.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace shopper {

struct Gray16Image {
  int width = 0;
  int height = 0;
  std::uint16_t maxval = 65535;
  std::vector<std::uint16_t> samples;
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Interleaved 8-bit RGB raster.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  static RgbImage filled(int width, int height, Rgb color);

  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb color);
  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// Writes "P5" with maxval 65535 and big-endian samples.
void write_pgm16(const std::filesystem::path& path, int width, int height,
                 std::span<const std::uint16_t> samples);

/// Reads "P5"; 8-bit files (maxval < 256) are widened.
Gray16Image read_pgm(const std::filesystem::path& path);

void write_ppm(const std::filesystem::path& path, const RgbImage& image);

/// Reads "P6" or 8-bit "P5" (replicated into three channels).
RgbImage read_pnm_rgb(const std::filesystem::path& path);

}  // namespace shopper
