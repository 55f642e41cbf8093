#include "shopper/pnm.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

#include "shopper/errors.hpp"

namespace shopper {
namespace {

struct PnmHeader {
  std::string magic;
  int width = 0;
  int height = 0;
  int maxval = 0;
};

void skip_whitespace_and_comments(std::istream& in) {
  while (true) {
    const int c = in.peek();
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (c != EOF && std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

int read_header_int(std::istream& in, const std::filesystem::path& path) {
  skip_whitespace_and_comments(in);
  int value = 0;
  if (!(in >> value) || value <= 0) {
    throw FormatError(path.string() + ": bad netpbm header");
  }
  return value;
}

PnmHeader read_header(std::istream& in, const std::filesystem::path& path) {
  PnmHeader header;
  char magic[2] = {};
  if (!in.read(magic, 2)) {
    throw FormatError(path.string() + ": truncated netpbm header");
  }
  header.magic.assign(magic, 2);
  header.width = read_header_int(in, path);
  header.height = read_header_int(in, path);
  header.maxval = read_header_int(in, path);
  if (header.maxval > 65535) {
    throw FormatError(path.string() + ": maxval exceeds 65535");
  }
  // Exactly one whitespace byte separates the header from the raster.
  if (!std::isspace(in.get())) {
    throw FormatError(path.string() + ": missing raster separator");
  }
  return header;
}

std::vector<unsigned char> read_raster(std::istream& in, std::size_t bytes,
                                       const std::filesystem::path& path) {
  std::vector<unsigned char> raw(bytes);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes))) {
    throw FormatError(path.string() + ": raster shorter than header declares");
  }
  return raw;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  return out;
}

}  // namespace

RgbImage RgbImage::filled(int width, int height, Rgb color) {
  if (width <= 0 || height <= 0) {
    throw ArgumentError("image dimensions must be positive");
  }
  RgbImage image;
  image.width = width;
  image.height = height;
  image.pixels.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < image.pixels.size(); i += 3) {
    image.pixels[i] = color.r;
    image.pixels[i + 1] = color.g;
    image.pixels[i + 2] = color.b;
  }
  return image;
}

Rgb RgbImage::at(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

void RgbImage::set(int x, int y, Rgb color) {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  pixels[i] = color.r;
  pixels[i + 1] = color.g;
  pixels[i + 2] = color.b;
}

void write_pgm16(const std::filesystem::path& path, int width, int height,
                 std::span<const std::uint16_t> samples) {
  if (samples.size() != static_cast<std::size_t>(width) * height) {
    throw ArgumentError("sample count does not match PGM dimensions");
  }
  std::vector<unsigned char> raw(samples.size() * 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    raw[2 * i] = static_cast<unsigned char>(samples[i] >> 8);
    raw[2 * i + 1] = static_cast<unsigned char>(samples[i] & 0xFF);
  }
  auto out = open_output(path);
  out << "P5\n" << width << ' ' << height << "\n65535\n";
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) {
    throw IoError("short write to " + path.string());
  }
}

Gray16Image read_pgm(const std::filesystem::path& path) {
  auto in = open_input(path);
  const PnmHeader header = read_header(in, path);
  if (header.magic != "P5") {
    throw FormatError(path.string() + ": expected binary PGM (P5)");
  }
  Gray16Image image;
  image.width = header.width;
  image.height = header.height;
  image.maxval = static_cast<std::uint16_t>(header.maxval);
  const std::size_t count = static_cast<std::size_t>(header.width) * header.height;
  image.samples.resize(count);
  if (header.maxval < 256) {
    const auto raw = read_raster(in, count, path);
    std::copy(raw.begin(), raw.end(), image.samples.begin());
  } else {
    const auto raw = read_raster(in, count * 2, path);
    for (std::size_t i = 0; i < count; ++i) {
      image.samples[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    }
  }
  return image;
}

void write_ppm(const std::filesystem::path& path, const RgbImage& image) {
  if (image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
    throw ArgumentError("pixel buffer does not match PPM dimensions");
  }
  auto out = open_output(path);
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) {
    throw IoError("short write to " + path.string());
  }
}

RgbImage read_pnm_rgb(const std::filesystem::path& path) {
  auto in = open_input(path);
  const PnmHeader header = read_header(in, path);
  if (header.maxval > 255) {
    throw FormatError(path.string() + ": only 8-bit images are supported as planograms");
  }
  RgbImage image;
  image.width = header.width;
  image.height = header.height;
  const std::size_t count = static_cast<std::size_t>(header.width) * header.height;
  if (header.magic == "P6") {
    auto raw = read_raster(in, count * 3, path);
    image.pixels.assign(raw.begin(), raw.end());
  } else if (header.magic == "P5") {
    const auto raw = read_raster(in, count, path);
    image.pixels.resize(count * 3);
    for (std::size_t i = 0; i < count; ++i) {
      image.pixels[3 * i] = image.pixels[3 * i + 1] = image.pixels[3 * i + 2] = raw[i];
    }
  } else {
    throw FormatError(path.string() + ": expected P5 or P6");
  }
  return image;
}

}  // namespace shopper
