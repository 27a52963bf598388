#pragma once

/// Netpbm raster I/O. Reads P2/P5 grayscale and P3/P6 color (converted to
/// luminance with BT.601 weights); intensities are normalized to [0, 1] by
/// maxval. Writes binary P5.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>

#include "splatbudget/errors.hpp"
#include "splatbudget/grid.hpp"

namespace splatbudget {

namespace detail {

inline void skip_pnm_whitespace(std::istream& in) {
  while (true) {
    const int ch = in.peek();
    if (ch == '#') {
      std::string comment;
      std::getline(in, comment);
    } else if (ch != EOF && std::isspace(ch)) {
      in.get();
    } else {
      return;
    }
  }
}

inline std::uint32_t read_pnm_uint(std::istream& in) {
  skip_pnm_whitespace(in);
  std::uint64_t value = 0;
  bool any = false;
  while (std::isdigit(in.peek())) {
    value = value * 10 + static_cast<std::uint64_t>(in.get() - '0');
    any = true;
    if (value > 0xFFFFFFFFu) throw IoError("PNM header value out of range");
  }
  if (!any) throw IoError("malformed PNM header or sample");
  return static_cast<std::uint32_t>(value);
}

}  // namespace detail

inline LevelGrid read_pnm(std::istream& in) {
  char magic[2] = {0, 0};
  if (!in.read(magic, 2) || magic[0] != 'P') throw IoError("not a PNM file");
  const char kind = magic[1];
  if (kind != '2' && kind != '3' && kind != '5' && kind != '6') {
    throw IoError(std::string("unsupported PNM type P") + kind);
  }
  const std::uint32_t width = detail::read_pnm_uint(in);
  const std::uint32_t height = detail::read_pnm_uint(in);
  const std::uint32_t maxval = detail::read_pnm_uint(in);
  if (width == 0 || height == 0) throw IoError("PNM image has zero size");
  if (maxval == 0 || maxval > 65535) throw IoError("PNM maxval must be in 1..65535");

  const bool binary = kind == '5' || kind == '6';
  const std::size_t channels = (kind == '3' || kind == '6') ? 3 : 1;
  if (binary) {
    // Exactly one whitespace byte separates the header from the raster.
    if (!std::isspace(in.get())) throw IoError("malformed PNM header");
  }

  auto next_sample = [&]() -> double {
    std::uint32_t v = 0;
    if (!binary) {
      v = detail::read_pnm_uint(in);
    } else if (maxval < 256) {
      const int byte = in.get();
      if (byte == EOF) throw IoError("PNM raster is truncated");
      v = static_cast<std::uint32_t>(byte);
    } else {
      const int hi = in.get();
      const int lo = in.get();
      if (hi == EOF || lo == EOF) throw IoError("PNM raster is truncated");
      v = static_cast<std::uint32_t>(hi) << 8 | static_cast<std::uint32_t>(lo);
    }
    if (v > maxval) throw IoError("PNM sample exceeds maxval");
    return static_cast<double>(v) / static_cast<double>(maxval);
  };

  LevelGrid image(height, width);
  for (double& px : image.values()) {
    if (channels == 1) {
      px = next_sample();
    } else {
      const double r = next_sample();
      const double g = next_sample();
      const double b = next_sample();
      px = 0.299 * r + 0.587 * g + 0.114 * b;
    }
  }
  return image;
}

inline LevelGrid read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image " + path.string());
  return read_pnm(in);
}

/// Binary P5, maxval 255. Masks are written as 0/255.
inline void write_pgm(std::ostream& out, const MaskGrid& mask) {
  out << "P5\n" << mask.width() << ' ' << mask.height() << "\n255\n";
  for (std::uint8_t v : mask.values()) out.put(static_cast<char>(v != 0 ? 255 : 0));
}

/// Binary P5 of a [0, 1] raster, clamped and rounded to 8 bits.
inline void write_pgm(std::ostream& out, const LevelGrid& image) {
  out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  for (double v : image.values()) {
    out.put(static_cast<char>(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
  }
}

template <typename T>
void write_pgm(const std::filesystem::path& path, const Grid<T>& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_pgm(out, grid);
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace splatbudget
