#pragma once

/// Non-learned score generators used as allocation baselines: seeded uniform
/// noise and a per-level Sobel edge-magnitude pyramid.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "splatbudget/grid.hpp"

namespace splatbudget {

enum class StrategyKind { GradientScore, UniformRandom, SobelFrequency };

inline std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::GradientScore: return "gradient";
    case StrategyKind::UniformRandom: return "random";
    case StrategyKind::SobelFrequency: return "sobel";
  }
  return "unknown";
}

inline std::optional<StrategyKind> parse_strategy(std::string_view name) {
  if (name == "gradient") return StrategyKind::GradientScore;
  if (name == "random") return StrategyKind::UniformRandom;
  if (name == "sobel") return StrategyKind::SobelFrequency;
  return std::nullopt;
}

/// Uniform [0,1) scores with the same dims as `shape`. The 53-bit mantissa
/// mapping keeps the output identical across standard library vendors.
inline ScorePyramid uniform_random_pyramid(const ScorePyramid& shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<LevelGrid>> grids(shape.num_views());
  for (std::size_t v = 0; v < shape.num_views(); ++v) {
    for (std::size_t l = 1; l < shape.num_levels(); ++l) {
      const LevelDims d = shape.dims(l);
      LevelGrid grid(d.height, d.width);
      for (double& value : grid.values()) {
        value = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      }
      grids[v].push_back(std::move(grid));
    }
  }
  return ScorePyramid(shape.num_levels(), std::move(grids));
}

/// Area-average resize (box filter with fractional pixel coverage).
inline LevelGrid area_resize(const LevelGrid& image, std::size_t out_h, std::size_t out_w) {
  detail::require(out_h > 0 && out_w > 0, "resize target must be non-empty");
  if (out_h == image.height() && out_w == image.width()) return image;
  const double sy = static_cast<double>(image.height()) / static_cast<double>(out_h);
  const double sx = static_cast<double>(image.width()) / static_cast<double>(out_w);
  LevelGrid out(out_h, out_w);
  for (std::size_t r = 0; r < out_h; ++r) {
    const double y0 = static_cast<double>(r) * sy;
    const double y1 = y0 + sy;
    for (std::size_t c = 0; c < out_w; ++c) {
      const double x0 = static_cast<double>(c) * sx;
      const double x1 = x0 + sx;
      double acc = 0.0;
      double area = 0.0;
      const auto ylo = static_cast<std::size_t>(std::floor(y0));
      const auto yhi = std::min(image.height(), static_cast<std::size_t>(std::ceil(y1)));
      const auto xlo = static_cast<std::size_t>(std::floor(x0));
      const auto xhi = std::min(image.width(), static_cast<std::size_t>(std::ceil(x1)));
      for (std::size_t y = ylo; y < yhi; ++y) {
        const double wy = std::min(y1, y + 1.0) - std::max(y0, static_cast<double>(y));
        if (wy <= 0.0) continue;
        for (std::size_t x = xlo; x < xhi; ++x) {
          const double wx = std::min(x1, x + 1.0) - std::max(x0, static_cast<double>(x));
          if (wx <= 0.0) continue;
          acc += wy * wx * image(y, x);
          area += wy * wx;
        }
      }
      out(r, c) = acc / area;
    }
  }
  return out;
}

/// Sobel gradient magnitude sqrt(Gx^2 + Gy^2) with replicate borders.
inline LevelGrid sobel_magnitude(const LevelGrid& image) {
  const auto h = static_cast<std::ptrdiff_t>(image.height());
  const auto w = static_cast<std::ptrdiff_t>(image.width());
  auto at = [&](std::ptrdiff_t y, std::ptrdiff_t x) {
    y = std::clamp<std::ptrdiff_t>(y, 0, h - 1);
    x = std::clamp<std::ptrdiff_t>(x, 0, w - 1);
    return image(static_cast<std::size_t>(y), static_cast<std::size_t>(x));
  };
  LevelGrid out(image.height(), image.width());
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      const double gx = (at(y - 1, x + 1) + 2.0 * at(y, x + 1) + at(y + 1, x + 1)) -
                        (at(y - 1, x - 1) + 2.0 * at(y, x - 1) + at(y + 1, x - 1));
      const double gy = (at(y + 1, x - 1) + 2.0 * at(y + 1, x) + at(y + 1, x + 1)) -
                        (at(y - 1, x - 1) + 2.0 * at(y - 1, x) + at(y - 1, x + 1));
      out(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = std::hypot(gx, gy);
    }
  }
  return out;
}

/// Coarse (level-1) dims for an image whose finest level L matches the
/// image resolution: each dimension is halved L-1 times.
inline LevelDims coarse_dims_for_image(std::size_t image_h, std::size_t image_w,
                                       std::size_t num_levels) {
  detail::require(num_levels >= 2, "need at least two levels");
  const std::size_t shift = num_levels - 1;
  if (shift >= 63 || (image_h >> shift) == 0 || (image_w >> shift) == 0) {
    throw InvalidArgument("image " + std::to_string(image_h) + "x" + std::to_string(image_w) +
                          " is too small for " + std::to_string(num_levels) + " levels");
  }
  return {image_h >> shift, image_w >> shift};
}

/// Frequency heuristic: per level, resize the image to the level's dims,
/// take the Sobel magnitude and divide by that level's maximum (all zero if
/// the maximum is zero). The finest level L corresponds to the image
/// resolution (rounded down to a multiple of 2^(L-1)).
inline ScorePyramid sobel_frequency_pyramid(const LevelGrid& image, std::size_t num_levels) {
  const LevelDims coarse = coarse_dims_for_image(image.height(), image.width(), num_levels);
  std::vector<std::vector<LevelGrid>> grids(1);
  for (std::size_t l = 1; l < num_levels; ++l) {
    const std::size_t scale = std::size_t{1} << (l - 1);
    LevelGrid mag = sobel_magnitude(area_resize(image, coarse.height * scale, coarse.width * scale));
    const double peak = *std::max_element(mag.values().begin(), mag.values().end());
    for (double& v : mag.values()) v = peak > 0.0 ? v / peak : 0.0;
    grids[0].push_back(std::move(mag));
  }
  return ScorePyramid(num_levels, std::move(grids));
}

}  // namespace splatbudget
