#pragma once

/// Row-major 2D grids and the score pyramid they build.
///
/// Storage is row-major and every accessor takes (row, col). Levels use the
/// 1-based vocabulary of the allocation scheme in public signatures: level 1
/// is the coarsest, level L the finest, and each step doubles height and
/// width. Score maps exist only for levels 1..L-1.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "splatbudget/errors.hpp"

namespace splatbudget {

template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;

  Grid(std::size_t height, std::size_t width, T fill = T{})
      : height_(height), width_(width), values_(height * width, fill) {
    detail::require(height > 0 && width > 0, "grid dimensions must be positive");
  }

  Grid(std::size_t height, std::size_t width, std::vector<T> values)
      : height_(height), width_(width), values_(std::move(values)) {
    detail::require(height > 0 && width > 0, "grid dimensions must be positive");
    detail::require(values_.size() == height * width,
                    "grid value count " + std::to_string(values_.size()) +
                        " does not match " + std::to_string(height) + "x" +
                        std::to_string(width));
    if constexpr (std::is_floating_point_v<T>) {
      for (T v : values_) detail::require(std::isfinite(v), "grid values must be finite");
    }
  }

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  T& operator()(std::size_t row, std::size_t col) { return values_[row * width_ + col]; }
  const T& operator()(std::size_t row, std::size_t col) const {
    return values_[row * width_ + col];
  }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  bool same_shape(const Grid& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<T> values_;
};

/// One score map (or any real-valued raster).
using LevelGrid = Grid<double>;
/// Binary allocation mask, values in {0, 1}.
using MaskGrid = Grid<std::uint8_t>;

/// Sum of all cells, accumulated in a wide type.
template <typename T>
auto grid_sum(const Grid<T>& grid) {
  using Acc = std::conditional_t<std::is_floating_point_v<T>, double, std::int64_t>;
  return std::accumulate(grid.values().begin(), grid.values().end(), Acc{0},
                         [](Acc a, T v) { return a + static_cast<Acc>(v); });
}

constexpr bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Nearest-neighbour upsampling: out(y, x) = in(y / factor, x / factor).
template <typename T>
Grid<T> upsample_nn(const Grid<T>& grid, std::size_t factor) {
  if (!is_power_of_two(factor)) {
    throw InvalidArgument("upsampling factor must be a power of two, got " +
                          std::to_string(factor));
  }
  if (factor == 1) return grid;
  Grid<T> out(grid.height() * factor, grid.width() * factor);
  for (std::size_t y = 0; y < out.height(); ++y) {
    for (std::size_t x = 0; x < out.width(); ++x) {
      out(y, x) = grid(y / factor, x / factor);
    }
  }
  return out;
}

/// Sums each 2x2 block into one cell. Requires even dimensions.
template <typename T>
Grid<T> sum_pool_2x2(const Grid<T>& grid) {
  if (grid.height() % 2 != 0 || grid.width() % 2 != 0) {
    throw InvalidArgument("sum_pool_2x2 needs even dimensions, got " +
                          std::to_string(grid.height()) + "x" + std::to_string(grid.width()));
  }
  Grid<T> out(grid.height() / 2, grid.width() / 2);
  for (std::size_t r = 0; r < out.height(); ++r) {
    for (std::size_t c = 0; c < out.width(); ++c) {
      out(r, c) = static_cast<T>(grid(2 * r, 2 * c) + grid(2 * r, 2 * c + 1) +
                                 grid(2 * r + 1, 2 * c) + grid(2 * r + 1, 2 * c + 1));
    }
  }
  return out;
}

struct LevelDims {
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t cells() const { return height * width; }
  friend bool operator==(const LevelDims&, const LevelDims&) = default;
};

/// Per-view, per-level densification score maps for levels 1..L-1.
class ScorePyramid {
 public:
  ScorePyramid() = default;

  /// grids[view][level - 1]. Validates the doubling and shared-dims invariants.
  ScorePyramid(std::size_t num_levels, std::vector<std::vector<LevelGrid>> grids)
      : num_levels_(num_levels), grids_(std::move(grids)) {
    detail::require(num_levels_ >= 2, "a pyramid needs at least two levels");
    detail::require(!grids_.empty(), "a pyramid needs at least one view");
    for (const auto& view : grids_) {
      detail::require(view.size() == num_levels_ - 1,
                      "each view must hold exactly L-1 score levels");
      for (std::size_t l = 0; l < view.size(); ++l) {
        detail::require(!view[l].empty(), "score level is empty");
        detail::require(view[l].same_shape(grids_.front()[l]),
                        "all views must share per-level dimensions");
        if (l > 0) {
          detail::require(view[l].height() == 2 * view[l - 1].height() &&
                              view[l].width() == 2 * view[l - 1].width(),
                          "each score level must double the previous level's resolution");
        }
      }
    }
  }

  /// Pyramid filled with a constant, coarse level of the given size.
  static ScorePyramid filled(std::size_t num_views, std::size_t num_levels,
                             LevelDims coarse, double value = 0.0) {
    detail::require(num_views > 0, "a pyramid needs at least one view");
    detail::require(num_levels >= 2, "a pyramid needs at least two levels");
    std::vector<std::vector<LevelGrid>> grids(num_views);
    for (auto& view : grids) {
      for (std::size_t l = 1; l < num_levels; ++l) {
        const std::size_t scale = std::size_t{1} << (l - 1);
        view.emplace_back(coarse.height * scale, coarse.width * scale, value);
      }
    }
    return ScorePyramid(num_levels, std::move(grids));
  }

  std::size_t num_views() const { return grids_.size(); }
  std::size_t num_levels() const { return num_levels_; }

  /// Dimensions of level l in 1..L (level L has no score map but has dims).
  LevelDims dims(std::size_t level) const {
    detail::require(level >= 1 && level <= num_levels_, "level out of range");
    const auto& coarse = grids_.front().front();
    const std::size_t scale = std::size_t{1} << (level - 1);
    return {coarse.height() * scale, coarse.width() * scale};
  }

  /// Score map of a view at level l in 1..L-1.
  const LevelGrid& level(std::size_t view, std::size_t level) const {
    detail::require(view < grids_.size(), "view out of range");
    detail::require(level >= 1 && level < num_levels_, "score level out of range");
    return grids_[view][level - 1];
  }

  const std::vector<std::vector<LevelGrid>>& grids() const { return grids_; }

  /// Number of score cells over all views and levels (table length K).
  std::size_t score_cells() const {
    std::size_t total = 0;
    for (std::size_t l = 1; l < num_levels_; ++l) total += dims(l).cells();
    return total * num_views();
  }

  /// N_ctx * H^1 * W^1.
  std::int64_t base_count() const {
    return static_cast<std::int64_t>(num_views() * dims(1).cells());
  }
  /// N_ctx * H^L * W^L.
  std::int64_t max_count() const {
    return static_cast<std::int64_t>(num_views() * dims(num_levels_).cells());
  }

  friend bool operator==(const ScorePyramid&, const ScorePyramid&) = default;

 private:
  std::size_t num_levels_ = 0;
  std::vector<std::vector<LevelGrid>> grids_;
};

}  // namespace splatbudget
