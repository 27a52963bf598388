#pragma once

/// Exclusive multi-level allocation masks.
///
/// For a threshold tau, a level-1 cell is kept when its score is < tau;
/// otherwise its region is handed to level 2, and so on. Level L takes
/// whatever no coarser level claimed. Every finest-level location ends up
/// covered by exactly one allocated cell.

#include <cmath>
#include <cstdint>
#include <vector>

#include "splatbudget/grid.hpp"

namespace splatbudget {

class AllocationMaskSet {
 public:
  AllocationMaskSet() = default;

  /// masks[view][level - 1] for levels 1..L.
  AllocationMaskSet(std::size_t num_levels, std::vector<std::vector<MaskGrid>> masks)
      : num_levels_(num_levels), masks_(std::move(masks)) {
    detail::require(num_levels_ >= 2, "mask set needs at least two levels");
    detail::require(!masks_.empty(), "mask set needs at least one view");
    for (const auto& view : masks_) {
      detail::require(view.size() == num_levels_, "each view must hold L masks");
      for (std::size_t l = 0; l < view.size(); ++l) {
        detail::require(view[l].same_shape(masks_.front()[l]), "views must share mask dims");
        if (l > 0) {
          detail::require(view[l].height() == 2 * view[l - 1].height() &&
                              view[l].width() == 2 * view[l - 1].width(),
                          "mask levels must double in resolution");
        }
      }
    }
  }

  std::size_t num_views() const { return masks_.size(); }
  std::size_t num_levels() const { return num_levels_; }

  /// Mask of a view at level l in 1..L.
  const MaskGrid& mask(std::size_t view, std::size_t level) const {
    detail::require(view < masks_.size(), "view out of range");
    detail::require(level >= 1 && level <= num_levels_, "level out of range");
    return masks_[view][level - 1];
  }

  const std::vector<std::vector<MaskGrid>>& masks() const { return masks_; }

  friend bool operator==(const AllocationMaskSet&, const AllocationMaskSet&) = default;

 private:
  std::size_t num_levels_ = 0;
  std::vector<std::vector<MaskGrid>> masks_;
};

struct GaussianPlacement {
  std::size_t view = 0;
  std::size_t level = 0;  // 1-based
  std::size_t row = 0;
  std::size_t col = 0;

  friend bool operator==(const GaussianPlacement&, const GaussianPlacement&) = default;
};

/// Masks for one view. `covered` tracks the finest-so-far union of coarser
/// allocations, i.e. sum_k Up(M^{l-k}; 2^k) evaluated incrementally.
inline std::vector<MaskGrid> compute_view_masks(const ScorePyramid& pyramid, std::size_t view,
                                                double tau) {
  const std::size_t num_levels = pyramid.num_levels();
  std::vector<MaskGrid> masks;
  masks.reserve(num_levels);

  const LevelDims coarse = pyramid.dims(1);
  MaskGrid level1(coarse.height, coarse.width);
  const LevelGrid& scores1 = pyramid.level(view, 1);
  for (std::size_t i = 0; i < level1.size(); ++i) {
    level1.values()[i] = scores1.values()[i] < tau ? 1 : 0;
  }
  MaskGrid covered = level1;
  masks.push_back(std::move(level1));

  for (std::size_t l = 2; l <= num_levels; ++l) {
    covered = upsample_nn(covered, 2);
    MaskGrid mask(covered.height(), covered.width());
    const bool finest = l == num_levels;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      const bool free = covered.values()[i] == 0;
      const bool keep = finest || pyramid.level(view, l).values()[i] < tau;
      mask.values()[i] = free && keep ? 1 : 0;
      covered.values()[i] = static_cast<std::uint8_t>(covered.values()[i] | mask.values()[i]);
    }
    masks.push_back(std::move(mask));
  }
  return masks;
}

/// Allocation masks for every view. tau may be +inf (everything coarse) or
/// -inf (everything finest); NaN is rejected.
inline AllocationMaskSet compute_masks(const ScorePyramid& pyramid, double tau) {
  if (std::isnan(tau)) throw InvalidArgument("threshold must not be NaN");
  std::vector<std::vector<MaskGrid>> masks;
  masks.reserve(pyramid.num_views());
  for (std::size_t v = 0; v < pyramid.num_views(); ++v) {
    masks.push_back(compute_view_masks(pyramid, v, tau));
  }
  return AllocationMaskSet(pyramid.num_levels(), std::move(masks));
}

/// Gaussians allocated at one level, summed over views.
inline std::int64_t count_at_level(const AllocationMaskSet& masks, std::size_t level) {
  std::int64_t total = 0;
  for (std::size_t v = 0; v < masks.num_views(); ++v) total += grid_sum(masks.mask(v, level));
  return total;
}

inline std::vector<std::int64_t> counts_per_level(const AllocationMaskSet& masks) {
  std::vector<std::int64_t> counts;
  for (std::size_t l = 1; l <= masks.num_levels(); ++l) counts.push_back(count_at_level(masks, l));
  return counts;
}

/// Sum over views and levels of the mask 1-norms.
inline std::int64_t count_gaussians(const AllocationMaskSet& masks) {
  std::int64_t total = 0;
  for (std::size_t l = 1; l <= masks.num_levels(); ++l) total += count_at_level(masks, l);
  return total;
}

/// Every allocated cell, ordered by (view, level, row, col).
inline std::vector<GaussianPlacement> enumerate_placements(const AllocationMaskSet& masks) {
  std::vector<GaussianPlacement> out;
  for (std::size_t v = 0; v < masks.num_views(); ++v) {
    for (std::size_t l = 1; l <= masks.num_levels(); ++l) {
      const MaskGrid& m = masks.mask(v, l);
      for (std::size_t r = 0; r < m.height(); ++r) {
        for (std::size_t c = 0; c < m.width(); ++c) {
          if (m(r, c) != 0) out.push_back({v, l, r, c});
        }
      }
    }
  }
  return out;
}

}  // namespace splatbudget
