#pragma once

/// Threshold-budget lookup table and budget matching.
///
/// Lowering tau past a score value refines exactly the cells whose region
/// becomes reachable at that value. The table folds every cell's +3 delta
/// onto the score at which it actually activates, sorts scores descending
/// and takes a prefix sum, so entry k holds the exact Gaussian count at
/// tau = thresholds[k]. A budget is then matched by binary search.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "splatbudget/alloc.hpp"
#include "splatbudget/grid.hpp"

namespace splatbudget {

/// Which parent score a child is compared against when folding deltas.
enum class FoldReference {
  /// Running minimum over the ancestor chain. Exact for any L.
  kEffectiveParent,
  /// The parent's own score, literally. Exact only for L <= 3: with a chain
  /// parent < child-of-child < child the grandchild delta stays on a score
  /// at which nothing has refined yet.
  kRawParent,
};

/// 4^(L-1) - 1: the most Gaussians a single score activation can add.
constexpr std::int64_t max_increment(std::size_t num_levels) {
  return (std::int64_t{1} << (2 * (num_levels - 1))) - 1;
}

struct ThresholdBudgetTable {
  std::vector<double> thresholds;    // descending
  std::vector<std::int64_t> counts;  // ascending, exact count at thresholds[k]
  std::int64_t base_count = 0;       // N_ctx * H^1 * W^1
  std::int64_t max_count = 0;        // N_ctx * H^L * W^L

  std::size_t size() const { return thresholds.size(); }

  /// L recovered from max/base = 4^(L-1).
  std::size_t num_levels() const {
    if (base_count <= 0 || max_count % base_count != 0) return 0;
    std::int64_t ratio = max_count / base_count;
    std::size_t levels = 1;
    while (ratio > 1 && ratio % 4 == 0) {
      ratio /= 4;
      ++levels;
    }
    return ratio == 1 ? levels : 0;
  }

  /// Throws InvalidArgument when the table is internally inconsistent.
  void validate() const {
    detail::require(thresholds.size() == counts.size(),
                    "threshold and count arrays differ in length");
    detail::require(!thresholds.empty(), "table is empty");
    detail::require(num_levels() >= 2, "max/base is not a power of four above one");
    for (std::size_t k = 0; k < size(); ++k) {
      detail::require(!std::isnan(thresholds[k]), "threshold is NaN");
      if (k > 0) {
        detail::require(thresholds[k] <= thresholds[k - 1], "thresholds must be descending");
        detail::require(counts[k] >= counts[k - 1], "counts must be ascending");
      }
    }
    detail::require(counts.front() >= base_count, "first count is below the base count");
    detail::require(counts.back() == max_count, "last count must equal the maximum count");
  }

  friend bool operator==(const ThresholdBudgetTable&, const ThresholdBudgetTable&) = default;
};

struct BudgetQuery {
  std::int64_t target = 0;
};

struct BudgetMatch {
  double tau = std::numeric_limits<double>::infinity();
  std::int64_t achieved = 0;
  std::int64_t slack = 0;  // target - achieved
};

namespace detail {

/// Per-cell activation deltas for one view after folding, level 1..L-1.
inline std::vector<Grid<std::int64_t>> fold_view_deltas(const ScorePyramid& pyramid,
                                                        std::size_t view, FoldReference reference) {
  const std::size_t score_levels = pyramid.num_levels() - 1;
  std::vector<Grid<std::int64_t>> deltas;
  deltas.reserve(score_levels);
  for (std::size_t l = 1; l <= score_levels; ++l) {
    const LevelDims d = pyramid.dims(l);
    deltas.emplace_back(d.height, d.width, std::int64_t{3});
  }

  // effective[l] = min(D^l, Up(effective[l-1])): the largest tau at which a
  // level-l cell's region has been handed down to level l + 1.
  std::vector<LevelGrid> effective{pyramid.level(view, 1)};
  for (std::size_t l = 2; l <= score_levels; ++l) {
    LevelGrid e = upsample_nn(effective.back(), 2);
    const LevelGrid& scores = pyramid.level(view, l);
    for (std::size_t i = 0; i < e.size(); ++i) {
      e.values()[i] = std::min(e.values()[i], scores.values()[i]);
    }
    effective.push_back(std::move(e));
  }

  for (std::size_t l = score_levels; l >= 2; --l) {
    const LevelGrid& parent = reference == FoldReference::kEffectiveParent
                                  ? effective[l - 2]
                                  : pyramid.level(view, l - 1);
    const LevelGrid up = upsample_nn(parent, 2);
    const LevelGrid& scores = pyramid.level(view, l);
    Grid<std::int64_t> moved(scores.height(), scores.width(), std::int64_t{0});
    auto& child = deltas[l - 1];
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores.values()[i] >= up.values()[i]) {
        moved.values()[i] = child.values()[i];
        child.values()[i] = 0;
      }
    }
    const Grid<std::int64_t> pooled = sum_pool_2x2(moved);
    auto& target = deltas[l - 2];
    for (std::size_t i = 0; i < pooled.size(); ++i) target.values()[i] += pooled.values()[i];
  }
  return deltas;
}

}  // namespace detail

/// Builds the lookup table. Rows follow (view, level, row, col) order before
/// a stable descending sort, so equal scores keep that order.
inline ThresholdBudgetTable build_table(const ScorePyramid& pyramid,
                                        FoldReference reference = FoldReference::kEffectiveParent) {
  const std::size_t k_total = pyramid.score_cells();
  std::vector<double> scores;
  std::vector<std::int64_t> deltas;
  scores.reserve(k_total);
  deltas.reserve(k_total);
  for (std::size_t v = 0; v < pyramid.num_views(); ++v) {
    const auto view_deltas = detail::fold_view_deltas(pyramid, v, reference);
    for (std::size_t l = 1; l < pyramid.num_levels(); ++l) {
      const auto s = pyramid.level(v, l).values();
      const auto d = view_deltas[l - 1].values();
      scores.insert(scores.end(), s.begin(), s.end());
      deltas.insert(deltas.end(), d.begin(), d.end());
    }
  }

  std::vector<std::size_t> order(k_total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  ThresholdBudgetTable table;
  table.base_count = pyramid.base_count();
  table.max_count = pyramid.max_count();
  table.thresholds.reserve(k_total);
  table.counts.reserve(k_total);
  std::int64_t running = table.base_count;
  for (std::size_t idx : order) {
    running += deltas[idx];
    table.thresholds.push_back(scores[idx]);
    table.counts.push_back(running);
  }
  return table;
}

/// Largest table row whose count fits the target. When that row sits inside
/// a run of equal thresholds the result backs off to the end of the previous
/// run, so `achieved` is always the true count at `tau`. Targets below the
/// first row return tau = +inf with achieved = base_count.
inline BudgetMatch match_budget(const ThresholdBudgetTable& table, BudgetQuery query) {
  if (query.target < table.base_count) {
    throw BudgetBelowMinimum("budget " + std::to_string(query.target) +
                             " is below the coarsest-level count " +
                             std::to_string(table.base_count));
  }
  if (query.target > table.max_count) {
    throw BudgetExceedsMaximum("budget " + std::to_string(query.target) +
                               " exceeds the finest-level count " +
                               std::to_string(table.max_count));
  }
  const auto& counts = table.counts;
  const auto& thresholds = table.thresholds;
  auto it = std::upper_bound(counts.begin(), counts.end(), query.target);
  std::ptrdiff_t k = (it - counts.begin()) - 1;

  if (k >= 0 && static_cast<std::size_t>(k) + 1 < thresholds.size() &&
      thresholds[static_cast<std::size_t>(k) + 1] == thresholds[static_cast<std::size_t>(k)]) {
    const double value = thresholds[static_cast<std::size_t>(k)];
    auto first = std::lower_bound(thresholds.begin(), thresholds.end(), value,
                                  [](double a, double b) { return a > b; });
    k = (first - thresholds.begin()) - 1;
  }

  BudgetMatch match;
  if (k < 0) {
    match.tau = std::numeric_limits<double>::infinity();
    match.achieved = table.base_count;
  } else {
    match.tau = thresholds[static_cast<std::size_t>(k)];
    match.achieved = counts[static_cast<std::size_t>(k)];
  }
  match.slack = query.target - match.achieved;
  return match;
}

/// Brute force: count_gaussians(compute_masks(p, d)) for +inf and every
/// distinct score d, descending. Independent of the folding logic.
inline std::vector<std::pair<double, std::int64_t>> oracle_counts(const ScorePyramid& pyramid) {
  std::vector<double> values;
  for (const auto& view : pyramid.grids()) {
    for (const auto& grid : view) values.insert(values.end(), grid.values().begin(), grid.values().end());
  }
  std::sort(values.begin(), values.end(), std::greater<>());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  values.insert(values.begin(), std::numeric_limits<double>::infinity());

  std::vector<std::pair<double, std::int64_t>> out;
  out.reserve(values.size());
  for (double tau : values) out.emplace_back(tau, count_gaussians(compute_masks(pyramid, tau)));
  return out;
}

}  // namespace splatbudget
