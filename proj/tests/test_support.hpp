#pragma once

// Shared generators and brute-force oracles for the test suites. Nothing in
// here calls into the incremental mask code or the table folding.

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "splatbudget/grid.hpp"

namespace splatbudget::testing {

struct PyramidSpec {
  std::size_t views = 1;
  std::size_t levels = 2;
  LevelDims coarse{1, 1};
};

inline PyramidSpec random_spec(std::mt19937_64& rng, std::size_t min_levels = 2,
                               std::size_t max_levels = 4, std::size_t max_views = 4,
                               std::size_t max_coarse = 8) {
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  return {pick(1, max_views), pick(min_levels, max_levels),
          {pick(1, max_coarse), pick(1, max_coarse)}};
}

/// Random pyramid. With `unique`, every score is distinct (redrawn on clash).
/// With `quantize` > 0 scores are drawn from {0, 1/q, ..., 1}, producing ties.
inline ScorePyramid random_pyramid(std::mt19937_64& rng, const PyramidSpec& spec,
                                   bool unique = true, int quantize = 0) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::set<double> seen;
  std::vector<std::vector<LevelGrid>> grids(spec.views);
  for (auto& view : grids) {
    for (std::size_t l = 1; l < spec.levels; ++l) {
      const std::size_t s = std::size_t{1} << (l - 1);
      LevelGrid g(spec.coarse.height * s, spec.coarse.width * s);
      for (double& v : g.values()) {
        do {
          v = quantize > 0 ? std::uniform_int_distribution<int>(0, quantize)(rng) /
                                 static_cast<double>(quantize)
                           : uni(rng);
        } while (unique && !seen.insert(v).second);
      }
      view.push_back(std::move(g));
    }
  }
  return ScorePyramid(spec.levels, std::move(grids));
}

/// Literal three-case mask recursion, with integer grids and explicit
/// Up(M^{l-k}; 2^k) sums over all coarser levels.
inline std::vector<Grid<int>> oracle_view_masks(const ScorePyramid& p, std::size_t view, double tau) {
  const std::size_t L = p.num_levels();
  std::vector<Grid<int>> masks;
  for (std::size_t l = 1; l <= L; ++l) {
    const LevelDims d = p.dims(l);
    Grid<int> covered(d.height, d.width, 0);
    for (std::size_t k = 1; k <= l - 1; ++k) {
      const Grid<int>& coarser = masks[l - k - 1];
      const std::size_t f = std::size_t{1} << k;
      for (std::size_t y = 0; y < d.height; ++y) {
        for (std::size_t x = 0; x < d.width; ++x) covered(y, x) += coarser(y / f, x / f);
      }
    }
    Grid<int> m(d.height, d.width, 0);
    for (std::size_t y = 0; y < d.height; ++y) {
      for (std::size_t x = 0; x < d.width; ++x) {
        if (l == 1) {
          m(y, x) = p.level(view, 1)(y, x) < tau ? 1 : 0;
        } else if (l < L) {
          m(y, x) = (p.level(view, l)(y, x) < tau ? 1 : 0) * (1 - covered(y, x));
        } else {
          m(y, x) = 1 - covered(y, x);
        }
      }
    }
    masks.push_back(std::move(m));
  }
  return masks;
}

inline std::int64_t oracle_count(const ScorePyramid& p, double tau) {
  std::int64_t total = 0;
  for (std::size_t v = 0; v < p.num_views(); ++v) {
    for (const auto& m : oracle_view_masks(p, v, tau)) {
      for (int x : m.values()) total += x;
    }
  }
  return total;
}

inline ScorePyramid single_view(std::size_t levels, std::vector<std::vector<double>> level_values,
                                LevelDims coarse) {
  std::vector<std::vector<LevelGrid>> grids(1);
  for (std::size_t l = 1; l < levels; ++l) {
    const std::size_t s = std::size_t{1} << (l - 1);
    grids[0].emplace_back(coarse.height * s, coarse.width * s, std::move(level_values[l - 1]));
  }
  return ScorePyramid(levels, std::move(grids));
}

}  // namespace splatbudget::testing
