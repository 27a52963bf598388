#pragma once

/// Desk-scale 2D Gaussian image fitting.
///
/// Isotropic Gaussians are summed additively and compared to a target image
/// with a per-pixel mean squared error. The per-pixel loss gradients with
/// respect to each Gaussian's center are accumulated in absolute value
/// (homodirectional gradient), log-scaled into densification targets, and
/// baked back onto level grids so the allocation and budget code can consume
/// them. Pixel (r, c) has its center at (x, y) = (c + 0.5, r + 0.5).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "splatbudget/alloc.hpp"
#include "splatbudget/budget.hpp"
#include "splatbudget/grid.hpp"
#include "splatbudget/heuristics.hpp"

namespace splatbudget {

struct Gaussian2D {
  double mu_x = 0.0;
  double mu_y = 0.0;
  double sigma = 1.0;
  double amplitude = 0.0;
};

struct HomodirGradient {
  double gx_abs_sum = 0.0;
  double gy_abs_sum = 0.0;
  std::size_t pixels_touched = 0;

  double norm() const { return std::hypot(gx_abs_sum, gy_abs_sum); }
};

struct DensificationTarget {
  double value = 0.0;
};

struct FitConfig {
  int iterations = 150;
  /// Step size of the diagonally preconditioned descent; 1.0 is a full
  /// Gauss-Newton step per parameter.
  double learning_rate = 0.2;
  /// Gaussians are evaluated only within cutoff * sigma of their center.
  double support_cutoff = 4.0;
  std::uint64_t seed = 0;
};

/// Relative size of an isotropic Gaussian with respect to its grid cell.
inline constexpr double kSigmaPerCell = 0.6;

namespace detail {

/// Pixel index window [lo, hi) covering a Gaussian's support along one axis.
inline std::pair<std::size_t, std::size_t> support_range(double center, double radius,
                                                         std::size_t extent) {
  const double lo = std::ceil(center - radius - 0.5);
  const double hi = std::floor(center + radius - 0.5) + 1.0;
  const double clamped_lo = std::clamp(lo, 0.0, static_cast<double>(extent));
  const double clamped_hi = std::clamp(hi, 0.0, static_cast<double>(extent));
  return {static_cast<std::size_t>(clamped_lo),
          std::max(static_cast<std::size_t>(clamped_lo), static_cast<std::size_t>(clamped_hi))};
}

/// Calls fn(row, col, dx, dy, weight) for every pixel inside g's support,
/// where (dx, dy) = pixel center - mu and weight = exp(-r^2 / (2 sigma^2)).
template <typename Fn>
void for_each_support_pixel(const Gaussian2D& g, std::size_t height, std::size_t width,
                            double cutoff, Fn&& fn) {
  const double radius = cutoff * g.sigma;
  const double radius_sq = radius * radius;
  const double inv_two_var = 1.0 / (2.0 * g.sigma * g.sigma);
  const auto [r0, r1] = support_range(g.mu_y, radius, height);
  const auto [c0, c1] = support_range(g.mu_x, radius, width);
  for (std::size_t r = r0; r < r1; ++r) {
    const double dy = static_cast<double>(r) + 0.5 - g.mu_y;
    for (std::size_t c = c0; c < c1; ++c) {
      const double dx = static_cast<double>(c) + 0.5 - g.mu_x;
      const double d2 = dx * dx + dy * dy;
      if (d2 > radius_sq) continue;
      fn(r, c, dx, dy, std::exp(-d2 * inv_two_var));
    }
  }
}

inline void check_gaussian(const Gaussian2D& g) {
  require(g.sigma > 0.0 && std::isfinite(g.sigma), "Gaussian sigma must be positive");
  require(std::isfinite(g.mu_x) && std::isfinite(g.mu_y), "Gaussian center must be finite");
}

}  // namespace detail

/// I(x, y) = sum_g a_g exp(-|p - mu_g|^2 / (2 sigma_g^2)), truncated outside
/// cutoff * sigma_g.
inline LevelGrid render(std::span<const Gaussian2D> gaussians, std::size_t height,
                        std::size_t width, double cutoff = FitConfig{}.support_cutoff) {
  LevelGrid image(height, width, 0.0);
  for (const Gaussian2D& g : gaussians) {
    detail::check_gaussian(g);
    detail::for_each_support_pixel(g, height, width, cutoff,
                                   [&](std::size_t r, std::size_t c, double, double, double w) {
                                     image(r, c) += g.amplitude * w;
                                   });
  }
  return image;
}

inline double mean_squared_error(const LevelGrid& a, const LevelGrid& b) {
  detail::require(a.same_shape(b), "images differ in size");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.values()[i] - b.values()[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

/// Per Gaussian: sum over its support pixels j of |dL_j/dmu_x| and
/// |dL_j/dmu_y|, with L_j = (I_j - T_j)^2 / P the pixel's share of the MSE.
inline std::vector<HomodirGradient> homodir_gradients(std::span<const Gaussian2D> gaussians,
                                                      const LevelGrid& target,
                                                      double cutoff = FitConfig{}.support_cutoff) {
  const LevelGrid image = render(gaussians, target.height(), target.width(), cutoff);
  const double scale = 2.0 / static_cast<double>(target.size());
  std::vector<HomodirGradient> out;
  out.reserve(gaussians.size());
  for (const Gaussian2D& g : gaussians) {
    HomodirGradient acc;
    const double inv_var = 1.0 / (g.sigma * g.sigma);
    detail::for_each_support_pixel(
        g, target.height(), target.width(), cutoff,
        [&](std::size_t r, std::size_t c, double dx, double dy, double w) {
          const double common = scale * (image(r, c) - target(r, c)) * g.amplitude * w * inv_var;
          acc.gx_abs_sum += std::abs(common * dx);
          acc.gy_abs_sum += std::abs(common * dy);
          ++acc.pixels_touched;
        });
    out.push_back(acc);
  }
  return out;
}

/// d_g = ln(1 + 1e4 * ||v_g||_2).
inline DensificationTarget densification_target(const HomodirGradient& gradient) {
  return {std::log1p(1.0e4 * gradient.norm())};
}

inline std::vector<DensificationTarget> densification_targets(
    std::span<const HomodirGradient> gradients) {
  std::vector<DensificationTarget> out;
  out.reserve(gradients.size());
  for (const auto& g : gradients) out.push_back(densification_target(g));
  return out;
}

/// Mean absolute error between predicted scores and targets.
inline double score_loss(std::span<const double> predicted,
                         std::span<const DensificationTarget> targets) {
  detail::require(predicted.size() == targets.size(), "prediction and target counts differ");
  detail::require(!predicted.empty(), "score loss needs at least one Gaussian");
  double acc = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) acc += std::abs(predicted[i] - targets[i].value);
  return acc / static_cast<double>(predicted.size());
}

/// Writes d_g of the Gaussian initialized at cell (r, c) into grid(r, c).
/// Targets must be in row-major cell order, one per cell.
inline LevelGrid bake_score_map(LevelDims layout, std::span<const DensificationTarget> targets) {
  if (targets.size() != layout.cells()) {
    throw InvalidArgument("expected one target per cell (" + std::to_string(layout.cells()) +
                          "), got " + std::to_string(targets.size()));
  }
  LevelGrid grid(layout.height, layout.width);
  for (std::size_t i = 0; i < targets.size(); ++i) grid.values()[i] = targets[i].value;
  return grid;
}

/// Gaussian sitting at the center of cell (row, col) of a grid with the
/// given cell size, amplitude chosen so a lattice of such Gaussians roughly
/// reproduces `level`.
inline Gaussian2D cell_gaussian(std::size_t row, std::size_t col, double cell, double level) {
  Gaussian2D g;
  g.mu_x = (static_cast<double>(col) + 0.5) * cell;
  g.mu_y = (static_cast<double>(row) + 0.5) * cell;
  g.sigma = kSigmaPerCell * cell;
  g.amplitude = level * cell * cell / (2.0 * std::numbers::pi * g.sigma * g.sigma);
  return g;
}

inline double cell_mean(const LevelGrid& image, std::size_t row, std::size_t col,
                        std::size_t cell) {
  double acc = 0.0;
  for (std::size_t r = row * cell; r < (row + 1) * cell; ++r) {
    for (std::size_t c = col * cell; c < (col + 1) * cell; ++c) acc += image(r, c);
  }
  return acc / static_cast<double>(cell * cell);
}

/// One Gaussian per cell of a grid whose cells are `cell` pixels wide,
/// row-major.
inline std::vector<Gaussian2D> grid_gaussians(const LevelGrid& target, std::size_t cell) {
  detail::require(cell > 0 && target.height() % cell == 0 && target.width() % cell == 0,
                  "image dims must be a multiple of the cell size");
  std::vector<Gaussian2D> out;
  for (std::size_t r = 0; r < target.height() / cell; ++r) {
    for (std::size_t c = 0; c < target.width() / cell; ++c) {
      out.push_back(cell_gaussian(r, c, static_cast<double>(cell), cell_mean(target, r, c, cell)));
    }
  }
  return out;
}

struct FitResult {
  std::vector<Gaussian2D> gaussians;
  std::vector<double> mse_history;  // before each step, then the final value

  double final_mse() const { return mse_history.back(); }
};

/// Descent on centers and amplitudes. Each parameter's gradient is divided by
/// its Gauss-Newton diagonal (sum of squared per-pixel Jacobian entries), then
/// scaled by the fixed learning rate. Center steps are clamped to half a
/// sigma. No momentum.
inline FitResult fit_gaussians(std::vector<Gaussian2D> gaussians, const LevelGrid& target,
                               const FitConfig& config) {
  detail::require(config.iterations >= 0, "iteration count must be non-negative");
  detail::require(config.learning_rate > 0.0, "learning rate must be positive");
  detail::require(config.support_cutoff > 0.0, "support cutoff must be positive");
  const std::size_t h = target.height();
  const std::size_t w = target.width();
  const double cutoff = config.support_cutoff;
  constexpr double kTiny = 1e-30;

  FitResult result;
  result.mse_history.reserve(static_cast<std::size_t>(config.iterations) + 1);
  LevelGrid residual(h, w);
  auto update_residual = [&] {
    const LevelGrid image = render(gaussians, h, w, cutoff);
    double acc = 0.0;
    for (std::size_t i = 0; i < residual.size(); ++i) {
      residual.values()[i] = image.values()[i] - target.values()[i];
      acc += residual.values()[i] * residual.values()[i];
    }
    result.mse_history.push_back(acc / static_cast<double>(residual.size()));
  };

  update_residual();
  for (int it = 0; it < config.iterations; ++it) {
    std::vector<Gaussian2D> next = gaussians;
    for (std::size_t k = 0; k < gaussians.size(); ++k) {
      const Gaussian2D& g = gaussians[k];
      const double inv_var = 1.0 / (g.sigma * g.sigma);
      double grad_a = 0.0, grad_x = 0.0, grad_y = 0.0;
      double hess_a = 0.0, hess_x = 0.0, hess_y = 0.0;
      detail::for_each_support_pixel(
          g, h, w, cutoff, [&](std::size_t r, std::size_t c, double dx, double dy, double wgt) {
            const double res = residual(r, c);
            const double jx = g.amplitude * wgt * dx * inv_var;
            const double jy = g.amplitude * wgt * dy * inv_var;
            grad_a += res * wgt;
            grad_x += res * jx;
            grad_y += res * jy;
            hess_a += wgt * wgt;
            hess_x += jx * jx;
            hess_y += jy * jy;
          });
      // The common 2/P factor cancels between gradient and Gauss-Newton diagonal.
      const double max_shift = 0.5 * g.sigma;
      next[k].amplitude -= config.learning_rate * grad_a / (hess_a + kTiny);
      next[k].mu_x -= std::clamp(config.learning_rate * grad_x / (hess_x + kTiny), -max_shift, max_shift);
      next[k].mu_y -= std::clamp(config.learning_rate * grad_y / (hess_y + kTiny), -max_shift, max_shift);
    }
    gaussians = std::move(next);
    update_residual();
  }
  result.gaussians = std::move(gaussians);
  return result;
}

/// Per-level densification score maps derived by fitting each level's grid
/// of Gaussians independently and scoring them by their homodirectional
/// gradients. The finest level L matches the image resolution.
inline ScorePyramid gradient_score_pyramid(const LevelGrid& target, std::size_t num_levels,
                                           const FitConfig& config) {
  const LevelDims coarse = coarse_dims_for_image(target.height(), target.width(), num_levels);
  detail::require(coarse.height << (num_levels - 1) == target.height() &&
                      coarse.width << (num_levels - 1) == target.width(),
                  "image dims must be divisible by 2^(L-1)");
  std::vector<std::vector<LevelGrid>> grids(1);
  for (std::size_t l = 1; l < num_levels; ++l) {
    const std::size_t cell = std::size_t{1} << (num_levels - l);
    const FitResult fit = fit_gaussians(grid_gaussians(target, cell), target, config);
    const auto gradients = homodir_gradients(fit.gaussians, target, config.support_cutoff);
    const auto targets = densification_targets(gradients);
    grids[0].push_back(bake_score_map({target.height() / cell, target.width() / cell}, targets));
  }
  return ScorePyramid(num_levels, std::move(grids));
}

struct ExperimentReport {
  StrategyKind strategy = StrategyKind::GradientScore;
  double budget_fraction = 0.0;
  std::uint64_t seed = 0;
  std::int64_t budget = 0;
  std::int64_t achieved_count = 0;
  double tau = 0.0;
  double final_mse = 0.0;
  std::vector<std::int64_t> per_level_counts;
  AllocationMaskSet masks;
};

/// Target budget for a fraction of the finest-level count, rounded down.
inline std::int64_t budget_from_fraction(double fraction, std::int64_t max_count) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw InvalidArgument("budget fraction must lie in (0, 1]");
  }
  return static_cast<std::int64_t>(std::floor(fraction * static_cast<double>(max_count)));
}

/// Fit, score, allocate under a budget, refit, report the final MSE.
inline ExperimentReport run_strategy_experiment(const LevelGrid& target, double budget_fraction,
                                                StrategyKind strategy, const FitConfig& config,
                                                std::size_t num_levels = 3) {
  ScorePyramid scores;
  switch (strategy) {
    case StrategyKind::GradientScore:
      scores = gradient_score_pyramid(target, num_levels, config);
      break;
    case StrategyKind::UniformRandom: {
      const LevelDims coarse = coarse_dims_for_image(target.height(), target.width(), num_levels);
      scores = uniform_random_pyramid(ScorePyramid::filled(1, num_levels, coarse), config.seed);
      break;
    }
    case StrategyKind::SobelFrequency:
      scores = sobel_frequency_pyramid(target, num_levels);
      break;
  }
  detail::require(scores.max_count() == static_cast<std::int64_t>(target.size()),
                  "image dims must be divisible by 2^(L-1)");

  ExperimentReport report;
  report.strategy = strategy;
  report.budget_fraction = budget_fraction;
  report.seed = config.seed;
  report.budget = budget_from_fraction(budget_fraction, scores.max_count());

  const ThresholdBudgetTable table = build_table(scores);
  const BudgetMatch match = match_budget(table, {report.budget});
  report.tau = match.tau;
  report.masks = compute_masks(scores, match.tau);
  report.achieved_count = count_gaussians(report.masks);
  report.per_level_counts = counts_per_level(report.masks);

  std::vector<Gaussian2D> gaussians;
  for (const GaussianPlacement& p : enumerate_placements(report.masks)) {
    const std::size_t cell = std::size_t{1} << (num_levels - p.level);
    gaussians.push_back(cell_gaussian(p.row, p.col, static_cast<double>(cell),
                                      cell_mean(target, p.row, p.col, cell)));
  }
  report.final_mse = fit_gaussians(std::move(gaussians), target, config).final_mse();
  return report;
}

/// Synthetic test scene: smooth shaded background, a sharp-edged flat disk
/// and a rectangular patch of fine pixel-scale texture. Values in [0, 1].
inline LevelGrid textured_scene(std::size_t height, std::size_t width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };
  const double h = static_cast<double>(height);
  const double w = static_cast<double>(width);

  const double base = uniform(0.2, 0.4);
  const double tilt_x = uniform(-0.15, 0.15);
  const double tilt_y = uniform(-0.15, 0.15);

  const double disk_r = uniform(0.12, 0.2) * std::min(h, w);
  const double disk_x = uniform(disk_r, w - disk_r);
  const double disk_y = uniform(disk_r, h - disk_r);
  const double disk_level = uniform(0.6, 0.8);

  const double patch_h = uniform(0.3, 0.5) * h;
  const double patch_w = uniform(0.3, 0.5) * w;
  const double patch_y = uniform(0.0, h - patch_h);
  const double patch_x = uniform(0.0, w - patch_w);
  const double stripe_period = uniform(2.0, 4.0);
  const double stripe_angle = uniform(0.0, std::numbers::pi);
  const double contrast = uniform(0.15, 0.3);

  LevelGrid image(height, width);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const double x = static_cast<double>(c) + 0.5;
      const double y = static_cast<double>(r) + 0.5;
      double v = base + tilt_x * (x / w - 0.5) + tilt_y * (y / h - 0.5);
      if (std::hypot(x - disk_x, y - disk_y) < disk_r) v = disk_level;
      if (x >= patch_x && x < patch_x + patch_w && y >= patch_y && y < patch_y + patch_h) {
        const double phase = 2.0 * std::numbers::pi *
                             (x * std::cos(stripe_angle) + y * std::sin(stripe_angle)) /
                             stripe_period;
        v = 0.5 + contrast * std::sin(phase) + uniform(-0.1, 0.1);
      }
      image(r, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  return image;
}

}  // namespace splatbudget
