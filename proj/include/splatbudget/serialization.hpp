#pragma once

/// File formats: pyramid JSON, lookup-table binary and JSON mirror, mask
/// manifest, placement CSV, experiment report JSON and pose JSON.

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "splatbudget/alloc.hpp"
#include "splatbudget/budget.hpp"
#include "splatbudget/fit2d.hpp"
#include "splatbudget/geom.hpp"
#include "splatbudget/grid.hpp"

namespace splatbudget {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

/// Non-finite reals become the strings "inf" / "-inf" (JSON has no infinity).
inline json real_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double real_from_json(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw InvalidArgument("expected a number, got \"" + s + "\"");
  }
  return j.get<double>();
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Score pyramid
// ---------------------------------------------------------------------------

inline json pyramid_to_json(const ScorePyramid& pyramid) {
  json grids = json::array();
  for (const auto& view : pyramid.grids()) {
    json levels = json::array();
    for (const auto& grid : view) {
      levels.push_back({{"h", grid.height()},
                        {"w", grid.width()},
                        {"values", std::vector<double>(grid.values().begin(), grid.values().end())}});
    }
    grids.push_back(std::move(levels));
  }
  return {{"num_views", pyramid.num_views()},
          {"num_levels", pyramid.num_levels()},
          {"grids", std::move(grids)}};
}

inline ScorePyramid pyramid_from_json(const json& j) {
  try {
    const auto num_views = j.at("num_views").get<std::size_t>();
    const auto num_levels = j.at("num_levels").get<std::size_t>();
    const json& jgrids = j.at("grids");
    detail::require(jgrids.is_array() && jgrids.size() == num_views,
                    "grids must hold one entry per view");
    std::vector<std::vector<LevelGrid>> grids;
    for (const json& jview : jgrids) {
      std::vector<LevelGrid> view;
      for (const json& jgrid : jview) {
        view.emplace_back(jgrid.at("h").get<std::size_t>(), jgrid.at("w").get<std::size_t>(),
                          jgrid.at("values").get<std::vector<double>>());
      }
      grids.push_back(std::move(view));
    }
    return ScorePyramid(num_levels, std::move(grids));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed pyramid JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Lookup table: [u64 K][f64 tau x K][u64 count x K][u64 base][u64 max], LE
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u64_le(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  out.write(bytes, 8);
}

inline std::uint64_t get_u64_le(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw IoError("table file is truncated");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

}  // namespace detail

inline void write_table_binary(std::ostream& out, const ThresholdBudgetTable& table) {
  detail::put_u64_le(out, table.size());
  for (double t : table.thresholds) detail::put_u64_le(out, std::bit_cast<std::uint64_t>(t));
  for (std::int64_t c : table.counts) detail::put_u64_le(out, static_cast<std::uint64_t>(c));
  detail::put_u64_le(out, static_cast<std::uint64_t>(table.base_count));
  detail::put_u64_le(out, static_cast<std::uint64_t>(table.max_count));
}

inline ThresholdBudgetTable read_table_binary(std::istream& in) {
  const std::uint64_t k = detail::get_u64_le(in);
  if (k > (std::uint64_t{1} << 40)) throw IoError("table length is implausible");
  ThresholdBudgetTable table;
  table.thresholds.resize(k);
  table.counts.resize(k);
  for (auto& t : table.thresholds) t = std::bit_cast<double>(detail::get_u64_le(in));
  for (auto& c : table.counts) c = static_cast<std::int64_t>(detail::get_u64_le(in));
  table.base_count = static_cast<std::int64_t>(detail::get_u64_le(in));
  table.max_count = static_cast<std::int64_t>(detail::get_u64_le(in));
  if (in.peek() != std::char_traits<char>::eof()) throw IoError("trailing bytes after table");
  try {
    table.validate();
  } catch (const InvalidArgument& e) {
    throw IoError(std::string("inconsistent table file: ") + e.what());
  }
  return table;
}

inline void write_table_binary(const std::filesystem::path& path, const ThresholdBudgetTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_table_binary(out, table);
  if (!out) throw IoError("failed writing " + path.string());
}

inline ThresholdBudgetTable read_table_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_table_binary(in);
}

inline json table_to_json(const ThresholdBudgetTable& table) {
  return {{"num_entries", table.size()},
          {"thresholds", table.thresholds},
          {"counts", table.counts},
          {"base_count", table.base_count},
          {"max_count", table.max_count}};
}

// ---------------------------------------------------------------------------
// Allocation outputs
// ---------------------------------------------------------------------------

inline json mask_manifest(const AllocationMaskSet& masks, double tau) {
  return {{"tau", real_to_json(tau)},
          {"counts_per_level", counts_per_level(masks)},
          {"total", count_gaussians(masks)}};
}

inline std::string placements_csv(const std::vector<GaussianPlacement>& placements) {
  std::ostringstream out;
  out << "view,level,row,col\n";
  for (const auto& p : placements) out << p.view << ',' << p.level << ',' << p.row << ',' << p.col << '\n';
  return out.str();
}

inline json report_to_json(const ExperimentReport& report) {
  return {{"strategy", std::string(to_string(report.strategy))},
          {"budget_fraction", report.budget_fraction},
          {"seed", report.seed},
          {"budget", report.budget},
          {"achieved_count", report.achieved_count},
          {"tau", real_to_json(report.tau)},
          {"final_mse", report.final_mse},
          {"per_level_counts", report.per_level_counts}};
}

// ---------------------------------------------------------------------------
// Poses: 4x4 row-major, nested rows (a flat array of 16 is also accepted)
// ---------------------------------------------------------------------------

inline json pose_to_json(const Pose& pose) {
  json rows = json::array();
  for (int r = 0; r < 4; ++r) {
    rows.push_back({pose.matrix()(r, 0), pose.matrix()(r, 1), pose.matrix()(r, 2), pose.matrix()(r, 3)});
  }
  return rows;
}

inline Pose pose_from_json(const json& j) {
  try {
    Eigen::Matrix4d m;
    if (j.is_array() && j.size() == 16) {
      for (int i = 0; i < 16; ++i) m(i / 4, i % 4) = j.at(static_cast<std::size_t>(i)).get<double>();
    } else {
      detail::require(j.is_array() && j.size() == 4, "pose must be a 4x4 array");
      for (int r = 0; r < 4; ++r) {
        const json& row = j.at(static_cast<std::size_t>(r));
        detail::require(row.is_array() && row.size() == 4, "pose rows must have 4 entries");
        for (int c = 0; c < 4; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
      }
    }
    return Pose(m);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed pose JSON: ") + e.what());
  }
}

}  // namespace splatbudget
