// splatbudget command-line front end.
//
// Exit codes: 0 success, 2 usage or I/O error, 3 domain error (budget out of
// range, degenerate baseline).

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>

#include "CLI11.hpp"
#include "splatbudget/splatbudget.hpp"

namespace sb = splatbudget;
namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitDomain = 3;

std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc{} ? std::string(buf, end) : std::to_string(v);
}

double parse_real(const std::string& text) {
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw sb::InvalidArgument("not a number: " + text);
  }
  if (used != text.size() || std::isnan(v)) throw sb::InvalidArgument("not a number: " + text);
  return v;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    sb::write_text_file(path, text);
  }
}

sb::StrategyKind strategy_or_throw(const std::string& name) {
  auto kind = sb::parse_strategy(name);
  if (!kind) throw sb::InvalidArgument("unknown strategy: " + name);
  return *kind;
}

struct ScoreArgs {
  std::string image;
  std::size_t levels = 3;
  std::string strategy = "sobel";
  std::uint64_t seed = 0;
  int iterations = sb::FitConfig{}.iterations;
  std::string out;
};

int run_score(const ScoreArgs& args) {
  const sb::LevelGrid image = sb::read_pnm(fs::path(args.image));
  sb::ScorePyramid pyramid;
  switch (strategy_or_throw(args.strategy)) {
    case sb::StrategyKind::SobelFrequency:
      pyramid = sb::sobel_frequency_pyramid(image, args.levels);
      break;
    case sb::StrategyKind::UniformRandom: {
      const auto coarse = sb::coarse_dims_for_image(image.height(), image.width(), args.levels);
      pyramid = sb::uniform_random_pyramid(sb::ScorePyramid::filled(1, args.levels, coarse), args.seed);
      break;
    }
    case sb::StrategyKind::GradientScore: {
      sb::FitConfig config;
      config.iterations = args.iterations;
      config.seed = args.seed;
      pyramid = sb::gradient_score_pyramid(image, args.levels, config);
      break;
    }
  }
  write_output(args.out, sb::pyramid_to_json(pyramid).dump() + "\n");
  return 0;
}

struct TableArgs {
  std::string pyramid;
  std::string out;
  std::string json_out;
};

int run_table(const TableArgs& args) {
  const auto table = sb::build_table(sb::pyramid_from_json(sb::read_json_file(args.pyramid)));
  sb::write_table_binary(fs::path(args.out), table);
  if (!args.json_out.empty()) write_output(args.json_out, sb::table_to_json(table).dump(2) + "\n");
  std::cout << "entries=" << table.size() << " base=" << table.base_count
            << " max=" << table.max_count << "\n";
  return 0;
}

struct MatchArgs {
  std::string pyramid;
  std::string table;
  std::int64_t budget = 0;
};

sb::ThresholdBudgetTable load_or_build_table(const std::string& pyramid, const std::string& table) {
  if (!table.empty()) return sb::read_table_binary(fs::path(table));
  if (pyramid.empty()) throw sb::InvalidArgument("one of --pyramid or --table is required");
  return sb::build_table(sb::pyramid_from_json(sb::read_json_file(pyramid)));
}

int run_match(const MatchArgs& args) {
  const auto table = load_or_build_table(args.pyramid, args.table);
  const auto m = sb::match_budget(table, {args.budget});
  std::cout << "tau=" << format_real(m.tau) << " achieved=" << m.achieved << " slack=" << m.slack
            << "\n";
  return 0;
}

struct AllocArgs {
  std::string pyramid;
  std::string tau;
  std::optional<std::int64_t> budget;
  std::string out;
};

int run_alloc(const AllocArgs& args) {
  if (args.tau.empty() == !args.budget.has_value()) {
    throw sb::InvalidArgument("exactly one of --tau or --budget is required");
  }
  const auto pyramid = sb::pyramid_from_json(sb::read_json_file(args.pyramid));
  double tau = 0.0;
  if (args.budget) {
    tau = sb::match_budget(sb::build_table(pyramid), {*args.budget}).tau;
  } else {
    tau = parse_real(args.tau);
  }
  const auto masks = sb::compute_masks(pyramid, tau);

  const fs::path dir(args.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw sb::IoError("cannot create " + dir.string() + ": " + ec.message());
  for (std::size_t v = 0; v < masks.num_views(); ++v) {
    for (std::size_t l = 1; l <= masks.num_levels(); ++l) {
      sb::write_pgm(dir / ("mask_view" + std::to_string(v) + "_level" + std::to_string(l) + ".pgm"),
                    masks.mask(v, l));
    }
  }
  const auto manifest = sb::mask_manifest(masks, tau);
  sb::write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
  sb::write_text_file(dir / "placements.csv", sb::placements_csv(sb::enumerate_placements(masks)));
  std::cout << "tau=" << format_real(tau) << " total=" << manifest["total"].get<std::int64_t>()
            << "\n";
  return 0;
}

struct FitArgs {
  std::string image;
  std::string strategy = "gradient";
  double budget_fraction = 0.25;
  std::uint64_t seed = 0;
  int iterations = sb::FitConfig{}.iterations;
  double learning_rate = sb::FitConfig{}.learning_rate;
  std::size_t levels = 3;
  std::string out;
};

int run_fit2d(const FitArgs& args) {
  const sb::LevelGrid image = sb::read_pnm(fs::path(args.image));
  sb::FitConfig config;
  config.iterations = args.iterations;
  config.learning_rate = args.learning_rate;
  config.seed = args.seed;
  const auto report = sb::run_strategy_experiment(image, args.budget_fraction,
                                                  strategy_or_throw(args.strategy), config, args.levels);
  write_output(args.out, sb::report_to_json(report).dump(2) + "\n");
  return 0;
}

struct CompareArgs {
  std::string image;
  std::size_t synthetic = 0;
  double budget_fraction = 0.25;
  std::uint64_t seeds = 5;
  int iterations = sb::FitConfig{}.iterations;
  std::size_t levels = 3;
  std::string out;
};

int run_compare(const CompareArgs& args) {
  if (args.image.empty() == (args.synthetic == 0)) {
    throw sb::InvalidArgument("exactly one of --image or --synthetic is required");
  }
  if (!(args.budget_fraction > 0.0 && args.budget_fraction <= 1.0)) {
    throw sb::InvalidArgument("--budget-fraction must lie in (0, 1]");
  }
  std::optional<sb::LevelGrid> fixed;
  if (!args.image.empty()) fixed = sb::read_pnm(fs::path(args.image));

  std::ostringstream csv;
  csv << "strategy,seed,budget_fraction,budget,achieved_count,tau,final_mse\n";
  for (auto kind : {sb::StrategyKind::GradientScore, sb::StrategyKind::SobelFrequency,
                    sb::StrategyKind::UniformRandom}) {
    for (std::uint64_t seed = 0; seed < args.seeds; ++seed) {
      const sb::LevelGrid image = fixed ? *fixed : sb::textured_scene(args.synthetic, args.synthetic, seed);
      sb::FitConfig config;
      config.iterations = args.iterations;
      config.seed = seed;
      const auto r = sb::run_strategy_experiment(image, args.budget_fraction, kind, config, args.levels);
      csv << sb::to_string(kind) << ',' << seed << ',' << format_real(args.budget_fraction) << ','
          << r.budget << ',' << r.achieved_count << ',' << format_real(r.tau) << ','
          << format_real(r.final_mse) << '\n';
    }
  }
  write_output(args.out, csv.str());
  return 0;
}

struct AlignArgs {
  std::string bundle;
};

int run_align(const AlignArgs& args) {
  const auto j = sb::read_json_file(args.bundle);
  try {
    const auto& gt = j.at("gt");
    const auto& pred = j.at("pred");
    if (!gt.is_array() || gt.size() != 2 || !pred.is_array() || pred.size() != 2) {
      throw sb::InvalidArgument("bundle needs two gt and two pred poses (n1, n2)");
    }
    const auto a = sb::estimate_alignment(sb::pose_from_json(gt[0]), sb::pose_from_json(gt[1]),
                                          sb::pose_from_json(pred[0]), sb::pose_from_json(pred[1]));
    const auto aligned = sb::align_target(a, sb::pose_from_json(j.at("target")));
    sb::json out = {{"scale", a.scale}, {"aligned_target", sb::pose_to_json(aligned)}};
    if (j.contains("focal")) {
      const auto& f = j.at("focal");
      out["focal"] = sb::transfer_focal(f.at("pred_n1").get<double>(), f.at("gt_n1").get<double>(),
                                        f.at("gt_target").get<double>());
    }
    std::cout << out.dump(2) << "\n";
  } catch (const sb::json::exception& e) {
    throw sb::InvalidArgument(std::string("malformed align bundle: ") + e.what());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Budget-controlled multi-level Gaussian allocation tools"};
  app.set_version_flag("--version", std::string(sb::kVersion));
  app.require_subcommand(1);

  auto add_version = [](CLI::App* sub) { sub->set_version_flag("--version", std::string(sb::kVersion)); };

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Compute a heuristic or gradient score pyramid");
  add_version(score_cmd);
  score_cmd->add_option("--image", score.image, "PGM/PPM input")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--levels", score.levels, "Number of levels L (>= 2)")->check(CLI::Range(2, 16));
  score_cmd->add_option("--strategy", score.strategy, "sobel | random | gradient")
      ->check(CLI::IsMember({"sobel", "random", "gradient"}));
  score_cmd->add_option("--seed", score.seed, "Seed for the random strategy");
  score_cmd->add_option("--iterations", score.iterations, "Fit iterations for the gradient strategy");
  score_cmd->add_option("--out", score.out, "Output pyramid JSON")->required();

  TableArgs table;
  auto* table_cmd = app.add_subcommand("table", "Build the threshold-budget lookup table");
  add_version(table_cmd);
  table_cmd->add_option("--pyramid", table.pyramid, "Pyramid JSON")->required()->check(CLI::ExistingFile);
  table_cmd->add_option("--out", table.out, "Binary table output")->required();
  table_cmd->add_option("--json", table.json_out, "Optional JSON mirror of the table");

  MatchArgs match;
  auto* match_cmd = app.add_subcommand("match", "Find the threshold matching a Gaussian budget");
  add_version(match_cmd);
  match_cmd->add_option("--pyramid", match.pyramid, "Pyramid JSON")->check(CLI::ExistingFile);
  match_cmd->add_option("--table", match.table, "Precomputed binary table")->check(CLI::ExistingFile);
  match_cmd->add_option("--budget", match.budget, "Target Gaussian count")->required();

  AllocArgs alloc;
  auto* alloc_cmd = app.add_subcommand("alloc", "Write allocation masks for a threshold or budget");
  add_version(alloc_cmd);
  alloc_cmd->add_option("--pyramid", alloc.pyramid, "Pyramid JSON")->required()->check(CLI::ExistingFile);
  auto* tau_opt = alloc_cmd->add_option("--tau", alloc.tau, "Threshold (number, inf or -inf)");
  auto* budget_opt = alloc_cmd->add_option("--budget", alloc.budget, "Target Gaussian count");
  tau_opt->excludes(budget_opt);
  alloc_cmd->add_option("--out", alloc.out, "Output directory")->required();

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit2d", "Run one allocation strategy on an image and report MSE");
  add_version(fit_cmd);
  fit_cmd->add_option("--image", fit.image, "PGM/PPM target")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--strategy", fit.strategy, "gradient | sobel | random")
      ->check(CLI::IsMember({"sobel", "random", "gradient"}));
  fit_cmd->add_option("--budget-fraction", fit.budget_fraction, "Budget as a fraction of the finest count");
  fit_cmd->add_option("--seed", fit.seed, "Seed");
  fit_cmd->add_option("--iterations", fit.iterations, "Fit iterations per stage")->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--learning-rate", fit.learning_rate, "Preconditioned step size");
  fit_cmd->add_option("--levels", fit.levels, "Number of levels L")->check(CLI::Range(2, 8));
  fit_cmd->add_option("--out", fit.out, "Report JSON (default stdout)");

  CompareArgs compare;
  auto* compare_cmd = app.add_subcommand("compare", "Compare allocation strategies across seeds");
  add_version(compare_cmd);
  compare_cmd->add_option("--image", compare.image, "PGM/PPM target")->check(CLI::ExistingFile);
  compare_cmd->add_option("--synthetic", compare.synthetic, "Use seeded NxN synthetic scenes instead");
  compare_cmd->add_option("--budget-fraction", compare.budget_fraction, "Budget fraction in (0, 1]")->required();
  compare_cmd->add_option("--seeds", compare.seeds, "Number of seeds")->required();
  compare_cmd->add_option("--iterations", compare.iterations, "Fit iterations per stage")->check(CLI::NonNegativeNumber);
  compare_cmd->add_option("--levels", compare.levels, "Number of levels L")->check(CLI::Range(2, 8));
  compare_cmd->add_option("--out", compare.out, "Output CSV (default stdout)");

  AlignArgs align;
  auto* align_cmd = app.add_subcommand("align", "Align a ground-truth target camera into the predicted frame");
  add_version(align_cmd);
  align_cmd->add_option("--bundle", align.bundle, "JSON {gt:[n1,n2], pred:[n1,n2], target, focal?}")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*score_cmd) return run_score(score);
    if (*table_cmd) return run_table(table);
    if (*match_cmd) return run_match(match);
    if (*alloc_cmd) return run_alloc(alloc);
    if (*fit_cmd) return run_fit2d(fit);
    if (*compare_cmd) return run_compare(compare);
    if (*align_cmd) return run_align(align);
  } catch (const sb::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
