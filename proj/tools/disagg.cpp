// Copyright 2026 The disagg Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// disagg: census disaggregation with the LinExp pixel model.

#include <fmt/core.h>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "disagg/crossval.hpp"
#include "disagg/error.hpp"
#include "disagg/ingest.hpp"
#include "disagg/io.hpp"
#include "disagg/metrics.hpp"
#include "disagg/model.hpp"
#include "disagg/redistribute.hpp"
#include "disagg/render.hpp"
#include "disagg/synth.hpp"
#include "disagg/train.hpp"

namespace fs = std::filesystem;
using namespace disagg;

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

const std::map<std::string, Metric> kLosses = {
    {"ppe", Metric::kPpe}, {"ppse", Metric::kPpse}, {"rmse", Metric::kRmse}};
const std::map<std::string, Level> kLevels = {{"unit", Level::kUnit},
                                              {"superunit", Level::kSuperunit}};
const std::map<std::string, Calibration> kCalibrations = {
    {"none", Calibration::kNone},
    {"corrective", Calibration::kCorrective},
    {"literal", Calibration::kLiteral}};

struct ZoneArgs {
  std::string zones;
  std::string hierarchy;
  std::string census;
};

struct TrainArgs {
  std::string stack;
  ZoneArgs zone;
  std::string loss = "ppe";
  std::string out;
  std::string trace;
  TrainConfig config;
  bool global_stats = false;
  bool deterministic = false;
};

void add_zone_options(CLI::App* cmd, ZoneArgs& args, bool census_required) {
  cmd->add_option("--zones", args.zones, "Zone CSV (unit_id,x,y,weight)")
      ->required();
  cmd->add_option("--hierarchy", args.hierarchy,
                  "Hierarchy CSV (unit_id,superunit_id); default: each unit "
                  "is its own superunit");
  auto* census =
      cmd->add_option("--census", args.census, "Census CSV (unit_id,population)");
  if (census_required) census->required();
}

void add_train_options(CLI::App* cmd, TrainArgs& args) {
  cmd->add_option("--stack", args.stack, "Covariate stack manifest (JSON)")
      ->required();
  add_zone_options(cmd, args.zone, true);
  cmd->add_option("--loss", args.loss, "Training loss: ppe, ppse or rmse")
      ->check(CLI::IsMember({"ppe", "ppse", "rmse"}));
  cmd->add_option("--iterations", args.config.iterations, "Adam iterations")
      ->capture_default_str();
  cmd->add_option("--lr-a", args.config.lr_a, "Learning rate of a")
      ->capture_default_str();
  cmd->add_option("--lr-b", args.config.lr_b, "Learning rate of b")
      ->capture_default_str();
  cmd->add_option("--lr-c", args.config.lr_c, "Learning rate of c")
      ->capture_default_str();
  cmd->add_option("--init-b", args.config.init_b, "Initial b")
      ->capture_default_str();
  cmd->add_option("--init-c", args.config.init_c, "Initial c")
      ->capture_default_str();
  cmd->add_option("--seed", args.config.seed, "Seed")->capture_default_str();
  cmd->add_flag("--freeze-a", args.config.freeze_a,
                "Keep a = 0 (constant-density model)");
  cmd->add_flag("--global-stats", args.global_stats,
                "Standardize over every pixel instead of the training units");
  cmd->add_flag("--deterministic", args.deterministic,
                "Fixed-order reductions (always on; accepted for scripts)");
}

std::optional<fs::path> optional_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

ZoneMap load_zones(const ZoneArgs& args, int width, int height) {
  return load_zone_map(args.zones, optional_path(args.hierarchy), width, height);
}

// Grid extent implied by the zone CSV, for commands without a raster.
std::pair<int, int> zone_extent(const std::string& zones) {
  int w = 0;
  int h = 0;
  for (const auto& row : read_csv(zones, "unit_id,x,y,weight")) {
    try {
      w = std::max(w, std::stoi(row[1]) + 1);
      h = std::max(h, std::stoi(row[2]) + 1);
    } catch (const std::exception&) {
      throw LoadError(zones + ": cannot parse pixel coordinates");
    }
  }
  if (w <= 0 || h <= 0) throw LoadError(zones + ": no zone entries");
  return {w, h};
}

std::string percent(double fraction) {
  return fmt::format("{:.2f}%", 100.0 * fraction);
}

void print_reports(const std::vector<std::pair<std::string, MetricReport>>& cols) {
  std::string header = fmt::format("{:<10}", "metric");
  for (const auto& [name, r] : cols) header += fmt::format("{:>14}", name);
  std::cout << header << "\n";
  auto row = [&](const std::string& label, auto value) {
    std::string line = fmt::format("{:<10}", label);
    for (const auto& [name, r] : cols) line += fmt::format("{:>14}", value(r));
    std::cout << line << "\n";
  };
  row("ppe", [](const MetricReport& r) { return percent(r.ppe); });
  row("ppse", [](const MetricReport& r) { return percent(r.ppse); });
  row("rmse", [](const MetricReport& r) { return fmt::format("{:.2f}", r.rmse); });
  row("units", [](const MetricReport& r) { return std::to_string(r.n_units); });
  row("excluded",
      [](const MetricReport& r) { return std::to_string(r.excluded_units); });
}

CovariateStack standardize_for(const CovariateStack& raw, const ZoneMap& zone,
                               bool global_stats) {
  if (global_stats) return standardize(raw);
  const auto mask = zone.coverage_mask();
  return apply_stats(raw, compute_stats(raw, mask));
}

int cmd_train(const TrainArgs& args) {
  auto raw = load_stack(args.stack);
  auto zone = load_zones(args.zone, raw.width(), raw.height());
  auto census = load_census(args.zone.census);
  validate_census(census, zone);
  for (const auto& w : zone.warnings()) std::cerr << "warning: " << w << "\n";

  auto stack = standardize_for(raw, zone, args.global_stats);
  TrainConfig config = args.config;
  config.loss = kLosses.at(args.loss);
  config.deterministic = true;
  auto result = fit(stack, zone, census, zone.unit_ids(), config);

  save_model(TrainedModel{stack.bands(), result.params, stack.stats()}, args.out);
  fs::path trace_path = args.trace;
  if (trace_path.empty()) {
    trace_path = fs::path(args.out).replace_extension("");
    trace_path += "_trace.csv";
  }
  std::string trace = "iteration,loss\n";
  for (std::size_t i = 0; i < result.trace.losses.size(); ++i) {
    trace += std::to_string(i) + "," + format_double(result.trace.losses[i]) + "\n";
  }
  write_text(trace_path, trace);

  std::cout << fmt::format("final {} loss: {:.6g} (best at iteration {})\n",
                           args.loss, result.trace.best_loss,
                           result.trace.best_iteration);
  if (result.trace.converged_early) {
    std::cout << fmt::format("loss plateaued at iteration {}\n",
                             result.trace.converged_at);
  }
  return 0;
}

struct PredictArgs {
  std::string stack;
  std::string params;
  ZoneArgs zone;
  std::string out;
  std::string redistribute;
  std::string adjusted_out;
  std::string units_out;
  bool deterministic = false;
};

int cmd_predict(const PredictArgs& args) {
  auto raw = load_stack(args.stack);
  auto model = load_model(args.params);
  const auto& bands = raw.bands();
  for (std::size_t i = 0; i < std::max(bands.size(), model.bands.size()); ++i) {
    const std::string have = i < bands.size() ? bands[i] : "<none>";
    const std::string want = i < model.bands.size() ? model.bands[i] : "<none>";
    if (have != want) {
      throw ValidationError(fmt::format(
          "band mismatch at position {}: stack has '{}', model expects '{}'", i,
          have, want));
    }
  }
  auto stack = apply_stats(raw, model.stats);
  auto zone = load_zones(args.zone, raw.width(), raw.height());
  auto raster = predict_raster(model.params, stack, zone);
  save_raster(raster, args.out);
  std::cout << "wrote " << args.out << "\n";
  if (!args.units_out.empty()) {
    save_unit_predictions(aggregate_units(raster, zone, zone.unit_ids()),
                          args.units_out);
  }
  if (!args.redistribute.empty()) {
    if (args.zone.census.empty()) {
      throw ValidationError("--redistribute needs --census");
    }
    auto census = load_census(args.zone.census);
    validate_census(census, zone);
    auto adjusted = dasymetric(raster, zone, census, kLevels.at(args.redistribute));
    fs::path out = args.adjusted_out;
    if (out.empty()) {
      out = fs::path(args.out).replace_extension("");
      out += "_adjusted.json";
    }
    save_raster(adjusted, out);
    std::cout << "wrote " << out.string() << "\n";
  }
  return 0;
}

struct EvalArgs {
  std::string raster;
  std::string units;
  ZoneArgs zone;
  std::string redistribute;
  std::string out;
  bool deterministic = false;
};

int cmd_eval(const EvalArgs& args) {
  std::optional<PredictionRaster> raster;
  int width = 0;
  int height = 0;
  if (!args.raster.empty()) {
    raster = load_raster(args.raster);
    width = raster->width;
    height = raster->height;
  } else {
    std::tie(width, height) = zone_extent(args.zone.zones);
  }
  auto zone = load_zones(args.zone, width, height);
  auto census = load_census(args.zone.census);
  validate_census(census, zone);

  UnitPredictions preds = raster ? aggregate_units(*raster, zone, zone.unit_ids())
                                 : load_unit_predictions(args.units);
  std::vector<std::string> ids;
  for (const auto& [id, v] : preds) ids.push_back(id);
  const bool adjusted = !args.redistribute.empty();
  if (adjusted) {
    auto factors = dasymetric_factors(preds, zone, census,
                                      kLevels.at(args.redistribute));
    preds = apply_factors(preds, zone, factors);
  }
  auto report = evaluate(preds, census, unit_surfaces(zone), ids, adjusted);
  print_reports({{adjusted ? "adjusted" : "unadjusted", report}});
  if (!args.out.empty()) save_report(report, args.out);
  return 0;
}

struct CvArgs {
  TrainArgs train;
  int folds = 10;
  std::string calibration = "none";
  std::string out;
  std::string summary;
};

int cmd_cv(const CvArgs& args) {
  auto raw = load_stack(args.train.stack);
  auto zone = load_zones(args.train.zone, raw.width(), raw.height());
  auto census = load_census(args.train.zone.census);
  TrainConfig config = args.train.config;
  config.loss = kLosses.at(args.train.loss);
  CvOptions options;
  options.k = args.folds;
  options.seed = args.train.config.seed;
  options.global_stats = args.train.global_stats;
  options.calibration = kCalibrations.at(args.calibration);
  auto result = run_cv(raw, zone, census, config, options);

  write_text(args.out, cv_csv(result));
  fs::path summary = args.summary;
  if (summary.empty()) {
    summary = fs::path(args.out).replace_extension(".json");
  }
  write_text(summary, cv_summary_json(result) + "\n");
  print_reports({{"unadjusted", result.mean_unadjusted},
                 {"adjusted", result.mean_adjusted}});
  return 0;
}

struct SynthArgs {
  SynthConfig config;
  std::vector<double> true_a;
  double true_b = 1.0;
  double true_c = 0.0;
  std::string out;
  bool deterministic = false;
};

int cmd_synth(SynthArgs args) {
  if (!args.true_a.empty()) args.config.true_a = args.true_a;
  args.config.true_b = args.true_b;
  args.config.true_c = args.true_c;
  auto world = generate(args.config);
  write_world(world, args.config, args.out);
  std::cout << "wrote synthetic world to " << args.out << "\n";
  return 0;
}

struct RenderArgs {
  std::string raster;
  std::string out;
};

int cmd_render(const RenderArgs& args) {
  auto raster = load_raster(args.raster);
  write_png(render_heatmap(raster), args.out);
  std::cout << fmt::format("wrote {} (99th percentile {:.6g})\n", args.out,
                           percentile99(raster));
  return 0;
}

struct ArealArgs {
  ZoneArgs zone;
  int width = 0;
  int height = 0;
  std::string out;
};

int cmd_areal(const ArealArgs& args) {
  auto zone = load_zones(args.zone, args.width, args.height);
  auto census = load_census(args.zone.census);
  save_raster(areal_weighting(census, zone), args.out);
  std::cout << "wrote " << args.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Census disaggregation with the LinExp pixel model"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Fit LinExp parameters");
  add_train_options(train_cmd, train);
  train_cmd->add_option("--out", train.out, "Parameter file (JSON)")->required();
  train_cmd->add_option("--trace", train.trace,
                        "Loss trace CSV (default: <out>_trace.csv)");

  PredictArgs predict;
  auto* predict_cmd = app.add_subcommand("predict", "Predict a density raster");
  predict_cmd->add_option("--stack", predict.stack, "Covariate stack manifest")
      ->required();
  predict_cmd->add_option("--params", predict.params, "Parameter file")
      ->required();
  add_zone_options(predict_cmd, predict.zone, false);
  predict_cmd->add_option("--out", predict.out, "Raster manifest to write")
      ->required();
  predict_cmd
      ->add_option("--redistribute", predict.redistribute,
                   "Also write a dasymetric raster at this level")
      ->check(CLI::IsMember({"unit", "superunit"}));
  predict_cmd->add_option("--adjusted-out", predict.adjusted_out,
                          "Adjusted raster manifest (default: <out>_adjusted)");
  predict_cmd->add_option("--units-out", predict.units_out,
                          "Unit predictions CSV");
  predict_cmd->add_flag("--deterministic", predict.deterministic);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate predictions");
  auto* raster_opt =
      eval_cmd->add_option("--raster", eval.raster, "Prediction raster manifest");
  auto* units_opt = eval_cmd->add_option("--units", eval.units,
                                         "Unit predictions CSV (unit_id,prediction)");
  raster_opt->excludes(units_opt);
  add_zone_options(eval_cmd, eval.zone, true);
  eval_cmd
      ->add_option("--redistribute", eval.redistribute,
                   "Evaluate after dasymetric redistribution at this level")
      ->check(CLI::IsMember({"unit", "superunit"}));
  eval_cmd->add_option("--out", eval.out, "Report JSON");
  eval_cmd->add_flag("--deterministic", eval.deterministic);

  CvArgs cv;
  auto* cv_cmd = app.add_subcommand("cv", "Grouped k-fold cross-validation");
  add_train_options(cv_cmd, cv.train);
  cv_cmd->add_option("--folds,-k", cv.folds, "Fold count")->capture_default_str();
  cv_cmd
      ->add_option("--calibration", cv.calibration,
                   "Mean-ratio calibration: none, corrective (1/mean ratio) or "
                   "literal (mean ratio)")
      ->check(CLI::IsMember({"none", "corrective", "literal"}))
      ->capture_default_str();
  cv_cmd->add_option("--out", cv.out, "Per-fold CSV")->required();
  cv_cmd->add_option("--summary", cv.summary, "Summary JSON (default: <out>.json)");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic world");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--width", synth.config.width)->capture_default_str();
  synth_cmd->add_option("--height", synth.config.height)->capture_default_str();
  synth_cmd->add_option("--bands", synth.config.n_bands)->capture_default_str();
  synth_cmd->add_option("--units", synth.config.n_units)->capture_default_str();
  synth_cmd->add_option("--superunits", synth.config.n_superunits)
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.config.seed)->capture_default_str();
  synth_cmd->add_option("--noise-sd", synth.config.noise_sd)
      ->capture_default_str();
  synth_cmd->add_flag("--fractional-border", synth.config.fractional_border);
  synth_cmd->add_option("--true-a", synth.true_a,
                        "True weights (default: uniform in [-0.5, 0.5])");
  synth_cmd->add_option("--true-b", synth.true_b)->capture_default_str();
  synth_cmd->add_option("--true-c", synth.true_c)->capture_default_str();
  synth_cmd->add_flag("--deterministic", synth.deterministic);

  RenderArgs render;
  auto* render_cmd = app.add_subcommand(
      "render",
      "Render a raster as an 8-bit RGBA PNG heatmap.\n"
      "Mapping: v99 = 99th percentile (nearest rank) of present values;\n"
      "t = log10(1 + min(v, v99) / v99) / log10(2), so 0 -> 0 and v >= v99 -> 1;\n"
      "t indexes a viridis-like colormap. Absent pixels are transparent.");
  render_cmd->add_option("--raster", render.raster, "Raster manifest")->required();
  render_cmd->add_option("--out", render.out, "PNG file")->required();

  ArealArgs areal;
  auto* areal_cmd =
      app.add_subcommand("areal", "Areal-weighting baseline raster (pixel mass)");
  add_zone_options(areal_cmd, areal.zone, true);
  areal_cmd->add_option("--width", areal.width)->required();
  areal_cmd->add_option("--height", areal.height)->required();
  areal_cmd->add_option("--out", areal.out, "Raster manifest")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train);
    if (*predict_cmd) return cmd_predict(predict);
    if (*eval_cmd) {
      if (eval.raster.empty() && eval.units.empty()) {
        std::cerr << "eval: one of --raster or --units is required\n";
        return kExitUsage;
      }
      return cmd_eval(eval);
    }
    if (*cv_cmd) return cmd_cv(cv);
    if (*synth_cmd) return cmd_synth(synth);
    if (*render_cmd) return cmd_render(render);
    if (*areal_cmd) return cmd_areal(areal);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
