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

#include "disagg/crossval.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <random>

#include "disagg/error.hpp"
#include "disagg/io.hpp"
#include "disagg/redistribute.hpp"
#include "json.hpp"

namespace disagg {

FoldAssignment assign_folds(std::span<const std::string> superunit_ids, int k,
                            std::uint64_t seed) {
  if (k < 1) throw ValidationError("fold count must be at least 1");
  if (static_cast<std::size_t>(k) > superunit_ids.size()) {
    throw ValidationError("cannot split " +
                          std::to_string(superunit_ids.size()) +
                          " superunits into " + std::to_string(k) + " folds");
  }
  std::vector<std::string> order(superunit_ids.begin(), superunit_ids.end());
  std::sort(order.begin(), order.end());
  if (std::adjacent_find(order.begin(), order.end()) != order.end()) {
    throw ValidationError("duplicate superunit id");
  }
  // Fisher-Yates with an explicit draw so the permutation is fixed across
  // standard library implementations.
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  FoldAssignment out;
  out.k = k;
  out.seed = seed;
  out.folds.resize(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < order.size(); ++i) {
    const int fold = static_cast<int>(i % static_cast<std::size_t>(k));
    out.fold_of[order[i]] = fold;
    out.folds[static_cast<std::size_t>(fold)].push_back(order[i]);
  }
  return out;
}

namespace {

std::vector<unsigned char> unit_pixel_mask(const ZoneMap& zone,
                                           std::span<const std::string> units) {
  std::vector<unsigned char> mask(
      static_cast<std::size_t>(zone.width()) * zone.height(), 0);
  for (const auto& id : units) {
    for (const auto& p : zone.pixels_of(zone.unit_index(id))) {
      mask[static_cast<std::size_t>(p.y) * zone.width() + p.x] = 1;
    }
  }
  return mask;
}

}  // namespace

CvResult run_cv(const CovariateStack& stack, const ZoneMap& zone,
                const CensusTable& census, const TrainConfig& config,
                const CvOptions& options) {
  validate_census(census, zone);
  CvResult result;
  result.assignment = assign_folds(zone.superunit_ids(), options.k, options.seed);

  std::optional<CovariateStack> global;
  if (!stack.standardized() && options.global_stats) {
    global = standardize(stack);
  }
  const auto surfaces = unit_surfaces(zone);

  std::vector<MetricReport> unadjusted;
  std::vector<MetricReport> adjusted;
  for (int fold = 0; fold < options.k; ++fold) {
    FoldResult fr;
    fr.fold = fold;
    for (std::size_t u = 0; u < zone.unit_count(); ++u) {
      const auto& s = zone.superunit_id(zone.superunit_of(u));
      if (result.assignment.fold_of.at(s) == fold) {
        fr.test_units.push_back(zone.unit_id(u));
      } else {
        fr.train_units.push_back(zone.unit_id(u));
      }
    }
    if (fr.test_units.empty()) {
      throw ValidationError("fold " + std::to_string(fold) + " has no units");
    }
    if (fr.train_units.empty()) {
      throw ValidationError("fold " + std::to_string(fold) +
                            " leaves no training units");
    }

    std::optional<CovariateStack> local;
    const CovariateStack* working = &stack;
    if (global) {
      working = &*global;
    } else if (!stack.standardized()) {
      auto stats = compute_stats(stack, unit_pixel_mask(zone, fr.train_units));
      local = apply_stats(stack, stats);
      working = &*local;
    }
    fr.stats = working->stats();

    auto fitted = fit(*working, zone, census, fr.train_units, config);
    fr.params = fitted.params;

    if (options.calibration != Calibration::kNone) {
      auto train_preds =
          predict_units(fr.params, *working, zone, fr.train_units);
      fr.calibration_factor = calibration_factor(
          mean_ratio_factor(train_preds, census), options.calibration);
    }

    auto preds = scale(predict_units(fr.params, *working, zone, fr.test_units),
                       fr.calibration_factor);
    fr.unadjusted = evaluate(preds, census, surfaces, fr.test_units, false);

    auto factors = dasymetric_factors(preds, zone, census, Level::kSuperunit);
    auto adjusted_preds = apply_factors(preds, zone, factors);
    fr.adjusted =
        evaluate(adjusted_preds, census, surfaces, fr.test_units, true);
    fr.max_superunit_mismatch =
        max_zone_mismatch(adjusted_preds, zone, census, Level::kSuperunit);

    unadjusted.push_back(fr.unadjusted);
    adjusted.push_back(fr.adjusted);
    result.folds.push_back(std::move(fr));
  }
  result.mean_unadjusted = mean_report(unadjusted);
  result.mean_adjusted = mean_report(adjusted);
  return result;
}

std::string cv_csv(const CvResult& result) {
  std::string text = "fold,adjusted,ppe,ppse,rmse\n";
  for (const auto& f : result.folds) {
    for (const auto* r : {&f.unadjusted, &f.adjusted}) {
      text += std::to_string(f.fold) + "," + (r->adjusted ? "1" : "0") + "," +
              format_double(r->ppe) + "," + format_double(r->ppse) + "," +
              format_double(r->rmse) + "\n";
    }
  }
  return text;
}

std::string cv_summary_json(const CvResult& result) {
  using nlohmann::json;
  auto report = [](const MetricReport& r) {
    return json::parse(report_json(r));
  };
  json j;
  j["k"] = result.assignment.k;
  j["seed"] = result.assignment.seed;
  j["mean_unadjusted"] = report(result.mean_unadjusted);
  j["mean_adjusted"] = report(result.mean_adjusted);
  j["folds"] = json::array();
  for (const auto& f : result.folds) {
    json fold;
    fold["fold"] = f.fold;
    fold["superunits"] = result.assignment.folds[static_cast<std::size_t>(f.fold)];
    fold["train_units"] = f.train_units.size();
    fold["test_units"] = f.test_units.size();
    fold["unadjusted"] = report(f.unadjusted);
    fold["adjusted"] = report(f.adjusted);
    fold["a"] = f.params.a;
    fold["b"] = f.params.b;
    fold["c"] = f.params.c;
    fold["calibration_factor"] = f.calibration_factor;
    fold["max_superunit_mismatch"] = f.max_superunit_mismatch;
    j["folds"].push_back(std::move(fold));
  }
  return j.dump(2);
}

}  // namespace disagg
