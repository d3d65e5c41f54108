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

#include "disagg/redistribute.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "disagg/error.hpp"

namespace disagg {

std::string_view level_name(Level level) {
  return level == Level::kUnit ? "unit" : "superunit";
}

Level parse_level(std::string_view name) {
  if (name == "unit") return Level::kUnit;
  if (name == "superunit") return Level::kSuperunit;
  throw ValidationError("unknown redistribution level '" + std::string(name) +
                        "'");
}

double ZoneFactors::factor_for_unit(const ZoneMap& zone,
                                    std::size_t unit) const {
  return factors[level == Level::kUnit ? unit : zone.superunit_of(unit)];
}

namespace {

struct ZoneTotals {
  // zone index -> (predicted, census), ordered for deterministic reporting.
  std::map<std::size_t, std::pair<double, double>> totals;
};

ZoneTotals zone_totals(const UnitPredictions& preds, const ZoneMap& zone,
                       const CensusTable& census, Level level) {
  ZoneTotals out;
  if (level == Level::kUnit) {
    for (const auto& [id, pred] : preds) {
      out.totals[zone.unit_index(id)] = {pred, census.at(id)};
    }
    return out;
  }
  for (const auto& [id, pred] : preds) {
    out.totals.try_emplace(zone.superunit_of(zone.unit_index(id)), 0.0, 0.0);
  }
  for (auto& [s, total] : out.totals) {
    for (std::size_t unit : zone.units_of(s)) {
      const auto& id = zone.unit_id(unit);
      auto it = preds.find(id);
      if (it == preds.end()) {
        throw ValidationError("superunit '" + zone.superunit_id(s) +
                              "': no prediction for member unit '" + id + "'");
      }
      total.first += it->second;
      total.second += census.at(id);
    }
  }
  return out;
}

std::string zone_label(const ZoneMap& zone, Level level, std::size_t index) {
  return level == Level::kUnit ? zone.unit_id(index) : zone.superunit_id(index);
}

}  // namespace

ZoneFactors dasymetric_factors(const UnitPredictions& preds,
                               const ZoneMap& zone, const CensusTable& census,
                               Level level) {
  auto totals = zone_totals(preds, zone, census, level);
  ZoneFactors out;
  out.level = level;
  out.factors.assign(
      level == Level::kUnit ? zone.unit_count() : zone.superunit_count(),
      std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> impossible;
  for (const auto& [index, total] : totals.totals) {
    const auto [predicted, count] = total;
    if (count == 0.0) {
      out.factors[index] = 0.0;
    } else if (predicted > 0.0) {
      out.factors[index] = count / predicted;
    } else {
      impossible.push_back(zone_label(zone, level, index));
    }
  }
  if (!impossible.empty()) {
    std::string msg = "zero predicted mass but positive census in " +
                      std::string(level_name(level)) + "(s):";
    for (const auto& id : impossible) msg += " " + id;
    msg += "; consider areal weighting for these zones";
    throw ValidationError(msg);
  }
  return out;
}

UnitPredictions apply_factors(const UnitPredictions& preds,
                              const ZoneMap& zone, const ZoneFactors& factors) {
  UnitPredictions out;
  for (const auto& [id, pred] : preds) {
    const double f = factors.factor_for_unit(zone, zone.unit_index(id));
    if (std::isnan(f)) {
      throw ValidationError("no correcting factor for unit '" + id + "'");
    }
    out[id] = pred * f;
  }
  return out;
}

PredictionRaster dasymetric(const PredictionRaster& raster,
                            const ZoneMap& zone, const CensusTable& census,
                            Level level) {
  const auto& ids = zone.unit_ids();
  auto preds = aggregate_units(raster, zone, ids);
  auto factors = dasymetric_factors(preds, zone, census, level);

  // Pixels whose memberships all share one factor take it exactly; others
  // take sum(weight * factor) / coverage.
  const std::size_t n = raster.values.size();
  std::vector<double> blended(n, 0.0);
  std::vector<double> shared(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<unsigned char> mixed(n, 0);
  for (std::size_t unit = 0; unit < zone.unit_count(); ++unit) {
    const double f = factors.factor_for_unit(zone, unit);
    for (const auto& p : zone.pixels_of(unit)) {
      const auto i = raster.index(p.x, p.y);
      blended[i] += p.weight * f;
      if (std::isnan(shared[i])) {
        shared[i] = f;
      } else if (shared[i] != f) {
        mixed[i] = 1;
      }
    }
  }
  PredictionRaster out = raster;
  for (int y = 0; y < raster.height; ++y) {
    for (int x = 0; x < raster.width; ++x) {
      if (!zone.covered(x, y)) continue;
      const auto i = raster.index(x, y);
      const double factor = mixed[i] ? blended[i] / zone.coverage(x, y)
                                     : shared[i];
      out.values[i] = raster.values[i] * factor;
    }
  }
  return out;
}

double max_zone_mismatch(const UnitPredictions& preds, const ZoneMap& zone,
                         const CensusTable& census, Level level) {
  auto totals = zone_totals(preds, zone, census, level);
  double worst = 0.0;
  for (const auto& [index, total] : totals.totals) {
    const auto [predicted, count] = total;
    worst = std::max(worst, std::abs(predicted - count) / std::max(count, 1.0));
  }
  return worst;
}

}  // namespace disagg
