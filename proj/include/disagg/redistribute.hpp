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

#ifndef DISAGG_REDISTRIBUTE_HPP_
#define DISAGG_REDISTRIBUTE_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "disagg/ingest.hpp"
#include "disagg/model.hpp"

namespace disagg {

enum class Level { kUnit, kSuperunit };

std::string_view level_name(Level level);
Level parse_level(std::string_view name);

// Correcting factor census(z) / predicted(z) per zone at one level. Indexed
// by unit or superunit index; zones that were not part of the input keep
// NaN. Zones with census 0 get factor 0.
struct ZoneFactors {
  Level level = Level::kSuperunit;
  std::vector<double> factors;

  double factor_for_unit(const ZoneMap& zone, std::size_t unit) const;
};

// Factors for every zone touched by `preds`. At superunit level every member
// unit of a touched superunit must be present in `preds`. Zones with zero
// predicted mass and positive census raise ValidationError listing them all.
ZoneFactors dasymetric_factors(const UnitPredictions& preds,
                               const ZoneMap& zone, const CensusTable& census,
                               Level level);

// Unit predictions scaled by the factor of the zone each unit belongs to.
UnitPredictions apply_factors(const UnitPredictions& preds,
                              const ZoneMap& zone, const ZoneFactors& factors);

// Rescales a density raster so zone aggregates match census at `level`.
// A pixel inside one zone is multiplied by that zone's factor. A pixel shared
// by several zones takes the weight-proportional blend of its memberships'
// scaled shares. Factors come from the raster's own unit aggregates over all
// units of the zone map.
PredictionRaster dasymetric(const PredictionRaster& raster,
                            const ZoneMap& zone, const CensusTable& census,
                            Level level);

// Census-vs-prediction mismatch |pred(z) - census(z)| / max(census(z), 1)
// maximised over the zones at `level` touched by `preds`.
double max_zone_mismatch(const UnitPredictions& preds, const ZoneMap& zone,
                         const CensusTable& census, Level level);

}  // namespace disagg

#endif  // DISAGG_REDISTRIBUTE_HPP_
