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

#ifndef DISAGG_METRICS_HPP_
#define DISAGG_METRICS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "disagg/ingest.hpp"
#include "disagg/model.hpp"

namespace disagg {

enum class Metric { kPpe, kPpse, kRmse };

std::string_view metric_name(Metric metric);
// Accepts "ppe", "ppse", "rmse" in any case.
Metric parse_metric(std::string_view name);

// Predicted count, census count and surface of one unit.
struct UnitRecord {
  double predicted = 0.0;
  double census = 0.0;
  double surface = 0.0;
};

// Fractions for ppe/ppse, people for rmse. Units with census 0 are left out
// of ppe/ppse and counted in excluded_units; rmse uses every unit, so it is
// computed over n_units + excluded_units records.
struct MetricReport {
  double ppe = 0.0;
  double ppse = 0.0;
  double rmse = 0.0;
  std::size_t n_units = 0;
  std::size_t excluded_units = 0;
  bool adjusted = false;

  bool operator==(const MetricReport&) const = default;
};

// sqrt(sum (pred - census)^2 / |U|).
double rmse(std::span<const UnitRecord> units);
// sum surface * |pred - census| / census, divided by the total surface.
double ppe(std::span<const UnitRecord> units);
// sum surface * (pred - census)^2 / census, divided by the total surface.
double ppse(std::span<const UnitRecord> units);
double metric_value(Metric metric, std::span<const UnitRecord> units);

MetricReport evaluate(std::span<const UnitRecord> units, bool adjusted);

// Unit surfaces keyed by id, for every unit of the zone map.
UnitValues unit_surfaces(const ZoneMap& zone);

// Assembles records for unit_ids. Throws ValidationError when a unit is
// missing from any input.
std::vector<UnitRecord> collect_records(const UnitPredictions& preds,
                                        const CensusTable& census,
                                        const UnitValues& surfaces,
                                        std::span<const std::string> unit_ids);

double rmse(const UnitPredictions& preds, const CensusTable& census,
            std::span<const std::string> unit_ids);
double ppe(const UnitPredictions& preds, const CensusTable& census,
           const UnitValues& surfaces, std::span<const std::string> unit_ids);
double ppse(const UnitPredictions& preds, const CensusTable& census,
            const UnitValues& surfaces, std::span<const std::string> unit_ids);
MetricReport evaluate(const UnitPredictions& preds, const CensusTable& census,
                      const UnitValues& surfaces,
                      std::span<const std::string> unit_ids, bool adjusted);

// Componentwise arithmetic mean of ppe/ppse/rmse; counts are summed.
MetricReport mean_report(std::span<const MetricReport> reports);

}  // namespace disagg

#endif  // DISAGG_METRICS_HPP_
