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

#include "disagg/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "disagg/error.hpp"

namespace disagg {

std::string_view metric_name(Metric metric) {
  switch (metric) {
    case Metric::kPpe:
      return "ppe";
    case Metric::kPpse:
      return "ppse";
    case Metric::kRmse:
      return "rmse";
  }
  return "?";
}

Metric parse_metric(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "ppe") return Metric::kPpe;
  if (lower == "ppse") return Metric::kPpse;
  if (lower == "rmse") return Metric::kRmse;
  throw ValidationError("unknown metric '" + std::string(name) + "'");
}

double rmse(std::span<const UnitRecord> units) {
  if (units.empty()) throw ValidationError("RMSE over an empty unit set");
  double ss = 0.0;
  for (const auto& u : units) {
    const double d = u.predicted - u.census;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(units.size()));
}

namespace {

template <typename Term>
double surface_weighted(std::span<const UnitRecord> units, Term term) {
  double weighted = 0.0;
  double total_surface = 0.0;
  for (const auto& u : units) {
    if (u.census == 0.0) continue;
    weighted += u.surface * term(u);
    total_surface += u.surface;
  }
  if (!(total_surface > 0.0)) {
    throw ValidationError(
        "no unit with positive census and surface to evaluate");
  }
  return weighted / total_surface;
}

}  // namespace

double ppe(std::span<const UnitRecord> units) {
  return surface_weighted(units, [](const UnitRecord& u) {
    return std::abs(u.predicted - u.census) / u.census;
  });
}

double ppse(std::span<const UnitRecord> units) {
  return surface_weighted(units, [](const UnitRecord& u) {
    const double d = u.predicted - u.census;
    return d * d / u.census;
  });
}

double metric_value(Metric metric, std::span<const UnitRecord> units) {
  switch (metric) {
    case Metric::kPpe:
      return ppe(units);
    case Metric::kPpse:
      return ppse(units);
    case Metric::kRmse:
      return rmse(units);
  }
  return 0.0;
}

MetricReport evaluate(std::span<const UnitRecord> units, bool adjusted) {
  MetricReport report;
  report.ppe = ppe(units);
  report.ppse = ppse(units);
  report.rmse = rmse(units);
  report.excluded_units = static_cast<std::size_t>(std::count_if(
      units.begin(), units.end(),
      [](const UnitRecord& u) { return u.census == 0.0; }));
  report.n_units = units.size() - report.excluded_units;
  report.adjusted = adjusted;
  return report;
}

UnitValues unit_surfaces(const ZoneMap& zone) {
  UnitValues out;
  for (std::size_t u = 0; u < zone.unit_count(); ++u) {
    out[zone.unit_id(u)] = zone.unit_surface(u);
  }
  return out;
}

std::vector<UnitRecord> collect_records(const UnitPredictions& preds,
                                        const CensusTable& census,
                                        const UnitValues& surfaces,
                                        std::span<const std::string> unit_ids) {
  std::vector<UnitRecord> out;
  out.reserve(unit_ids.size());
  for (const auto& id : unit_ids) {
    auto p = preds.find(id);
    if (p == preds.end()) {
      throw ValidationError("no prediction for unit '" + id + "'");
    }
    auto s = surfaces.find(id);
    if (s == surfaces.end()) {
      throw ValidationError("no surface for unit '" + id + "'");
    }
    out.push_back(UnitRecord{p->second, census.at(id), s->second});
  }
  return out;
}

double rmse(const UnitPredictions& preds, const CensusTable& census,
            std::span<const std::string> unit_ids) {
  std::vector<UnitRecord> records;
  records.reserve(unit_ids.size());
  for (const auto& id : unit_ids) {
    auto p = preds.find(id);
    if (p == preds.end()) {
      throw ValidationError("no prediction for unit '" + id + "'");
    }
    records.push_back(UnitRecord{p->second, census.at(id), 0.0});
  }
  return rmse(records);
}

double ppe(const UnitPredictions& preds, const CensusTable& census,
           const UnitValues& surfaces, std::span<const std::string> unit_ids) {
  return ppe(collect_records(preds, census, surfaces, unit_ids));
}

double ppse(const UnitPredictions& preds, const CensusTable& census,
            const UnitValues& surfaces, std::span<const std::string> unit_ids) {
  return ppse(collect_records(preds, census, surfaces, unit_ids));
}

MetricReport evaluate(const UnitPredictions& preds, const CensusTable& census,
                      const UnitValues& surfaces,
                      std::span<const std::string> unit_ids, bool adjusted) {
  return evaluate(collect_records(preds, census, surfaces, unit_ids), adjusted);
}

MetricReport mean_report(std::span<const MetricReport> reports) {
  if (reports.empty()) throw ValidationError("no reports to average");
  MetricReport out;
  for (const auto& r : reports) {
    out.ppe += r.ppe;
    out.ppse += r.ppse;
    out.rmse += r.rmse;
    out.n_units += r.n_units;
    out.excluded_units += r.excluded_units;
  }
  const double n = static_cast<double>(reports.size());
  out.ppe /= n;
  out.ppse /= n;
  out.rmse /= n;
  out.adjusted = reports.front().adjusted;
  return out;
}

}  // namespace disagg
