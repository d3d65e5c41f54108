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

#include "disagg/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "disagg/error.hpp"
#include "disagg/parallel.hpp"

namespace disagg {

double linexp_pixel(const LinExpParams& params,
                    std::span<const double> covariates) {
  if (covariates.size() != params.a.size()) {
    throw ValidationError("model has " + std::to_string(params.a.size()) +
                          " weights but pixel has " +
                          std::to_string(covariates.size()) + " covariates");
  }
  double z = params.b;
  for (std::size_t i = 0; i < covariates.size(); ++i) {
    z += params.a[i] * covariates[i];
  }
  if (!(z <= kMaxExponent)) {
    std::ostringstream msg;
    msg << "LinExp exponent " << z << " exceeds " << kMaxExponent;
    throw OverflowError(msg.str());
  }
  return std::max(0.0, std::exp(z) + params.c);
}

namespace {

void check_bound(const LinExpParams& params, const CovariateStack& stack,
                 const ZoneMap& zone) {
  if (params.a.size() != stack.band_count()) {
    throw ValidationError("model has " + std::to_string(params.a.size()) +
                          " weights but the stack has " +
                          std::to_string(stack.band_count()) + " bands");
  }
  if (zone.width() != stack.width() || zone.height() != stack.height()) {
    throw ValidationError("zone map grid does not match the stack grid");
  }
}

double pixel_density(const LinExpParams& params, const CovariateStack& stack,
                     int x, int y) {
  try {
    return linexp_pixel(params, stack.pixel(x, y));
  } catch (const OverflowError& e) {
    throw OverflowError(std::string(e.what()) + " at pixel (" +
                        std::to_string(x) + ", " + std::to_string(y) + ")");
  }
}

}  // namespace

PredictionRaster predict_raster(const LinExpParams& params,
                                const CovariateStack& stack,
                                const ZoneMap& zone) {
  check_bound(params, stack, zone);
  PredictionRaster out(stack.width(), stack.height());
  parallel_for(
      static_cast<std::size_t>(stack.height()),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t row = begin; row < end; ++row) {
          const int y = static_cast<int>(row);
          for (int x = 0; x < stack.width(); ++x) {
            if (!zone.covered(x, y)) continue;
            out.set(x, y, pixel_density(params, stack, x, y));
          }
        }
      },
      8);
  return out;
}

std::vector<double> predict_unit_values(const LinExpParams& params,
                                        const CovariateStack& stack,
                                        const ZoneMap& zone,
                                        std::span<const std::size_t> units) {
  check_bound(params, stack, zone);
  std::vector<double> out(units.size(), 0.0);
  parallel_for(
      units.size(),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          double total = 0.0;
          for (const auto& p : zone.pixels_of(units[i])) {
            total += p.weight * pixel_density(params, stack, p.x, p.y);
          }
          out[i] = total;
        }
      },
      4);
  return out;
}

UnitPredictions predict_units(const LinExpParams& params,
                              const CovariateStack& stack, const ZoneMap& zone,
                              std::span<const std::string> unit_ids) {
  std::vector<std::size_t> units;
  units.reserve(unit_ids.size());
  for (const auto& id : unit_ids) units.push_back(zone.unit_index(id));
  auto values = predict_unit_values(params, stack, zone, units);
  UnitPredictions out;
  for (std::size_t i = 0; i < units.size(); ++i) out[unit_ids[i]] = values[i];
  return out;
}

UnitPredictions aggregate_units(const PredictionRaster& raster,
                                const ZoneMap& zone,
                                std::span<const std::string> unit_ids) {
  if (raster.width != zone.width() || raster.height != zone.height()) {
    throw ValidationError("raster grid does not match the zone map grid");
  }
  UnitPredictions out;
  for (const auto& id : unit_ids) {
    const std::size_t unit = zone.unit_index(id);
    double total = 0.0;
    for (const auto& p : zone.pixels_of(unit)) {
      auto v = raster.at(p.x, p.y);
      if (!v) {
        throw ValidationError("unit '" + id + "': raster has no value at pixel (" +
                              std::to_string(p.x) + ", " + std::to_string(p.y) +
                              ")");
      }
      total += p.weight * *v;
    }
    out[id] = total;
  }
  return out;
}

PredictionRaster areal_weighting(const CensusTable& census,
                                 const ZoneMap& zone) {
  validate_census(census, zone);
  PredictionRaster out(zone.width(), zone.height());
  for (std::size_t unit = 0; unit < zone.unit_count(); ++unit) {
    const double count = census.at(zone.unit_id(unit));
    const double area = zone.unit_surface(unit);
    if (area <= 0.0) {
      if (count > 0.0) {
        throw ValidationError("unit '" + zone.unit_id(unit) +
                              "' has census " + std::to_string(count) +
                              " but zero surface");
      }
      continue;
    }
    const double density = count / area;
    for (const auto& p : zone.pixels_of(unit)) {
      const auto i = out.index(p.x, p.y);
      out.values[i] += p.weight * density;
      out.present[i] = 1;
    }
  }
  return out;
}

RatioFactor mean_ratio_factor(const UnitPredictions& preds,
                              const CensusTable& census) {
  RatioFactor out;
  double total = 0.0;
  for (const auto& [id, pred] : preds) {
    const double count = census.at(id);
    if (!(pred >= 0.0) || !std::isfinite(pred)) {
      throw ValidationError("unit '" + id +
                            "': prediction must be finite and non-negative");
    }
    if (count == 0.0) {
      ++out.excluded_units;
      continue;
    }
    total += pred / count;
    ++out.used_units;
  }
  if (out.used_units == 0) {
    throw ValidationError("no unit with a positive census count");
  }
  out.literal = total / static_cast<double>(out.used_units);
  if (!(out.literal > 0.0)) {
    throw ValidationError("all predictions are zero; no ratio factor exists");
  }
  out.corrective = 1.0 / out.literal;
  return out;
}

double calibration_factor(const RatioFactor& factor, Calibration calibration) {
  switch (calibration) {
    case Calibration::kNone:
      return 1.0;
    case Calibration::kCorrective:
      return factor.corrective;
    case Calibration::kLiteral:
      return factor.literal;
  }
  return 1.0;
}

PredictionRaster scale(const PredictionRaster& raster, double factor) {
  if (!(factor >= 0.0) || !std::isfinite(factor)) {
    throw ValidationError("scale factor must be finite and non-negative");
  }
  PredictionRaster out = raster;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    if (out.present[i]) out.values[i] *= factor;
  }
  return out;
}

UnitPredictions scale(const UnitPredictions& preds, double factor) {
  if (!(factor >= 0.0) || !std::isfinite(factor)) {
    throw ValidationError("scale factor must be finite and non-negative");
  }
  UnitPredictions out = preds;
  for (auto& [id, v] : out) v *= factor;
  return out;
}

}  // namespace disagg
