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

#ifndef DISAGG_MODEL_HPP_
#define DISAGG_MODEL_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "disagg/ingest.hpp"

namespace disagg {

// Exponents above this are reported as overflow instead of producing Inf.
inline constexpr double kMaxExponent = 700.0;

// f(x) = max(0, exp(a.x + b) + c).
struct LinExpParams {
  std::vector<double> a;
  double b = 0.0;
  double c = 0.0;

  bool operator==(const LinExpParams&) const = default;
};

// Density of one pixel. Throws ValidationError on a dimension mismatch and
// OverflowError when a.x + b exceeds kMaxExponent.
double linexp_pixel(const LinExpParams& params,
                    std::span<const double> covariates);

// Per-pixel values on a grid. Pixels outside every unit are absent.
// Values are densities (people per full pixel) for model output and masses
// for areal weighting; see each producer.
struct PredictionRaster {
  int width = 0;
  int height = 0;
  std::vector<double> values;           // row-major, y outer
  std::vector<unsigned char> present;   // 1 where a value is defined

  PredictionRaster() = default;
  PredictionRaster(int w, int h)
      : width(w),
        height(h),
        values(static_cast<std::size_t>(w) * h, 0.0),
        present(static_cast<std::size_t>(w) * h, 0) {}

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width + x;
  }
  std::optional<double> at(int x, int y) const {
    const auto i = index(x, y);
    if (!present[i]) return std::nullopt;
    return values[i];
  }
  void set(int x, int y, double v) {
    const auto i = index(x, y);
    values[i] = v;
    present[i] = 1;
  }
};

// Predicted population per unit id.
using UnitPredictions = UnitValues;

// LinExp density at every covered pixel.
PredictionRaster predict_raster(const LinExpParams& params,
                                const CovariateStack& stack,
                                const ZoneMap& zone);

// sum over pixels(u) of p_w * f(D[p]) for each requested unit.
UnitPredictions predict_units(const LinExpParams& params,
                              const CovariateStack& stack, const ZoneMap& zone,
                              std::span<const std::string> unit_ids);

// Same quantity for unit indices, in the given order. The single source of
// unit predictions used by training and evaluation.
std::vector<double> predict_unit_values(const LinExpParams& params,
                                        const CovariateStack& stack,
                                        const ZoneMap& zone,
                                        std::span<const std::size_t> units);

// sum over pixels(u) of p_w * raster[p]. Throws if a unit pixel is absent.
UnitPredictions aggregate_units(const PredictionRaster& raster,
                                const ZoneMap& zone,
                                std::span<const std::string> unit_ids);

// Areal-weighting baseline. Each pixel receives the mass
// sum over covering units of p_w * census(u) / surface(u).
PredictionRaster areal_weighting(const CensusTable& census,
                                 const ZoneMap& zone);

// Mean ratio of predicted to census counts over units with census > 0.
struct RatioFactor {
  double literal = 1.0;     // mean(pred / census)
  double corrective = 1.0;  // 1 / literal
  std::size_t used_units = 0;
  std::size_t excluded_units = 0;  // census == 0
};

enum class Calibration { kNone, kCorrective, kLiteral };

RatioFactor mean_ratio_factor(const UnitPredictions& preds,
                              const CensusTable& census);

// Factor that `calibration` selects from `factor` (1 for kNone).
double calibration_factor(const RatioFactor& factor, Calibration calibration);

PredictionRaster scale(const PredictionRaster& raster, double factor);
UnitPredictions scale(const UnitPredictions& preds, double factor);

}  // namespace disagg

#endif  // DISAGG_MODEL_HPP_
