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

#ifndef DISAGG_RENDER_HPP_
#define DISAGG_RENDER_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "disagg/model.hpp"

namespace disagg {

using Rgba = std::array<std::uint8_t, 4>;

// 8-bit RGBA image, row-major.
struct HeatmapImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgba;

  Rgba pixel(int x, int y) const {
    const auto i = (static_cast<std::size_t>(y) * width + x) * 4;
    return {rgba[i], rgba[i + 1], rgba[i + 2], rgba[i + 3]};
  }
};

// Nearest-rank 99th percentile of the present values (0 if none).
double percentile99(const PredictionRaster& raster);

// Colormap intensity in [0, 1] for value v given the anchor v99:
//   log10(1 + min(v, v99) / v99) / log10(2)
// so 0 maps to 0 and anything at or above v99 maps to 1. A zero anchor maps
// everything to 0.
double log_intensity(double value, double v99);

// Sequential colormap, dark purple (0) through teal to yellow (1): piecewise
// linear through nine viridis anchor colours.
Rgba sequential_color(double t);

// Present pixels are opaque colormap colours; absent pixels are fully
// transparent black.
HeatmapImage render_heatmap(const PredictionRaster& raster);

void write_png(const HeatmapImage& image, const std::filesystem::path& path);

}  // namespace disagg

#endif  // DISAGG_RENDER_HPP_
