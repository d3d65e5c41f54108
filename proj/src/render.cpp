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

#include "disagg/render.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "disagg/error.hpp"

namespace disagg {

namespace {

// Viridis sampled at t = 0, 1/8, ..., 1.
constexpr std::array<std::array<double, 3>, 9> kAnchors = {{
    {68, 1, 84},
    {71, 44, 122},
    {59, 81, 139},
    {44, 113, 142},
    {33, 144, 141},
    {39, 173, 129},
    {92, 200, 99},
    {170, 220, 50},
    {253, 231, 37},
}};

}  // namespace

double percentile99(const PredictionRaster& raster) {
  std::vector<double> values;
  for (std::size_t i = 0; i < raster.values.size(); ++i) {
    if (raster.present[i]) values.push_back(raster.values[i]);
  }
  if (values.empty()) return 0.0;
  const auto rank = static_cast<std::size_t>(
      std::ceil(0.99 * static_cast<double>(values.size())));
  const auto k = std::max<std::size_t>(rank, 1) - 1;
  std::nth_element(values.begin(), values.begin() + static_cast<long>(k),
                   values.end());
  return values[k];
}

double log_intensity(double value, double v99) {
  if (!(v99 > 0.0)) return 0.0;
  const double clipped = std::clamp(value, 0.0, v99);
  return std::log10(1.0 + clipped / v99) / std::log10(2.0);
}

Rgba sequential_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * static_cast<double>(kAnchors.size() - 1);
  const auto lo = std::min(static_cast<std::size_t>(pos), kAnchors.size() - 2);
  const double frac = pos - static_cast<double>(lo);
  Rgba out{0, 0, 0, 255};
  for (int c = 0; c < 3; ++c) {
    const double v =
        kAnchors[lo][c] + frac * (kAnchors[lo + 1][c] - kAnchors[lo][c]);
    out[c] = static_cast<std::uint8_t>(std::lround(v));
  }
  return out;
}

HeatmapImage render_heatmap(const PredictionRaster& raster) {
  HeatmapImage image;
  image.width = raster.width;
  image.height = raster.height;
  image.rgba.assign(raster.values.size() * 4, 0);
  const double v99 = percentile99(raster);
  for (std::size_t i = 0; i < raster.values.size(); ++i) {
    if (!raster.present[i]) continue;
    const auto color = sequential_color(log_intensity(raster.values[i], v99));
    std::copy(color.begin(), color.end(), image.rgba.begin() + i * 4);
  }
  return image;
}

void write_png(const HeatmapImage& image, const std::filesystem::path& path) {
  if (image.width <= 0 || image.height <= 0) {
    throw ValidationError("cannot write an empty image");
  }
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"),
                                             &std::fclose);
  if (!file) throw LoadError("cannot write " + path.string());

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("libpng: cannot create write struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("libpng: cannot create info struct");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("libpng: failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 8,
               PNG_COLOR_TYPE_RGB_ALPHA, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height; ++y) {
    png_write_row(png, image.rgba.data() + static_cast<std::size_t>(y) *
                                               image.width * 4);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace disagg
