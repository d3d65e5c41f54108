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

#include "disagg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "disagg/error.hpp"
#include "disagg/io.hpp"
#include "json.hpp"

namespace disagg {

void SynthConfig::validate() const {
  if (width < 1 || height < 1) throw ValidationError("grid must be non-empty");
  if (n_bands < 1) throw ValidationError("need at least one band");
  if (n_superunits < 1 || n_superunits > n_units ||
      static_cast<long long>(n_units) >
          static_cast<long long>(width) * height) {
    throw ValidationError(
        "need 1 <= superunits <= units <= width * height");
  }
  if (true_a && true_a->size() != static_cast<std::size_t>(n_bands)) {
    throw ValidationError("true_a must have one weight per band");
  }
  if (!(noise_sd >= 0.0)) throw ValidationError("noise_sd must be >= 0");
}

namespace {

// Explicit transforms of mt19937_64 output so worlds are identical across
// standard library implementations.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }

  double normal() {  // Box-Muller, one value per call
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 rng_;
};

std::string padded(char prefix, int index, int count) {
  const auto digits = std::to_string(std::max(count - 1, 0)).size();
  auto s = std::to_string(index);
  return std::string(1, prefix) + std::string(digits - s.size(), '0') + s;
}

struct Tile {
  int x0, x1, y0, y1;  // half-open
  int strip;
};

std::vector<Tile> tile_grid(int width, int height, int n_units) {
  int strips = static_cast<int>(std::lround(
      std::sqrt(static_cast<double>(n_units) * height / width)));
  strips = std::clamp(strips, 1, std::min(height, n_units));
  std::vector<Tile> tiles;
  for (int s = 0; s < strips; ++s) {
    const int y0 = s * height / strips;
    const int y1 = (s + 1) * height / strips;
    const int in_strip = n_units / strips + (s < n_units % strips ? 1 : 0);
    if (in_strip > width) {
      throw ValidationError("cannot tile " + std::to_string(n_units) +
                            " units on a " + std::to_string(width) + "x" +
                            std::to_string(height) + " grid");
    }
    for (int c = 0; c < in_strip; ++c) {
      tiles.push_back(Tile{c * width / in_strip, (c + 1) * width / in_strip,
                           y0, y1, s});
    }
  }
  return tiles;
}

}  // namespace

SyntheticWorld generate(const SynthConfig& config) {
  config.validate();
  Sampler sampler(config.seed);

  SyntheticWorld world;
  const auto nb = static_cast<std::size_t>(config.n_bands);
  if (config.true_a) {
    world.truth.a = *config.true_a;
  } else {
    for (std::size_t b = 0; b < nb; ++b) {
      world.truth.a.push_back(sampler.uniform() - 0.5);
    }
  }
  world.truth.b = config.true_b.value_or(1.0);
  world.truth.c = config.true_c.value_or(0.0);

  const std::size_t pixels =
      static_cast<std::size_t>(config.width) * config.height;
  std::vector<double> values(pixels * nb);
  for (auto& v : values) v = sampler.normal();
  std::vector<std::string> bands;
  for (std::size_t b = 0; b < nb; ++b) bands.push_back("cov" + std::to_string(b));
  world.stack = standardize(
      CovariateStack(config.width, config.height, std::move(bands),
                     std::move(values)));

  const auto tiles = tile_grid(config.width, config.height, config.n_units);
  std::vector<std::string> unit_ids;
  std::vector<std::pair<std::string, std::string>> hierarchy;
  for (int u = 0; u < config.n_units; ++u) {
    unit_ids.push_back(padded('u', u, config.n_units));
    const int s = static_cast<int>(static_cast<long long>(u) *
                                   config.n_superunits / config.n_units);
    hierarchy.emplace_back(unit_ids.back(),
                           padded('s', s, config.n_superunits));
  }

  auto edge_weight = [&](int x, int y) {
    if (!config.fractional_border) return 1.0;
    const bool edge = x == 0 || y == 0 || x == config.width - 1 ||
                      y == config.height - 1;
    return edge ? 0.5 : 1.0;
  };
  std::vector<ZoneEntry> entries;
  for (std::size_t u = 0; u < tiles.size(); ++u) {
    const auto& t = tiles[u];
    const bool has_left =
        config.fractional_border && u > 0 && tiles[u - 1].strip == t.strip;
    const bool has_right = config.fractional_border && u + 1 < tiles.size() &&
                           tiles[u + 1].strip == t.strip;
    for (int y = t.y0; y < t.y1; ++y) {
      if (has_left) {
        // Share of the left neighbour's last column.
        const int x = tiles[u - 1].x1 - 1;
        entries.push_back(ZoneEntry{unit_ids[u], x, y, 0.5 * edge_weight(x, y)});
      }
      for (int x = t.x0; x < t.x1; ++x) {
        double w = edge_weight(x, y);
        if (has_right && x == t.x1 - 1) w *= 0.5;
        entries.push_back(ZoneEntry{unit_ids[u], x, y, w});
      }
    }
  }
  world.zone = ZoneMap::build(config.width, config.height, std::move(entries),
                              hierarchy);

  std::vector<std::size_t> all(world.zone.unit_count());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto clean = predict_unit_values(world.truth, world.stack, world.zone, all);
  UnitValues counts;
  for (std::size_t u = 0; u < all.size(); ++u) {
    double count = clean[u];
    if (config.noise_sd > 0.0) {
      count *= std::exp(config.noise_sd * sampler.normal());
    }
    counts[world.zone.unit_id(u)] = count;
  }
  world.census = CensusTable(std::move(counts));
  return world;
}

void write_world(const SyntheticWorld& world, const SynthConfig& config,
                 const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_stack(world.stack, dir / "stack.json");
  save_zone_map(world.zone, dir / "zones.csv", dir / "hierarchy.csv");
  save_census(world.census, dir / "census.csv");
  nlohmann::json truth;
  truth["bands"] = world.stack.bands();
  truth["a"] = world.truth.a;
  truth["b"] = world.truth.b;
  truth["c"] = world.truth.c;
  truth["seed"] = config.seed;
  truth["noise_sd"] = config.noise_sd;
  truth["fractional_border"] = config.fractional_border;
  truth["width"] = config.width;
  truth["height"] = config.height;
  truth["units"] = config.n_units;
  truth["superunits"] = config.n_superunits;
  write_text(dir / "truth.json", truth.dump(2) + "\n");
}

}  // namespace disagg
