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

#include "disagg/ingest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "disagg/error.hpp"
#include "json.hpp"

namespace disagg {

namespace {

static_assert(std::endian::native == std::endian::little,
              "band files are read as native little-endian float32");

std::string pixel_name(std::size_t index, int width) {
  std::ostringstream out;
  out << "(" << index % static_cast<std::size_t>(width) << ", "
      << index / static_cast<std::size_t>(width) << ")";
  return out.str();
}

std::vector<float> read_band_file(const std::filesystem::path& path,
                                  const std::string& band,
                                  std::size_t expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw LoadError("band '" + band + "': cannot open " + path.string());
  }
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (bytes.size() != expected * sizeof(float)) {
    throw LoadError("band '" + band + "': " + path.string() + " holds " +
                    std::to_string(bytes.size()) + " bytes, expected " +
                    std::to_string(expected * sizeof(float)));
  }
  std::vector<float> values(expected);
  std::memcpy(values.data(), bytes.data(), bytes.size());
  return values;
}

}  // namespace

CovariateStack::CovariateStack(int width, int height,
                               std::vector<std::string> bands,
                               std::vector<double> values)
    : width_(width),
      height_(height),
      bands_(std::move(bands)),
      values_(std::move(values)) {
  if (width <= 0 || height <= 0) {
    throw ValidationError("stack dimensions must be positive");
  }
  if (values_.size() != pixel_count() * bands_.size()) {
    throw ValidationError("stack holds " + std::to_string(values_.size()) +
                          " values, expected " +
                          std::to_string(pixel_count() * bands_.size()));
  }
  std::set<std::string> seen;
  for (const auto& name : bands_) {
    if (!seen.insert(name).second) {
      throw ValidationError("duplicate band name '" + name + "'");
    }
  }
  const std::size_t nb = bands_.size();
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw LoadError("band '" + bands_[i % nb] + "': non-finite value at pixel " +
                      pixel_name(i / nb, width_));
    }
  }
}

std::vector<double> CovariateStack::band(std::size_t index) const {
  std::vector<double> out(pixel_count());
  const std::size_t nb = bands_.size();
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = values_[p * nb + index];
  return out;
}

CovariateStack load_stack(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw LoadError("cannot open stack manifest " + manifest_path.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("malformed stack manifest " + manifest_path.string() + ": " +
                    e.what());
  }
  int width = 0;
  int height = 0;
  std::vector<std::string> names;
  std::vector<std::filesystem::path> files;
  try {
    width = manifest.at("width").get<int>();
    height = manifest.at("height").get<int>();
    for (const auto& band : manifest.at("bands")) {
      names.push_back(band.at("name").get<std::string>());
      files.emplace_back(band.at("file").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("stack manifest " + manifest_path.string() + ": " + e.what());
  }
  if (width <= 0 || height <= 0) {
    throw LoadError("stack manifest " + manifest_path.string() +
                    ": dimensions must be positive");
  }

  const auto base = manifest_path.parent_path();
  const std::size_t pixels =
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t nb = names.size();
  std::vector<double> values(pixels * nb);
  for (std::size_t b = 0; b < nb; ++b) {
    auto path = files[b].is_absolute() ? files[b] : base / files[b];
    auto raw = read_band_file(path, names[b], pixels);
    for (std::size_t p = 0; p < pixels; ++p) {
      if (!std::isfinite(raw[p])) {
        throw LoadError("band '" + names[b] + "': non-finite value at pixel " +
                        pixel_name(p, width));
      }
      values[p * nb + b] = raw[p];
    }
  }
  return CovariateStack(width, height, std::move(names), std::move(values));
}

std::vector<BandStats> compute_stats(const CovariateStack& stack,
                                     std::span<const unsigned char> pixel_mask) {
  const std::size_t nb = stack.band_count();
  const std::size_t pixels = stack.pixel_count();
  if (!pixel_mask.empty() && pixel_mask.size() != pixels) {
    throw ValidationError("pixel mask size does not match the stack");
  }
  auto values = stack.values();
  std::vector<BandStats> stats(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t p = 0; p < pixels; ++p) {
      if (!pixel_mask.empty() && !pixel_mask[p]) continue;
      sum += values[p * nb + b];
      ++n;
    }
    if (n == 0) throw ValidationError("no pixels selected for band statistics");
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t p = 0; p < pixels; ++p) {
      if (!pixel_mask.empty() && !pixel_mask[p]) continue;
      const double d = values[p * nb + b] - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    if (sd > 0.0) {
      stats[b] = BandStats{mean, sd, false};
    } else {
      stats[b] = BandStats{mean, 1.0, true};
    }
  }
  return stats;
}

CovariateStack apply_stats(const CovariateStack& stack,
                           std::span<const BandStats> stats) {
  if (stack.standardized()) {
    throw ValidationError("stack is already standardized");
  }
  const std::size_t nb = stack.band_count();
  if (stats.size() != nb) {
    throw ValidationError("statistics cover " + std::to_string(stats.size()) +
                          " bands, stack has " + std::to_string(nb));
  }
  for (const auto& s : stats) {
    if (!(s.std > 0.0) || !std::isfinite(s.mean) || !std::isfinite(s.std)) {
      throw ValidationError("band statistics must be finite with std > 0");
    }
  }
  CovariateStack out = stack;
  for (std::size_t i = 0; i < out.values_.size(); ++i) {
    const auto& s = stats[i % nb];
    out.values_[i] = s.degenerate ? 0.0 : (out.values_[i] - s.mean) / s.std;
  }
  out.standardized_ = true;
  out.stats_.assign(stats.begin(), stats.end());
  return out;
}

CovariateStack standardize(const CovariateStack& stack) {
  if (stack.standardized()) {
    throw ValidationError("stack is already standardized");
  }
  auto stats = compute_stats(stack);
  return apply_stats(stack, stats);
}

ZoneMap ZoneMap::build(
    int width, int height, std::vector<ZoneEntry> entries,
    std::span<const std::pair<std::string, std::string>> unit_to_superunit) {
  if (width <= 0 || height <= 0) {
    throw ValidationError("zone map dimensions must be positive");
  }
  ZoneMap zone;
  zone.width_ = width;
  zone.height_ = height;
  const std::size_t pixels =
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  zone.coverage_.assign(pixels, 0.0);

  auto intern_unit = [&zone](const std::string& id) {
    auto [it, inserted] = zone.unit_lookup_.try_emplace(id, zone.unit_ids_.size());
    if (inserted) {
      zone.unit_ids_.push_back(id);
      zone.unit_pixels_.emplace_back();
    }
    return it->second;
  };

  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : entries) {
    if (e.x < 0 || e.x >= width || e.y < 0 || e.y >= height) {
      throw ValidationError("unit '" + e.unit_id + "': pixel (" +
                            std::to_string(e.x) + ", " + std::to_string(e.y) +
                            ") lies outside the grid");
    }
    if (!(e.weight > 0.0 && e.weight <= 1.0)) {
      throw ValidationError("unit '" + e.unit_id + "': weight " +
                            std::to_string(e.weight) + " at pixel (" +
                            std::to_string(e.x) + ", " + std::to_string(e.y) +
                            ") is outside (0, 1]");
    }
    const std::size_t unit = intern_unit(e.unit_id);
    const std::size_t pixel = static_cast<std::size_t>(e.y) * width + e.x;
    if (!seen.emplace(unit, pixel).second) {
      throw ValidationError("unit '" + e.unit_id + "': pixel (" +
                            std::to_string(e.x) + ", " + std::to_string(e.y) +
                            ") listed twice");
    }
    zone.unit_pixels_[unit].push_back(PixelWeight{e.x, e.y, e.weight});
    zone.coverage_[pixel] += e.weight;
    if (zone.coverage_[pixel] > 1.0 + 1e-9) {
      throw ValidationError("pixel (" + std::to_string(e.x) + ", " +
                            std::to_string(e.y) +
                            ") is over-allocated: weights sum to " +
                            std::to_string(zone.coverage_[pixel]));
    }
  }

  zone.unit_superunit_.assign(zone.unit_ids_.size(), SIZE_MAX);
  for (const auto& [unit_id, superunit_id] : unit_to_superunit) {
    const bool known = zone.unit_lookup_.contains(unit_id);
    const std::size_t unit = intern_unit(unit_id);
    if (!known) {
      zone.unit_superunit_.push_back(SIZE_MAX);
      zone.warnings_.push_back("unit '" + unit_id + "' has no pixels");
    }
    auto [it, inserted] = zone.superunit_lookup_.try_emplace(
        superunit_id, zone.superunit_ids_.size());
    if (inserted) {
      zone.superunit_ids_.push_back(superunit_id);
      zone.superunit_units_.emplace_back();
    }
    if (zone.unit_superunit_[unit] != SIZE_MAX) {
      if (zone.unit_superunit_[unit] == it->second) continue;
      throw ValidationError("unit '" + unit_id +
                            "' is assigned to more than one superunit");
    }
    zone.unit_superunit_[unit] = it->second;
    zone.superunit_units_[it->second].push_back(unit);
  }
  for (std::size_t u = 0; u < zone.unit_ids_.size(); ++u) {
    if (zone.unit_superunit_[u] == SIZE_MAX) {
      throw ValidationError("unit '" + zone.unit_ids_[u] +
                            "' has no superunit assignment");
    }
  }
  // Keep member lists in unit order so superunit sums are order-stable.
  for (auto& members : zone.superunit_units_) {
    std::sort(members.begin(), members.end());
  }
  zone.entries_ = std::move(entries);
  return zone;
}

std::optional<std::size_t> ZoneMap::find_unit(std::string_view id) const {
  auto it = unit_lookup_.find(std::string(id));
  if (it == unit_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> ZoneMap::find_superunit(std::string_view id) const {
  auto it = superunit_lookup_.find(std::string(id));
  if (it == superunit_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t ZoneMap::unit_index(std::string_view id) const {
  auto found = find_unit(id);
  if (!found) throw ValidationError("unknown unit '" + std::string(id) + "'");
  return *found;
}

std::size_t ZoneMap::superunit_index(std::string_view id) const {
  auto found = find_superunit(id);
  if (!found) {
    throw ValidationError("unknown superunit '" + std::string(id) + "'");
  }
  return *found;
}

double ZoneMap::unit_surface(std::size_t unit) const {
  double total = 0.0;
  for (const auto& p : unit_pixels_[unit]) total += p.weight;
  return total;
}

double ZoneMap::superunit_surface(std::size_t superunit) const {
  double total = 0.0;
  for (std::size_t unit : superunit_units_[superunit]) total += unit_surface(unit);
  return total;
}

std::vector<unsigned char> ZoneMap::coverage_mask() const {
  std::vector<unsigned char> mask(coverage_.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = coverage_[i] > 0.0;
  return mask;
}

double surface(const ZoneMap& zone, std::string_view unit_id) {
  return zone.unit_surface(zone.unit_index(unit_id));
}

double superunit_surface(const ZoneMap& zone, std::string_view superunit_id) {
  return zone.superunit_surface(zone.superunit_index(superunit_id));
}

CensusTable::CensusTable(UnitValues counts) : counts_(std::move(counts)) {
  for (const auto& [unit, count] : counts_) {
    if (!std::isfinite(count) || count < 0.0) {
      throw ValidationError("unit '" + unit +
                            "': census count must be finite and non-negative");
    }
  }
}

bool CensusTable::contains(std::string_view unit_id) const {
  return counts_.find(unit_id) != counts_.end();
}

double CensusTable::at(std::string_view unit_id) const {
  auto it = counts_.find(unit_id);
  if (it == counts_.end()) {
    throw ValidationError("no census count for unit '" + std::string(unit_id) +
                          "'");
  }
  return it->second;
}

void validate_census(const CensusTable& census, const ZoneMap& zone) {
  for (const auto& id : zone.unit_ids()) {
    if (!census.contains(id)) {
      throw ValidationError("no census count for unit '" + id + "'");
    }
  }
  for (const auto& [id, count] : census.counts()) {
    if (!zone.find_unit(id)) {
      throw ValidationError("census unit '" + id + "' is not in the zone map");
    }
  }
}

std::vector<double> census_by_unit(const CensusTable& census,
                                   const ZoneMap& zone) {
  std::vector<double> out;
  out.reserve(zone.unit_count());
  for (const auto& id : zone.unit_ids()) out.push_back(census.at(id));
  return out;
}

double census_of_superunit(const CensusTable& census, const ZoneMap& zone,
                           std::string_view superunit_id) {
  const std::size_t s = zone.superunit_index(superunit_id);
  double total = 0.0;
  for (std::size_t unit : zone.units_of(s)) total += census.at(zone.unit_id(unit));
  return total;
}

}  // namespace disagg
