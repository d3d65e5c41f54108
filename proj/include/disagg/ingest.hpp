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

#ifndef DISAGG_INGEST_HPP_
#define DISAGG_INGEST_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace disagg {

// Per-band standardization statistics. A band with zero variance keeps
// std = 1 and is flagged as degenerate.
struct BandStats {
  double mean = 0.0;
  double std = 1.0;
  bool degenerate = false;

  bool operator==(const BandStats&) const = default;
};

// A width x height grid of covariate vectors. Values are held pixel-major:
// the covariates of pixel (x, y) are contiguous at offset
// ((y * width) + x) * band_count. Immutable once built.
class CovariateStack {
 public:
  CovariateStack() = default;

  // Raw (unstandardized) stack. Throws ValidationError on a size mismatch and
  // LoadError naming the band and pixel on the first non-finite value.
  CovariateStack(int width, int height, std::vector<std::string> bands,
                 std::vector<double> values);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  std::size_t band_count() const { return bands_.size(); }
  const std::vector<std::string>& bands() const { return bands_; }
  std::span<const double> values() const { return values_; }

  std::span<const double> pixel(int x, int y) const {
    return std::span<const double>(values_).subspan(
        pixel_offset(x, y) * bands_.size(), bands_.size());
  }
  double value(int x, int y, std::size_t band) const {
    return values_[pixel_offset(x, y) * bands_.size() + band];
  }

  bool standardized() const { return standardized_; }
  // Empty unless standardized.
  const std::vector<BandStats>& stats() const { return stats_; }

  // Copy of one band in row-major order (y outer, x inner).
  std::vector<double> band(std::size_t index) const;

 private:
  friend CovariateStack apply_stats(const CovariateStack&,
                                    std::span<const BandStats>);

  std::size_t pixel_offset(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::string> bands_;
  std::vector<double> values_;
  bool standardized_ = false;
  std::vector<BandStats> stats_;
};

// Loads a stack manifest: {"width", "height", "bands": [{"name", "file"}]}.
// Band files are raw little-endian float32, row-major, resolved relative to
// the manifest directory.
CovariateStack load_stack(const std::filesystem::path& manifest_path);

// Population mean and standard deviation of each band. With a mask, only
// pixels whose mask entry is non-zero contribute.
std::vector<BandStats> compute_stats(
    const CovariateStack& stack,
    std::span<const unsigned char> pixel_mask = {});

// (value - mean) / std per band. Requires an unstandardized stack whose band
// count matches the stats.
CovariateStack apply_stats(const CovariateStack& stack,
                           std::span<const BandStats> stats);

// apply_stats(stack, compute_stats(stack)).
CovariateStack standardize(const CovariateStack& stack);

struct PixelWeight {
  int x = 0;
  int y = 0;
  double weight = 0.0;
};

// One row of the zone CSV.
struct ZoneEntry {
  std::string unit_id;
  int x = 0;
  int y = 0;
  double weight = 0.0;
};

// Pixel membership of units and the unit -> superunit hierarchy.
//
// Units are indexed densely in order of first appearance (zone entries
// first, then hierarchy-only units); superunits in order of first appearance
// in the hierarchy.
class ZoneMap {
 public:
  ZoneMap() = default;

  // Validates: weights in (0, 1], coordinates on the grid, no duplicate
  // (unit, pixel) pair, per-pixel weight sum <= 1 + 1e-9, and a superunit for
  // every unit. Units that appear only in the hierarchy get no pixels and a
  // warning.
  static ZoneMap build(int width, int height, std::vector<ZoneEntry> entries,
                       std::span<const std::pair<std::string, std::string>>
                           unit_to_superunit);

  int width() const { return width_; }
  int height() const { return height_; }

  std::size_t unit_count() const { return unit_ids_.size(); }
  std::size_t superunit_count() const { return superunit_ids_.size(); }
  const std::vector<std::string>& unit_ids() const { return unit_ids_; }
  const std::vector<std::string>& superunit_ids() const {
    return superunit_ids_;
  }
  const std::string& unit_id(std::size_t unit) const { return unit_ids_[unit]; }
  const std::string& superunit_id(std::size_t superunit) const {
    return superunit_ids_[superunit];
  }

  std::optional<std::size_t> find_unit(std::string_view id) const;
  std::optional<std::size_t> find_superunit(std::string_view id) const;
  // Throw ValidationError for unknown ids.
  std::size_t unit_index(std::string_view id) const;
  std::size_t superunit_index(std::string_view id) const;

  std::size_t superunit_of(std::size_t unit) const {
    return unit_superunit_[unit];
  }
  std::span<const std::size_t> units_of(std::size_t superunit) const {
    return superunit_units_[superunit];
  }
  std::span<const PixelWeight> pixels_of(std::size_t unit) const {
    return unit_pixels_[unit];
  }

  double unit_surface(std::size_t unit) const;
  double superunit_surface(std::size_t superunit) const;

  // Pixels with at least one membership.
  bool covered(int x, int y) const {
    return coverage_[static_cast<std::size_t>(y) * width_ + x] > 0.0;
  }
  // Sum of membership weights of a pixel.
  double coverage(int x, int y) const {
    return coverage_[static_cast<std::size_t>(y) * width_ + x];
  }
  // Row-major 0/1 mask of covered pixels.
  std::vector<unsigned char> coverage_mask() const;

  // Entries in input order.
  const std::vector<ZoneEntry>& entries() const { return entries_; }
  std::size_t entry_count() const { return entries_.size(); }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::string> unit_ids_;
  std::vector<std::string> superunit_ids_;
  std::unordered_map<std::string, std::size_t> unit_lookup_;
  std::unordered_map<std::string, std::size_t> superunit_lookup_;
  std::vector<std::size_t> unit_superunit_;
  std::vector<std::vector<std::size_t>> superunit_units_;
  std::vector<std::vector<PixelWeight>> unit_pixels_;
  std::vector<double> coverage_;
  std::vector<ZoneEntry> entries_;
  std::vector<std::string> warnings_;
};

// surface(u) = sum of pixel weights of the unit.
double surface(const ZoneMap& zone, std::string_view unit_id);
// surface(s) = sum of surface(u) over the units of s, in unit order.
double superunit_surface(const ZoneMap& zone, std::string_view superunit_id);

// unit id -> value, with heterogeneous lookup.
using UnitValues = std::map<std::string, double, std::less<>>;

// Population count per unit id.
class CensusTable {
 public:
  CensusTable() = default;
  // Throws ValidationError on negative or non-finite counts.
  explicit CensusTable(UnitValues counts);

  const UnitValues& counts() const { return counts_; }
  std::size_t size() const { return counts_.size(); }
  bool contains(std::string_view unit_id) const;
  // Throws ValidationError for unknown units.
  double at(std::string_view unit_id) const;

 private:
  UnitValues counts_;
};

// Checks that the census and the zone map name the same set of units.
void validate_census(const CensusTable& census, const ZoneMap& zone);

// Census counts ordered by unit index.
std::vector<double> census_by_unit(const CensusTable& census,
                                   const ZoneMap& zone);

double census_of_superunit(const CensusTable& census, const ZoneMap& zone,
                           std::string_view superunit_id);

}  // namespace disagg

#endif  // DISAGG_INGEST_HPP_
