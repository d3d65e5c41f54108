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

#ifndef DISAGG_IO_HPP_
#define DISAGG_IO_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "disagg/ingest.hpp"
#include "disagg/metrics.hpp"
#include "disagg/model.hpp"

namespace disagg {

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

// Reads a comma-separated file whose first line must equal `header`
// (field names, comma-joined). Blank lines are skipped. Throws LoadError
// naming the path and line on malformed rows.
std::vector<std::vector<std::string>> read_csv(
    const std::filesystem::path& path, const std::string& header);

// `unit_id,x,y,weight` plus optional `unit_id,superunit_id`. Without a
// hierarchy file every unit is its own superunit.
ZoneMap load_zone_map(const std::filesystem::path& zones_path,
                      const std::optional<std::filesystem::path>& hierarchy_path,
                      int width, int height);
void save_zone_map(const ZoneMap& zone, const std::filesystem::path& zones_path,
                   const std::filesystem::path& hierarchy_path);

// `unit_id,population`.
CensusTable load_census(const std::filesystem::path& path);
void save_census(const CensusTable& census, const std::filesystem::path& path);

// `unit_id,prediction`.
UnitPredictions load_unit_predictions(const std::filesystem::path& path);
void save_unit_predictions(const UnitPredictions& preds,
                           const std::filesystem::path& path);

// Writes values as float32 band files next to the manifest, one file per
// band named `<manifest stem>_<band>.f32`.
void save_stack(const CovariateStack& stack,
                const std::filesystem::path& manifest_path);

// Same manifest format with a single band named "population". Absent pixels
// are stored as NaN.
void save_raster(const PredictionRaster& raster,
                 const std::filesystem::path& manifest_path);
PredictionRaster load_raster(const std::filesystem::path& manifest_path);

// Trained model file: {"bands", "a", "b", "c", "stats": [{"mean", "std"}]}.
struct TrainedModel {
  std::vector<std::string> bands;
  LinExpParams params;
  std::vector<BandStats> stats;
};
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

// Flat JSON object with the report fields.
std::string report_json(const MetricReport& report);
void save_report(const MetricReport& report, const std::filesystem::path& path);

// Creates parent directories as needed and writes `text` verbatim.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace disagg

#endif  // DISAGG_IO_HPP_
