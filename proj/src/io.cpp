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

#include "disagg/io.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "disagg/error.hpp"
#include "json.hpp"

namespace disagg {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& text, const std::filesystem::path& path,
               std::size_t line) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw LoadError(path.string() + ":" + std::to_string(line) +
                    ": cannot parse number '" + text + "'");
  }
  return value;
}

std::ofstream open_out(const std::filesystem::path& path,
                       std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw LoadError("cannot write " + path.string());
  return out;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw LoadError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_float_band(const std::filesystem::path& path,
                      const std::vector<float>& values) {
  auto out = open_out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(float)));
  if (!out) throw LoadError("cannot write " + path.string());
}

void write_manifest(const std::filesystem::path& manifest_path, int width,
                    int height, const std::vector<std::string>& names,
                    const std::vector<std::string>& files) {
  json manifest;
  manifest["width"] = width;
  manifest["height"] = height;
  manifest["bands"] = json::array();
  for (std::size_t b = 0; b < names.size(); ++b) {
    manifest["bands"].push_back({{"name", names[b]}, {"file", files[b]}});
  }
  write_text(manifest_path, manifest.dump(2) + "\n");
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error("cannot format number");
  return std::string(buf, ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path, std::ios::binary);
  out << text;
  if (!out) throw LoadError("cannot write " + path.string());
}

std::vector<std::vector<std::string>> read_csv(
    const std::filesystem::path& path, const std::string& header) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  const auto expected = split(header);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (!have_header) {
      if (fields != expected) {
        throw LoadError(path.string() + ": expected header '" + header + "'");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != expected.size()) {
      throw LoadError(path.string() + ":" + std::to_string(line_no) +
                      ": expected " + std::to_string(expected.size()) +
                      " fields");
    }
    rows.push_back(std::move(fields));
  }
  if (!have_header) {
    throw LoadError(path.string() + ": missing header '" + header + "'");
  }
  return rows;
}

ZoneMap load_zone_map(const std::filesystem::path& zones_path,
                      const std::optional<std::filesystem::path>& hierarchy_path,
                      int width, int height) {
  auto rows = read_csv(zones_path, "unit_id,x,y,weight");
  std::vector<ZoneEntry> entries;
  entries.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    entries.push_back(ZoneEntry{r[0], parse_number<int>(r[1], zones_path, i + 2),
                                parse_number<int>(r[2], zones_path, i + 2),
                                parse_number<double>(r[3], zones_path, i + 2)});
  }
  std::vector<std::pair<std::string, std::string>> hierarchy;
  if (hierarchy_path) {
    for (auto& r : read_csv(*hierarchy_path, "unit_id,superunit_id")) {
      hierarchy.emplace_back(std::move(r[0]), std::move(r[1]));
    }
  } else {
    for (const auto& e : entries) hierarchy.emplace_back(e.unit_id, e.unit_id);
  }
  try {
    return ZoneMap::build(width, height, std::move(entries), hierarchy);
  } catch (const ValidationError& e) {
    throw LoadError(zones_path.string() + ": " + e.what());
  }
}

void save_zone_map(const ZoneMap& zone, const std::filesystem::path& zones_path,
                   const std::filesystem::path& hierarchy_path) {
  std::string zones = "unit_id,x,y,weight\n";
  for (const auto& e : zone.entries()) {
    zones += e.unit_id + "," + std::to_string(e.x) + "," + std::to_string(e.y) +
             "," + format_double(e.weight) + "\n";
  }
  write_text(zones_path, zones);
  std::string hierarchy = "unit_id,superunit_id\n";
  for (std::size_t u = 0; u < zone.unit_count(); ++u) {
    hierarchy += zone.unit_id(u) + "," +
                 zone.superunit_id(zone.superunit_of(u)) + "\n";
  }
  write_text(hierarchy_path, hierarchy);
}

CensusTable load_census(const std::filesystem::path& path) {
  UnitValues counts;
  auto rows = read_csv(path, "unit_id,population");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!counts.emplace(rows[i][0], parse_number<double>(rows[i][1], path, i + 2))
             .second) {
      throw LoadError(path.string() + ": duplicate unit '" + rows[i][0] + "'");
    }
  }
  try {
    return CensusTable(std::move(counts));
  } catch (const ValidationError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

void save_census(const CensusTable& census, const std::filesystem::path& path) {
  std::string text = "unit_id,population\n";
  for (const auto& [id, count] : census.counts()) {
    text += id + "," + format_double(count) + "\n";
  }
  write_text(path, text);
}

UnitPredictions load_unit_predictions(const std::filesystem::path& path) {
  UnitPredictions preds;
  auto rows = read_csv(path, "unit_id,prediction");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double v = parse_number<double>(rows[i][1], path, i + 2);
    if (!std::isfinite(v) || v < 0.0) {
      throw LoadError(path.string() + ": prediction for '" + rows[i][0] +
                      "' must be finite and non-negative");
    }
    if (!preds.emplace(rows[i][0], v).second) {
      throw LoadError(path.string() + ": duplicate unit '" + rows[i][0] + "'");
    }
  }
  return preds;
}

void save_unit_predictions(const UnitPredictions& preds,
                           const std::filesystem::path& path) {
  std::string text = "unit_id,prediction\n";
  for (const auto& [id, v] : preds) text += id + "," + format_double(v) + "\n";
  write_text(path, text);
}

void save_stack(const CovariateStack& stack,
                const std::filesystem::path& manifest_path) {
  const auto stem = manifest_path.stem().string();
  std::vector<std::string> files;
  for (std::size_t b = 0; b < stack.band_count(); ++b) {
    const auto values = stack.band(b);
    std::vector<float> raw(values.begin(), values.end());
    files.push_back(stem + "_" + stack.bands()[b] + ".f32");
    write_float_band(manifest_path.parent_path() / files.back(), raw);
  }
  write_manifest(manifest_path, stack.width(), stack.height(), stack.bands(),
                 files);
}

void save_raster(const PredictionRaster& raster,
                 const std::filesystem::path& manifest_path) {
  std::vector<float> raw(raster.values.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    raw[i] = raster.present[i] ? static_cast<float>(raster.values[i])
                               : std::numeric_limits<float>::quiet_NaN();
  }
  const auto file = manifest_path.stem().string() + "_population.f32";
  write_float_band(manifest_path.parent_path() / file, raw);
  write_manifest(manifest_path, raster.width, raster.height, {"population"},
                 {file});
}

PredictionRaster load_raster(const std::filesystem::path& manifest_path) {
  const auto manifest = read_json(manifest_path);
  int width = 0;
  int height = 0;
  std::filesystem::path file;
  try {
    width = manifest.at("width").get<int>();
    height = manifest.at("height").get<int>();
    const auto& bands = manifest.at("bands");
    if (bands.size() != 1) {
      throw LoadError(manifest_path.string() +
                      ": a prediction raster has exactly one band");
    }
    file = bands[0].at("file").get<std::string>();
  } catch (const json::exception& e) {
    throw LoadError(manifest_path.string() + ": " + e.what());
  }
  if (width <= 0 || height <= 0) {
    throw LoadError(manifest_path.string() + ": dimensions must be positive");
  }
  if (!file.is_absolute()) file = manifest_path.parent_path() / file;
  std::ifstream in(file, std::ios::binary);
  if (!in) throw LoadError("cannot open " + file.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  PredictionRaster raster(width, height);
  if (bytes.size() != raster.values.size() * sizeof(float)) {
    throw LoadError(file.string() + ": wrong byte length for a " +
                    std::to_string(width) + "x" + std::to_string(height) +
                    " raster");
  }
  std::vector<float> raw(raster.values.size());
  std::memcpy(raw.data(), bytes.data(), bytes.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (std::isnan(raw[i])) continue;
    if (!std::isfinite(raw[i]) || raw[i] < 0.0f) {
      throw LoadError(file.string() + ": invalid value at pixel (" +
                      std::to_string(i % width) + ", " +
                      std::to_string(i / width) + ")");
    }
    raster.values[i] = raw[i];
    raster.present[i] = 1;
  }
  return raster;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  json j;
  j["bands"] = model.bands;
  j["a"] = model.params.a;
  j["b"] = model.params.b;
  j["c"] = model.params.c;
  j["stats"] = json::array();
  for (const auto& s : model.stats) {
    j["stats"].push_back(
        {{"mean", s.mean}, {"std", s.std}, {"degenerate", s.degenerate}});
  }
  write_text(path, j.dump(2) + "\n");
}

TrainedModel load_model(const std::filesystem::path& path) {
  const auto j = read_json(path);
  TrainedModel model;
  try {
    model.bands = j.at("bands").get<std::vector<std::string>>();
    model.params.a = j.at("a").get<std::vector<double>>();
    model.params.b = j.at("b").get<double>();
    model.params.c = j.at("c").get<double>();
    for (const auto& s : j.at("stats")) {
      model.stats.push_back(BandStats{s.at("mean").get<double>(),
                                      s.at("std").get<double>(),
                                      s.value("degenerate", false)});
    }
  } catch (const json::exception& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
  if (model.params.a.size() != model.bands.size() ||
      model.stats.size() != model.bands.size()) {
    throw LoadError(path.string() + ": bands, a and stats differ in length");
  }
  return model;
}

std::string report_json(const MetricReport& report) {
  json j;
  j["adjusted"] = report.adjusted;
  j["ppe"] = report.ppe;
  j["ppse"] = report.ppse;
  j["rmse"] = report.rmse;
  j["n_units"] = report.n_units;
  j["excluded_units"] = report.excluded_units;
  return j.dump(2);
}

void save_report(const MetricReport& report, const std::filesystem::path& path) {
  write_text(path, report_json(report) + "\n");
}

}  // namespace disagg
