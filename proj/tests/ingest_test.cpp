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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "disagg/error.hpp"
#include "support/temp_dir.hpp"

namespace disagg {
namespace {

using testing::TempDir;
using testing::write_file;
using testing::write_floats;

CovariateStack single_band(std::vector<double> values) {
  const int w = static_cast<int>(values.size());
  return CovariateStack(w, 1, {"band"}, std::move(values));
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size());
}

TEST(LoadStack, KeepsManifestOrderAndShape) {
  TempDir dir;
  write_floats(dir / "second.f32", {1, 2, 3, 4, 5, 6});
  write_floats(dir / "first.f32", {10, 20, 30, 40, 50, 60});
  write_file(dir / "m.json", R"({"width": 3, "height": 2, "bands": [
      {"name": "lights", "file": "first.f32"},
      {"name": "roads", "file": "second.f32"}]})");
  auto stack = load_stack(dir / "m.json");
  EXPECT_EQ(stack.values().size(), 12u);
  EXPECT_EQ(stack.bands(), (std::vector<std::string>{"lights", "roads"}));
  EXPECT_FALSE(stack.standardized());
  // Row-major file order: (x=1, y=1) is the fifth value.
  EXPECT_EQ(stack.value(1, 1, 0), 50.0);
  EXPECT_EQ(stack.value(1, 1, 1), 5.0);
  EXPECT_EQ(stack.value(2, 0, 1), 3.0);
}

TEST(LoadStack, WrongByteLengthNamesBand) {
  TempDir dir;
  write_floats(dir / "a.f32", {1, 2, 3, 4});
  write_floats(dir / "b.f32", {1, 2, 3});
  write_file(dir / "m.json", R"({"width": 2, "height": 2, "bands": [
      {"name": "ok", "file": "a.f32"}, {"name": "short", "file": "b.f32"}]})");
  try {
    load_stack(dir / "m.json");
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("'short'"), std::string::npos) << e.what();
  }
}

TEST(LoadStack, NanReportsPixel) {
  TempDir dir;
  write_floats(dir / "a.f32",
               {1, 2, 3, std::numeric_limits<float>::quiet_NaN(), 5, 6});
  write_file(dir / "m.json", R"({"width": 3, "height": 2, "bands": [
      {"name": "elev", "file": "a.f32"}]})");
  try {
    load_stack(dir / "m.json");
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("'elev'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("(0, 1)"), std::string::npos) << msg;
  }
}

TEST(LoadStack, MissingFile) {
  TempDir dir;
  write_file(dir / "m.json", R"({"width": 1, "height": 1, "bands": [
      {"name": "x", "file": "nope.f32"}]})");
  EXPECT_THROW(load_stack(dir / "m.json"), LoadError);
  EXPECT_THROW(load_stack(dir / "absent.json"), LoadError);
}

TEST(Standardize, UnitVarianceZeroMean) {
  auto s = standardize(single_band({1, 2, 3, 4}));
  auto v = s.band(0);
  EXPECT_NEAR(mean_of(v), 0.0, 1e-12);
  EXPECT_NEAR(variance_of(v), 1.0, 1e-12);
  EXPECT_TRUE(s.standardized());
  EXPECT_DOUBLE_EQ(s.stats()[0].mean, 2.5);
  EXPECT_DOUBLE_EQ(s.stats()[0].std, std::sqrt(1.25));
}

TEST(Standardize, ConstantBandMapsToZero) {
  auto s = standardize(single_band({5, 5, 5}));
  EXPECT_EQ(s.band(0), (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(s.stats()[0].mean, 5.0);
  EXPECT_EQ(s.stats()[0].std, 1.0);
  EXPECT_TRUE(s.stats()[0].degenerate);
}

TEST(Standardize, InvertsWithRecordedStats) {
  auto s = standardize(single_band({0, 10}));
  const auto& st = s.stats()[0];
  auto v = s.band(0);
  EXPECT_NEAR(v[0] * st.std + st.mean, 0.0, 1e-4);
  EXPECT_NEAR(v[1] * st.std + st.mean, 10.0, 1e-4 * 10.0);
}

TEST(Standardize, RejectsSecondPass) {
  auto s = standardize(single_band({1, 2}));
  EXPECT_THROW(standardize(s), ValidationError);
}

TEST(Standardize, PropertyMomentsAndRoundTrip) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int w = 2 + static_cast<int>(rng() % 40);
    const int h = 1 + static_cast<int>(rng() % 10);
    const int nb = 1 + static_cast<int>(rng() % 4);
    std::uniform_real_distribution<double> scale(0.01, 1000.0);
    std::uniform_real_distribution<double> shift(-500.0, 500.0);
    std::vector<double> values(static_cast<std::size_t>(w) * h * nb);
    std::vector<double> s(nb), o(nb);
    for (int b = 0; b < nb; ++b) {
      s[b] = scale(rng);
      o[b] = shift(rng);
    }
    std::normal_distribution<double> normal;
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] = o[i % nb] + s[i % nb] * normal(rng);
    }
    std::vector<std::string> names;
    for (int b = 0; b < nb; ++b) names.push_back("b" + std::to_string(b));
    CovariateStack raw(w, h, names, values);
    auto std_stack = standardize(raw);
    for (int b = 0; b < nb; ++b) {
      auto band = std_stack.band(b);
      EXPECT_LT(std::abs(mean_of(band)), 1e-9);
      EXPECT_LT(std::abs(variance_of(band) - 1.0), 1e-6);
      auto original = raw.band(b);
      const auto& st = std_stack.stats()[b];
      for (std::size_t i = 0; i < band.size(); ++i) {
        const double back = band[i] * st.std + st.mean;
        EXPECT_LE(std::abs(back - original[i]),
                  1e-4 * std::max(1.0, std::abs(original[i])));
      }
    }
  }
}

TEST(ApplyStats, IdentityAndArithmetic) {
  auto raw = single_band({2, 4});
  std::vector<BandStats> identity{{0.0, 1.0, false}};
  EXPECT_EQ(apply_stats(raw, identity).band(0), (std::vector<double>{2, 4}));
  std::vector<BandStats> shift{{3.0, 1.0, false}};
  auto s = apply_stats(raw, shift);
  EXPECT_EQ(s.band(0), (std::vector<double>{-1, 1}));
  EXPECT_TRUE(s.standardized());
}

TEST(ApplyStats, BandMismatch) {
  auto raw = single_band({2, 4});
  std::vector<BandStats> two(2);
  EXPECT_THROW(apply_stats(raw, two), ValidationError);
}

TEST(ApplyStats, HeldOutMeanIsNotZero) {
  // Train on the left half of a random band, apply to everything, and compare
  // the held-out mean with the scripted value (mean_test - mean_train) / sd.
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(3.0, 2.0);
  const int w = 40;
  std::vector<double> values(w * 2);
  for (auto& v : values) v = normal(rng);
  CovariateStack raw(w, 2, {"b"}, values);
  std::vector<unsigned char> mask(values.size(), 0);
  std::vector<double> train, test;
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = values[y * w + x];
      if (x < w / 2) {
        mask[y * w + x] = 1;
        train.push_back(v);
      } else {
        test.push_back(v);
      }
    }
  }
  auto stats = compute_stats(raw, mask);
  const double m = mean_of(train);
  const double sd = std::sqrt(variance_of(train));
  EXPECT_NEAR(stats[0].mean, m, 1e-12);
  EXPECT_NEAR(stats[0].std, sd, 1e-12);

  auto applied = apply_stats(raw, stats);
  std::vector<double> held;
  for (int y = 0; y < 2; ++y) {
    for (int x = w / 2; x < w; ++x) held.push_back(applied.value(x, y, 0));
  }
  const double expected = (mean_of(test) - m) / sd;
  EXPECT_NEAR(mean_of(held), expected, 1e-12);
  EXPECT_GT(std::abs(mean_of(held)), 1e-3);
}

std::vector<std::pair<std::string, std::string>> hierarchy(
    std::initializer_list<std::pair<const char*, const char*>> pairs) {
  std::vector<std::pair<std::string, std::string>> out;
  for (auto [u, s] : pairs) out.emplace_back(u, s);
  return out;
}

TEST(ZoneMap, SurfacesOfUnitsAndSuperunits) {
  auto zone = ZoneMap::build(
      4, 1, {{"A", 0, 0, 1.0}, {"A", 1, 0, 0.5}, {"B", 1, 0, 0.5}, {"B", 2, 0, 1.0},
             {"B", 3, 0, 0.5}},
      hierarchy({{"A", "S"}, {"B", "S"}}));
  EXPECT_DOUBLE_EQ(surface(zone, "A"), 1.5);
  EXPECT_DOUBLE_EQ(surface(zone, "B"), 2.0);
  EXPECT_DOUBLE_EQ(superunit_surface(zone, "S"), 3.5);
  EXPECT_THROW(surface(zone, "C"), ValidationError);
  EXPECT_EQ(zone.entry_count(), 5u);
  EXPECT_TRUE(zone.covered(1, 0));
  EXPECT_DOUBLE_EQ(zone.coverage(1, 0), 1.0);
}

TEST(ZoneMap, UnitWithoutPixelsWarns) {
  auto zone = ZoneMap::build(2, 1, {{"A", 0, 0, 1.0}},
                             hierarchy({{"A", "S"}, {"empty", "S"}}));
  EXPECT_EQ(surface(zone, "empty"), 0.0);
  ASSERT_EQ(zone.warnings().size(), 1u);
  EXPECT_NE(zone.warnings()[0].find("empty"), std::string::npos);
  EXPECT_FALSE(zone.covered(1, 0));
}

TEST(ZoneMap, RejectsInvalidEntries) {
  auto h = hierarchy({{"A", "S"}, {"B", "S"}});
  EXPECT_THROW(ZoneMap::build(2, 1, {{"A", 0, 0, 1.0}, {"A", 0, 0, 0.5}}, h),
               ValidationError);
  EXPECT_THROW(ZoneMap::build(2, 1, {{"A", 0, 0, 0.7}, {"B", 0, 0, 0.7}}, h),
               ValidationError);
  EXPECT_THROW(ZoneMap::build(2, 1, {{"A", 0, 0, 0.0}}, h), ValidationError);
  EXPECT_THROW(ZoneMap::build(2, 1, {{"A", 0, 0, 1.5}}, h), ValidationError);
  EXPECT_THROW(ZoneMap::build(2, 1, {{"A", 2, 0, 1.0}}, h), ValidationError);
  EXPECT_THROW(ZoneMap::build(2, 1, {{"C", 0, 0, 1.0}}, h), ValidationError);
  EXPECT_THROW(ZoneMap::build(2, 1, {{"A", 0, 0, 1.0}},
                              hierarchy({{"A", "S"}, {"A", "T"}})),
               ValidationError);
}

TEST(ZoneMap, SurfaceIsAdditiveInFixedOrder) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> w(0.05, 1.0);
  std::vector<ZoneEntry> entries;
  std::vector<std::pair<std::string, std::string>> h;
  for (int u = 0; u < 6; ++u) {
    const std::string id = "u" + std::to_string(u);
    for (int x = 0; x < 10; ++x) entries.push_back({id, x, u, w(rng)});
    h.emplace_back(id, u < 3 ? "S0" : "S1");
  }
  auto zone = ZoneMap::build(10, 6, entries, h);
  for (std::size_t s = 0; s < zone.superunit_count(); ++s) {
    double total = 0.0;
    for (auto unit : zone.units_of(s)) total += zone.unit_surface(unit);
    EXPECT_EQ(zone.superunit_surface(s), total);
  }
}

TEST(Census, SuperunitCounts) {
  auto zone = ZoneMap::build(
      3, 1, {{"A", 0, 0, 1.0}, {"B", 1, 0, 1.0}, {"C", 2, 0, 1.0}},
      hierarchy({{"A", "S"}, {"B", "S"}, {"C", "T"}}));
  CensusTable census({{"A", 100.0}, {"B", 100.0}, {"C", 7.0}});
  EXPECT_EQ(census_of_superunit(census, zone, "S"), 200.0);
  EXPECT_EQ(census_of_superunit(census, zone, "T"), 7.0);
  EXPECT_THROW(census_of_superunit(census, zone, "U"), ValidationError);
  CensusTable zeros({{"A", 0.0}, {"B", 0.0}, {"C", 0.0}});
  EXPECT_EQ(census_of_superunit(zeros, zone, "S"), 0.0);
}

TEST(Census, ValidationAgainstZones) {
  auto zone = ZoneMap::build(2, 1, {{"A", 0, 0, 1.0}, {"B", 1, 0, 1.0}},
                             hierarchy({{"A", "S"}, {"B", "S"}}));
  EXPECT_NO_THROW(validate_census(CensusTable({{"A", 1.0}, {"B", 2.0}}), zone));
  EXPECT_THROW(validate_census(CensusTable({{"A", 1.0}}), zone), ValidationError);
  EXPECT_THROW(
      validate_census(CensusTable({{"A", 1.0}, {"B", 1.0}, {"Z", 1.0}}), zone),
      ValidationError);
  EXPECT_THROW(CensusTable({{"A", -1.0}}), ValidationError);
}

}  // namespace
}  // namespace disagg
