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

#include "disagg/metrics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "disagg/error.hpp"

namespace disagg {
namespace {

const std::vector<std::string> kAB{"A", "B"};

TEST(Rmse, DasymetricTableValues) {
  CensusTable census({{"A", 100.0}, {"B", 100.0}});
  EXPECT_DOUBLE_EQ(rmse({{"A", 120.0}, {"B", 40.0}}, census, kAB),
                   std::sqrt(2000.0));
  EXPECT_DOUBLE_EQ(rmse({{"A", 150.0}, {"B", 50.0}}, census, kAB), 50.0);
  EXPECT_EQ(rmse({{"A", 100.0}, {"B", 100.0}}, census, kAB), 0.0);
  EXPECT_THROW(rmse({}, census, {}), ValidationError);
}

TEST(Ppe, DasymetricTableValues) {
  CensusTable census({{"A", 100.0}, {"B", 100.0}});
  UnitValues surfaces{{"A", 1.0}, {"B", 1.0}};
  EXPECT_DOUBLE_EQ(ppe({{"A", 120.0}, {"B", 40.0}}, census, surfaces, kAB), 0.40);
  EXPECT_DOUBLE_EQ(ppe({{"A", 150.0}, {"B", 50.0}}, census, surfaces, kAB), 0.50);
}

TEST(Ppe, SurfaceWeighted) {
  CensusTable census({{"A", 50.0}, {"B", 200.0}});
  UnitValues surfaces{{"A", 2.0}, {"B", 1.0}};
  // 0.21666666666666667 (derived_values.py).
  EXPECT_NEAR(ppe({{"A", 60.0}, {"B", 150.0}}, census, surfaces, kAB),
              0.21666666666666667, 1e-15);
}

TEST(Ppse, Values) {
  CensusTable census({{"A", 100.0}, {"B", 100.0}});
  UnitValues surfaces{{"A", 1.0}, {"B", 1.0}};
  EXPECT_DOUBLE_EQ(ppse({{"A", 120.0}, {"B", 40.0}}, census, surfaces, kAB), 20.0);
  EXPECT_EQ(ppse({{"A", 100.0}, {"B", 100.0}}, census, surfaces, kAB), 0.0);
  const std::vector<std::string> a{"A"};
  for (double s : {0.01, 1.0, 37.5}) {
    EXPECT_DOUBLE_EQ(ppse({{"A", 130.0}}, census, {{"A", s}}, a), 9.0);
  }
}

TEST(Evaluate, ReportsAndExclusion) {
  CensusTable census({{"A", 100.0}, {"B", 100.0}, {"Z", 0.0}});
  UnitValues surfaces{{"A", 1.0}, {"B", 1.0}, {"Z", 1.0}};
  auto r = evaluate({{"A", 120.0}, {"B", 40.0}}, census, surfaces, kAB, false);
  EXPECT_DOUBLE_EQ(r.ppe, 0.40);
  EXPECT_DOUBLE_EQ(r.rmse, std::sqrt(2000.0));
  EXPECT_DOUBLE_EQ(r.ppse, 20.0);
  EXPECT_FALSE(r.adjusted);
  EXPECT_EQ(r.n_units, 2u);

  auto adj = evaluate({{"A", 150.0}, {"B", 50.0}}, census, surfaces, kAB, true);
  EXPECT_DOUBLE_EQ(adj.ppe, 0.50);
  EXPECT_DOUBLE_EQ(adj.rmse, 50.0);
  EXPECT_TRUE(adj.adjusted);

  const std::vector<std::string> abz{"A", "B", "Z"};
  auto with_zero = evaluate({{"A", 120.0}, {"B", 40.0}, {"Z", 30.0}}, census,
                            surfaces, abz, false);
  EXPECT_EQ(with_zero.excluded_units, 1u);
  EXPECT_EQ(with_zero.n_units, 2u);
  EXPECT_DOUBLE_EQ(with_zero.ppe, 0.40);
  EXPECT_DOUBLE_EQ(with_zero.rmse, std::sqrt((400.0 + 3600.0 + 900.0) / 3.0));

  const std::vector<std::string> z{"Z"};
  EXPECT_THROW(evaluate({{"Z", 1.0}}, census, surfaces, z, false),
               ValidationError);
  EXPECT_THROW(evaluate({{"A", 1.0}}, census, surfaces, kAB, false),
               ValidationError);
}

std::vector<UnitRecord> random_records(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> pop(1.0, 5000.0);
  std::uniform_real_distribution<double> area(0.1, 50.0);
  std::vector<UnitRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({pop(rng), pop(rng), area(rng)});
  }
  return out;
}

TEST(MetricProperties, SurfaceScalingAndPermutation) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    auto recs = random_records(rng, 1 + rng() % 30);
    const double lambda = std::exp(std::uniform_real_distribution<double>(-5, 5)(rng));
    auto scaled = recs;
    for (auto& r : scaled) r.surface *= lambda;
    EXPECT_NEAR(ppe(scaled), ppe(recs), 1e-12 * ppe(recs));
    EXPECT_NEAR(ppse(scaled), ppse(recs), 1e-12 * ppse(recs));
    EXPECT_EQ(rmse(scaled), rmse(recs));

    auto shuffled = recs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_NEAR(ppe(shuffled), ppe(recs), 1e-12 * ppe(recs));
    EXPECT_NEAR(rmse(shuffled), rmse(recs), 1e-12 * rmse(recs));
  }
}

TEST(MetricProperties, PpseZeroIffExact) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    auto recs = random_records(rng, 1 + rng() % 10);
    EXPECT_GT(ppse(recs), 0.0);
    for (auto& r : recs) r.predicted = r.census;
    EXPECT_EQ(ppse(recs), 0.0);
    EXPECT_EQ(ppe(recs), 0.0);
  }
}

TEST(MetricProperties, EqualRmseDifferentPpe) {
  // Adjusted dasymetric example: errors {+50, -50}, RMSE 50, PPE 0.5.
  const std::vector<UnitRecord> table{{150, 100, 1}, {50, 100, 1}};
  // Same absolute errors on far larger units: RMSE unchanged, PPE tiny.
  const std::vector<UnitRecord> big{{10050, 10000, 1}, {9950, 10000, 1}};
  EXPECT_EQ(rmse(table), rmse(big));
  EXPECT_GT(ppe(table), ppe(big));
}

TEST(MeanReport, Componentwise) {
  MetricReport a{0.1, 0.2, 3.0, 5, 1, true};
  MetricReport b{0.3, 0.4, 5.0, 7, 0, true};
  std::vector<MetricReport> v{a, b};
  auto m = mean_report(v);
  EXPECT_DOUBLE_EQ(m.ppe, 0.2);
  EXPECT_DOUBLE_EQ(m.ppse, 0.3);
  EXPECT_DOUBLE_EQ(m.rmse, 4.0);
  EXPECT_EQ(m.n_units, 12u);
  EXPECT_TRUE(m.adjusted);
}

TEST(ParseMetric, Names) {
  EXPECT_EQ(parse_metric("PPE"), Metric::kPpe);
  EXPECT_EQ(parse_metric("rmse"), Metric::kRmse);
  EXPECT_THROW(parse_metric("mae"), ValidationError);
}

}  // namespace
}  // namespace disagg
