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

#include <gtest/gtest.h>

#include <cmath>

#include "disagg/error.hpp"
#include "disagg/train.hpp"
#include "support/temp_dir.hpp"

namespace disagg {
namespace {

TEST(Synth, ConstantDensityCensus) {
  SynthConfig sc;
  sc.width = 10;
  sc.height = 1;
  sc.n_bands = 2;
  sc.n_units = 1;
  sc.n_superunits = 1;
  sc.true_a = std::vector<double>{0.0, 0.0};
  sc.true_b = std::log(5.0);
  auto world = generate(sc);
  ASSERT_EQ(world.zone.unit_count(), 1u);
  EXPECT_NEAR(world.census.at(world.zone.unit_ids()[0]), 50.0, 1e-12);
}

TEST(Synth, ShapeAndStandardization) {
  auto world = generate(SynthConfig{});
  EXPECT_EQ(world.stack.width(), 64);
  EXPECT_EQ(world.stack.band_count(), 5u);
  EXPECT_TRUE(world.stack.standardized());
  EXPECT_EQ(world.zone.unit_count(), 40u);
  EXPECT_EQ(world.zone.superunit_count(), 8u);
  for (std::size_t s = 0; s < 8; ++s) EXPECT_EQ(world.zone.units_of(s).size(), 5u);
  for (std::size_t b = 0; b < 5; ++b) {
    auto band = world.stack.band(b);
    double mean = 0.0;
    for (double v : band) mean += v;
    mean /= static_cast<double>(band.size());
    EXPECT_LT(std::abs(mean), 1e-9);
  }
  for (double a : world.truth.a) {
    EXPECT_GE(a, -0.5);
    EXPECT_LE(a, 0.5);
  }
}

TEST(Synth, ZeroLossAtTruthWithoutNoise) {
  auto world = generate(SynthConfig{});
  for (Metric loss : {Metric::kPpe, Metric::kPpse, Metric::kRmse}) {
    EXPECT_LE(objective(world.truth, world.stack, world.zone, world.census,
                        world.zone.unit_ids(), loss),
              1e-12);
  }
}

TEST(Synth, NoiseMovesCensus) {
  SynthConfig sc;
  sc.noise_sd = 0.1;
  auto noisy = generate(sc);
  auto clean = generate(SynthConfig{});
  EXPECT_GT(objective(noisy.truth, noisy.stack, noisy.zone, noisy.census,
                      noisy.zone.unit_ids(), Metric::kPpe),
            0.0);
  EXPECT_EQ(noisy.stack.values()[0], clean.stack.values()[0]);
}

TEST(Synth, FractionalBorderWeights) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SynthConfig sc;
    sc.width = 17 + static_cast<int>(seed);
    sc.height = 13;
    sc.n_units = 12;
    sc.n_superunits = 3;
    sc.seed = seed;
    sc.fractional_border = true;
    auto world = generate(sc);
    for (int y = 0; y < sc.height; ++y) {
      for (int x = 0; x < sc.width; ++x) {
        const bool edge =
            x == 0 || y == 0 || x == sc.width - 1 || y == sc.height - 1;
        EXPECT_NEAR(world.zone.coverage(x, y), edge ? 0.5 : 1.0, 1e-12);
      }
    }
    EXPECT_LE(objective(world.truth, world.stack, world.zone, world.census,
                        world.zone.unit_ids(), Metric::kRmse),
              1e-9);
  }
}

TEST(Synth, Deterministic) {
  SynthConfig sc;
  sc.noise_sd = 0.2;
  sc.seed = 12;
  auto w1 = generate(sc);
  auto w2 = generate(sc);
  EXPECT_EQ(w1.truth, w2.truth);
  EXPECT_EQ(w1.census.counts(), w2.census.counts());
  EXPECT_TRUE(std::equal(w1.stack.values().begin(), w1.stack.values().end(),
                         w2.stack.values().begin()));
  sc.seed = 13;
  EXPECT_NE(generate(sc).truth, w1.truth);

  testing::TempDir d1, d2;
  write_world(w1, sc, d1.path());
  write_world(w2, sc, d2.path());
  for (const auto& entry : std::filesystem::directory_iterator(d1.path())) {
    const auto name = entry.path().filename();
    EXPECT_EQ(testing::read_file(entry.path()), testing::read_file(d2.path() / name))
        << name;
  }
}

TEST(Synth, RejectsImpossibleLayouts) {
  SynthConfig sc;
  sc.n_units = 10;
  sc.n_superunits = 11;
  EXPECT_THROW(generate(sc), ValidationError);
  sc = {};
  sc.true_a = std::vector<double>{1.0};
  EXPECT_THROW(generate(sc), ValidationError);
  sc = {};
  sc.width = 2;
  sc.height = 2;
  sc.n_units = 40;
  EXPECT_THROW(generate(sc), ValidationError);
}

}  // namespace
}  // namespace disagg
