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

#ifndef DISAGG_SYNTH_HPP_
#define DISAGG_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "disagg/ingest.hpp"
#include "disagg/model.hpp"

namespace disagg {

struct SynthConfig {
  int width = 64;
  int height = 64;
  int n_bands = 5;
  int n_units = 40;
  int n_superunits = 8;
  std::uint64_t seed = 0;
  // Drawn uniformly from [-0.5, 0.5] per band when absent.
  std::optional<std::vector<double>> true_a;
  std::optional<double> true_b;  // default 1.0
  std::optional<double> true_c;  // default 0.0
  // Standard deviation of log-normal multiplicative noise on unit counts.
  double noise_sd = 0.0;
  // Outer-edge pixels get weight 0.5 and pixels on vertical unit boundaries
  // are split 0.5 / 0.5 between the two neighbouring units.
  bool fractional_border = false;

  void validate() const;
};

struct SyntheticWorld {
  CovariateStack stack;  // standardized
  ZoneMap zone;
  CensusTable census;
  LinExpParams truth;
};

// Covariates are i.i.d. standard normal per band, then standardized exactly.
// Units are contiguous rectangles: the grid is cut into horizontal strips and
// each strip into column ranges. Consecutive units form superunits.
// census(u) = sum p_w * f_truth(D[p]), times exp(noise_sd * N(0, 1)).
SyntheticWorld generate(const SynthConfig& config);

// stack.json + band files, zones.csv, hierarchy.csv, census.csv, truth.json.
// Band files hold the standardized values.
void write_world(const SyntheticWorld& world, const SynthConfig& config,
                 const std::filesystem::path& dir);

}  // namespace disagg

#endif  // DISAGG_SYNTH_HPP_
