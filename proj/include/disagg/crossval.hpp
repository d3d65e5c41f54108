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

#ifndef DISAGG_CROSSVAL_HPP_
#define DISAGG_CROSSVAL_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "disagg/ingest.hpp"
#include "disagg/metrics.hpp"
#include "disagg/model.hpp"
#include "disagg/train.hpp"

namespace disagg {

// Superunits split into k folds. Fold sizes differ by at most one.
struct FoldAssignment {
  int k = 0;
  std::uint64_t seed = 0;
  std::map<std::string, int> fold_of;
  std::vector<std::vector<std::string>> folds;
};

// Seeded uniform shuffle, then round-robin: position i goes to fold i % k.
FoldAssignment assign_folds(std::span<const std::string> superunit_ids, int k,
                            std::uint64_t seed);

struct CvOptions {
  int k = 10;
  std::uint64_t seed = 0;
  // Standardize once over the whole stack instead of per training fold.
  bool global_stats = false;
  // Optional mean-ratio rescaling fitted on the training units.
  Calibration calibration = Calibration::kNone;
};

struct FoldResult {
  int fold = 0;
  MetricReport unadjusted;
  MetricReport adjusted;  // after superunit dasymetric redistribution
  LinExpParams params;
  std::vector<BandStats> stats;
  std::vector<std::string> train_units;
  std::vector<std::string> test_units;
  double calibration_factor = 1.0;
  // Worst superunit mass mismatch of the adjusted test predictions.
  double max_superunit_mismatch = 0.0;
};

struct CvResult {
  FoldAssignment assignment;
  std::vector<FoldResult> folds;
  MetricReport mean_unadjusted;
  MetricReport mean_adjusted;
};

// Grouped k-fold cross-validation. For each fold: fit on the units of the
// other folds, evaluate on the fold's units, redistribute at superunit level
// and evaluate again. An unstandardized stack is standardized with the
// training-fold statistics (or globally with global_stats); a stack that is
// already standardized is used as is.
CvResult run_cv(const CovariateStack& stack, const ZoneMap& zone,
                const CensusTable& census, const TrainConfig& config,
                const CvOptions& options);

// Per-fold CSV (fold,adjusted,ppe,ppse,rmse) and JSON summary.
std::string cv_csv(const CvResult& result);
std::string cv_summary_json(const CvResult& result);

}  // namespace disagg

#endif  // DISAGG_CROSSVAL_HPP_
