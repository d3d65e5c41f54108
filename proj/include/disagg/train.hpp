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

#ifndef DISAGG_TRAIN_HPP_
#define DISAGG_TRAIN_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "disagg/ingest.hpp"
#include "disagg/metrics.hpp"
#include "disagg/model.hpp"

namespace disagg {

struct TrainConfig {
  Metric loss = Metric::kPpe;
  // {a, b} share 0.01; c uses 0.001.
  double lr_a = 0.01;
  double lr_b = 0.01;
  double lr_c = 0.001;
  int iterations = 1000;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double init_b = -4.0;
  double init_c = 0.0;
  std::uint64_t seed = 0;
  // Reductions always run in a fixed order; the flag is carried for
  // reporting.
  bool deterministic = true;
  // Keep a = 0 (constant-density ablation).
  bool freeze_a = false;

  // Throws ValidationError on out-of-range fields.
  void validate() const;
};

struct Gradient {
  std::vector<double> a;
  double b = 0.0;
  double c = 0.0;
};

// Loss surface of one training set. Binds the stack, zone map, census and
// the training units once so repeated evaluations skip the lookups.
class TrainingProblem {
 public:
  TrainingProblem(const CovariateStack& stack, const ZoneMap& zone,
                  const CensusTable& census,
                  std::span<const std::string> unit_ids, Metric loss);

  double objective(const LinExpParams& params) const;
  // Analytic subgradient. Kinks (clamp boundary, |r| at 0, RMSE at 0) take
  // the zero subgradient.
  Gradient gradient(const LinExpParams& params) const;
  // Both at once; the loss equals objective(params) exactly.
  double objective_and_gradient(const LinExpParams& params,
                                Gradient& grad) const;

  Metric loss() const { return loss_; }
  std::size_t band_count() const { return stack_.band_count(); }
  std::span<const std::size_t> units() const { return units_; }

 private:
  std::vector<UnitRecord> records(std::span<const double> predicted) const;

  const CovariateStack& stack_;
  const ZoneMap& zone_;
  Metric loss_;
  std::vector<std::size_t> units_;
  std::vector<double> census_;
  std::vector<double> surface_;
};

// Free-function forms.
double objective(const LinExpParams& params, const CovariateStack& stack,
                 const ZoneMap& zone, const CensusTable& census,
                 std::span<const std::string> unit_ids, Metric loss);
Gradient gradient(const LinExpParams& params, const CovariateStack& stack,
                  const ZoneMap& zone, const CensusTable& census,
                  std::span<const std::string> unit_ids, Metric loss);

// Parameters plus Adam moments for each parameter group.
struct AdamState {
  LinExpParams params;
  std::vector<double> m_a, v_a;
  double m_b = 0.0, v_b = 0.0;
  double m_c = 0.0, v_c = 0.0;
  int step = 0;

  static AdamState start(LinExpParams params);
};

// One bias-corrected Adam update with per-group learning rates. Throws
// ValidationError on a non-finite gradient or a shape mismatch.
AdamState adam_step(AdamState state, const Gradient& grad,
                    const TrainConfig& config);

struct TrainTrace {
  // losses[0] is the loss at initialization, losses[t] after t updates.
  std::vector<double> losses;
  LinExpParams final_params;  // last iterate
  std::size_t best_iteration = 0;
  double best_loss = 0.0;
  // Plateau: relative loss change < 1e-9 across a 50-iteration window.
  bool converged_early = false;
  int converged_at = -1;
};

struct FitResult {
  LinExpParams params;  // best-loss parameters seen
  TrainTrace trace;
};

// Full-batch Adam from a = 0, b = init_b, c = init_c. Requires at least one
// unit with positive census. Throws TrainError with the iteration on
// overflow or a non-finite loss.
FitResult fit(const CovariateStack& stack, const ZoneMap& zone,
              const CensusTable& census, std::span<const std::string> unit_ids,
              const TrainConfig& config);

}  // namespace disagg

#endif  // DISAGG_TRAIN_HPP_
