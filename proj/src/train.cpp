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

#include "disagg/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "disagg/error.hpp"
#include "disagg/parallel.hpp"

namespace disagg {

void TrainConfig::validate() const {
  if (!(lr_a > 0.0 && lr_b > 0.0 && lr_c > 0.0)) {
    throw ValidationError("learning rates must be positive");
  }
  if (iterations < 1) throw ValidationError("iterations must be at least 1");
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) ||
      !(adam_beta2 > 0.0 && adam_beta2 < 1.0)) {
    throw ValidationError("Adam betas must lie in (0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ValidationError("Adam epsilon must be positive");
  if (!std::isfinite(init_b) || !std::isfinite(init_c)) {
    throw ValidationError("initial b and c must be finite");
  }
}

TrainingProblem::TrainingProblem(const CovariateStack& stack,
                                 const ZoneMap& zone, const CensusTable& census,
                                 std::span<const std::string> unit_ids,
                                 Metric loss)
    : stack_(stack), zone_(zone), loss_(loss) {
  if (zone.width() != stack.width() || zone.height() != stack.height()) {
    throw ValidationError("zone map grid does not match the stack grid");
  }
  if (unit_ids.empty()) throw ValidationError("no training units");
  units_.reserve(unit_ids.size());
  for (const auto& id : unit_ids) {
    const std::size_t unit = zone.unit_index(id);
    units_.push_back(unit);
    census_.push_back(census.at(id));
    surface_.push_back(zone.unit_surface(unit));
  }
}

std::vector<UnitRecord> TrainingProblem::records(
    std::span<const double> predicted) const {
  std::vector<UnitRecord> out(units_.size());
  for (std::size_t i = 0; i < units_.size(); ++i) {
    out[i] = UnitRecord{predicted[i], census_[i], surface_[i]};
  }
  return out;
}

double TrainingProblem::objective(const LinExpParams& params) const {
  auto predicted = predict_unit_values(params, stack_, zone_, units_);
  return metric_value(loss_, records(predicted));
}

Gradient TrainingProblem::gradient(const LinExpParams& params) const {
  Gradient grad;
  objective_and_gradient(params, grad);
  return grad;
}

double TrainingProblem::objective_and_gradient(const LinExpParams& params,
                                               Gradient& grad) const {
  const std::size_t nb = stack_.band_count();
  if (params.a.size() != nb) {
    throw ValidationError("model has " + std::to_string(params.a.size()) +
                          " weights but the stack has " + std::to_string(nb) +
                          " bands");
  }
  // Per unit: predicted count and its partials [d/da..., d/db, d/dc].
  const std::size_t width = nb + 2;
  std::vector<double> predicted(units_.size(), 0.0);
  std::vector<double> jacobian(units_.size() * width, 0.0);
  parallel_for(
      units_.size(),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          double total = 0.0;
          double* row = &jacobian[i * width];
          for (const auto& p : zone_.pixels_of(units_[i])) {
            auto x = stack_.pixel(p.x, p.y);
            // Mirrors linexp_pixel so the loss matches objective() bit for
            // bit.
            double z = params.b;
            for (std::size_t k = 0; k < nb; ++k) z += params.a[k] * x[k];
            if (!(z <= kMaxExponent)) {
              std::ostringstream msg;
              msg << "LinExp exponent " << z << " exceeds " << kMaxExponent
                  << " at pixel (" << p.x << ", " << p.y << ")";
              throw OverflowError(msg.str());
            }
            const double e = std::exp(z);
            const double density = std::max(0.0, e + params.c);
            total += p.weight * density;
            if (e + params.c > 0.0) {
              const double we = p.weight * e;
              for (std::size_t k = 0; k < nb; ++k) row[k] += we * x[k];
              row[nb] += we;
              row[nb + 1] += p.weight;
            }
          }
          predicted[i] = total;
        }
      },
      4);

  auto recs = records(predicted);
  const double loss = metric_value(loss_, recs);

  // dL/dP for each unit.
  std::vector<double> outer(units_.size(), 0.0);
  switch (loss_) {
    case Metric::kPpe:
    case Metric::kPpse: {
      double total_surface = 0.0;
      for (const auto& r : recs) {
        if (r.census != 0.0) total_surface += r.surface;
      }
      for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto& r = recs[i];
        if (r.census == 0.0) continue;
        const double diff = r.predicted - r.census;
        const double local =
            loss_ == Metric::kPpe
                ? static_cast<double>((diff > 0.0) - (diff < 0.0))
                : 2.0 * diff;
        outer[i] = r.surface * local / (r.census * total_surface);
      }
      break;
    }
    case Metric::kRmse: {
      if (loss > 0.0) {
        const double n = static_cast<double>(recs.size());
        for (std::size_t i = 0; i < recs.size(); ++i) {
          outer[i] = (recs[i].predicted - recs[i].census) / (n * loss);
        }
      }
      break;
    }
  }

  grad.a.assign(nb, 0.0);
  grad.b = 0.0;
  grad.c = 0.0;
  for (std::size_t i = 0; i < units_.size(); ++i) {
    if (outer[i] == 0.0) continue;
    const double* row = &jacobian[i * width];
    for (std::size_t k = 0; k < nb; ++k) grad.a[k] += outer[i] * row[k];
    grad.b += outer[i] * row[nb];
    grad.c += outer[i] * row[nb + 1];
  }
  return loss;
}

double objective(const LinExpParams& params, const CovariateStack& stack,
                 const ZoneMap& zone, const CensusTable& census,
                 std::span<const std::string> unit_ids, Metric loss) {
  return TrainingProblem(stack, zone, census, unit_ids, loss).objective(params);
}

Gradient gradient(const LinExpParams& params, const CovariateStack& stack,
                  const ZoneMap& zone, const CensusTable& census,
                  std::span<const std::string> unit_ids, Metric loss) {
  return TrainingProblem(stack, zone, census, unit_ids, loss).gradient(params);
}

AdamState AdamState::start(LinExpParams params) {
  AdamState state;
  state.m_a.assign(params.a.size(), 0.0);
  state.v_a.assign(params.a.size(), 0.0);
  state.params = std::move(params);
  return state;
}

AdamState adam_step(AdamState state, const Gradient& grad,
                    const TrainConfig& config) {
  const std::size_t nb = state.params.a.size();
  if (grad.a.size() != nb || state.m_a.size() != nb || state.v_a.size() != nb) {
    throw ValidationError("gradient and optimizer state shapes differ");
  }
  bool finite = std::isfinite(grad.b) && std::isfinite(grad.c);
  for (double g : grad.a) finite = finite && std::isfinite(g);
  if (!finite) throw ValidationError("non-finite gradient");

  state.step += 1;
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, state.step);
  const double c2 = 1.0 - std::pow(b2, state.step);
  auto update = [&](double& theta, double& m, double& v, double g, double lr) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double m_hat = m / c1;
    const double v_hat = v / c2;
    theta -= lr * m_hat / (std::sqrt(v_hat) + config.adam_eps);
  };
  for (std::size_t k = 0; k < nb; ++k) {
    update(state.params.a[k], state.m_a[k], state.v_a[k], grad.a[k],
           config.lr_a);
  }
  update(state.params.b, state.m_b, state.v_b, grad.b, config.lr_b);
  update(state.params.c, state.m_c, state.v_c, grad.c, config.lr_c);
  return state;
}

namespace {

constexpr std::size_t kPlateauWindow = 50;
constexpr double kPlateauTolerance = 1e-9;

}  // namespace

FitResult fit(const CovariateStack& stack, const ZoneMap& zone,
              const CensusTable& census, std::span<const std::string> unit_ids,
              const TrainConfig& config) {
  config.validate();
  if (std::none_of(unit_ids.begin(), unit_ids.end(),
                   [&](const std::string& id) { return census.at(id) > 0.0; })) {
    throw ValidationError("training needs a unit with positive census");
  }
  TrainingProblem problem(stack, zone, census, unit_ids, config.loss);

  LinExpParams init;
  init.a.assign(stack.band_count(), 0.0);
  init.b = config.init_b;
  init.c = config.init_c;
  AdamState state = AdamState::start(init);

  FitResult result;
  auto& trace = result.trace;
  trace.losses.reserve(static_cast<std::size_t>(config.iterations) + 1);
  trace.best_loss = std::numeric_limits<double>::infinity();

  auto record = [&](double loss, int iteration) {
    if (!std::isfinite(loss)) {
      throw TrainError("non-finite loss at iteration " +
                           std::to_string(iteration),
                       iteration);
    }
    trace.losses.push_back(loss);
    if (loss < trace.best_loss) {
      trace.best_loss = loss;
      trace.best_iteration = static_cast<std::size_t>(iteration);
      result.params = state.params;
    }
    const std::size_t n = trace.losses.size();
    if (!trace.converged_early && n > kPlateauWindow) {
      const double before = trace.losses[n - 1 - kPlateauWindow];
      if (std::abs(loss - before) <= kPlateauTolerance * std::abs(before)) {
        trace.converged_early = true;
        trace.converged_at = iteration;
      }
    }
  };

  Gradient grad;
  for (int t = 0; t <= config.iterations; ++t) {
    double loss = 0.0;
    try {
      loss = t < config.iterations
                 ? problem.objective_and_gradient(state.params, grad)
                 : problem.objective(state.params);
    } catch (const OverflowError& e) {
      throw TrainError(std::string(e.what()) + " at iteration " +
                           std::to_string(t),
                       t);
    }
    record(loss, t);
    if (t == config.iterations) break;
    if (config.freeze_a) std::fill(grad.a.begin(), grad.a.end(), 0.0);
    try {
      state = adam_step(std::move(state), grad, config);
    } catch (const ValidationError& e) {
      throw TrainError(std::string(e.what()) + " at iteration " +
                           std::to_string(t),
                       t);
    }
  }
  trace.final_params = state.params;
  return result;
}

}  // namespace disagg
