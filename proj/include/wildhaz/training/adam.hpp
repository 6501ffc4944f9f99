/*
 * Copyright 2026 The wildhaz Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Full-batch Adam with best-validation checkpointing.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "wildhaz/errors.hpp"

namespace wildhaz {

struct TrainConfig {
  int epochs = 3500;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double validation_fraction = 0.2;

  void validate() const {
    if (epochs < 1) throw ValidationError("epochs must be at least 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
      throw ValidationError("learning rate must be finite and nonnegative");
    }
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
      throw ValidationError("Adam decay rates must lie in (0,1)");
    }
    if (!(epsilon > 0.0)) throw ValidationError("Adam epsilon must be positive");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
      throw ValidationError("validation fraction must lie in [0,1)");
    }
  }

  nlohmann::json to_json() const {
    return {{"epochs", epochs}, {"learning_rate", learning_rate}, {"beta1", beta1},
            {"beta2", beta2},   {"epsilon", epsilon},             {"validation_fraction", validation_fraction}};
  }
};

struct FitResult {
  Eigen::VectorXd params;  ///< snapshot at the checkpoint epoch
  std::vector<double> train_loss;
  std::vector<double> validation_loss;  ///< empty when checkpointing on training loss
  int best_epoch = 0;                   ///< 1-based
  double best_loss = std::numeric_limits<double>::infinity();
  bool checkpoint_on_validation = true;
};

/// Loss (and gradient) on the training cells.
using TrainObjective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;
/// Loss on the validation cells; empty to checkpoint on the training loss.
using ValidationObjective = std::function<double(const Eigen::VectorXd&)>;

/// At every epoch the training loss/gradient and the validation loss are
/// evaluated at the current parameters, the best-so-far snapshot is
/// updated, and then one Adam step is taken.
inline FitResult adam_fit(Eigen::VectorXd params, const TrainConfig& cfg, const TrainObjective& train,
                          const ValidationObjective& validate = {}) {
  cfg.validate();
  FitResult fit;
  fit.checkpoint_on_validation = static_cast<bool>(validate);
  const auto n = params.size();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(n), v = Eigen::VectorXd::Zero(n), grad(n);
  double b1t = 1.0, b2t = 1.0;
  fit.train_loss.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    grad.setZero();
    const double tl = train(params, grad);
    if (!std::isfinite(tl) || !grad.allFinite()) {
      throw NumericalError("non-finite training loss or gradient at epoch " + std::to_string(epoch));
    }
    fit.train_loss.push_back(tl);
    double score = tl;
    if (validate) {
      score = validate(params);
      if (!std::isfinite(score)) throw NumericalError("non-finite validation loss at epoch " + std::to_string(epoch));
      fit.validation_loss.push_back(score);
    }
    if (score < fit.best_loss) {
      fit.best_loss = score;
      fit.best_epoch = epoch;
      fit.params = params;
    }
    b1t *= cfg.beta1;
    b2t *= cfg.beta2;
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseAbs2();
    const double step = cfg.learning_rate / (1.0 - b1t);
    params.array() -= step * m.array() / ((v.array() / (1.0 - b2t)).sqrt() + cfg.epsilon);
  }
  return fit;
}

}  // namespace wildhaz
