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

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "wildhaz/errors.hpp"
#include "wildhaz/panel.hpp"

namespace wildhaz {

enum class Subset { train, validation, all };

/// Random per-cell train/validation labels over the observed cells.
struct SplitAssignment {
  static constexpr int kMissing = -1;
  static constexpr int kTrain = 0;
  static constexpr int kValidation = 1;

  Eigen::ArrayXXi label;  ///< V x T
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;

  CellMask mask(Subset which) const {
    switch (which) {
      case Subset::train: return label == kTrain;
      case Subset::validation: return label == kValidation;
      default: return label != kMissing;
    }
  }

  std::size_t count(Subset which) const { return static_cast<std::size_t>(mask(which).count()); }
};

/// Exactly round(fraction * n) of the n observed cells go to validation,
/// chosen by a seeded shuffle.
inline SplitAssignment make_split(const CellMask& observed, double validation_fraction, std::uint64_t seed) {
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw DomainError("validation fraction must lie in [0,1)");
  }
  SplitAssignment split;
  split.validation_fraction = validation_fraction;
  split.seed = seed;
  split.label = Eigen::ArrayXXi::Constant(observed.rows(), observed.cols(), SplitAssignment::kMissing);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> cells;
  for (Eigen::Index t = 0; t < observed.cols(); ++t)
    for (Eigen::Index s = 0; s < observed.rows(); ++s)
      if (observed(s, t)) cells.emplace_back(s, t);
  std::mt19937_64 rng(seed);
  std::shuffle(cells.begin(), cells.end(), rng);
  const auto n_val = static_cast<std::size_t>(std::llround(validation_fraction * static_cast<double>(cells.size())));
  for (std::size_t k = 0; k < cells.size(); ++k) {
    split.label(cells[k].first, cells[k].second) = k < n_val ? SplitAssignment::kValidation : SplitAssignment::kTrain;
  }
  return split;
}

}  // namespace wildhaz
