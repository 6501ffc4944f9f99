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

// Negative log-likelihoods of the two stages, with exact gradients.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "wildhaz/distributions.hpp"
#include "wildhaz/errors.hpp"
#include "wildhaz/neural.hpp"
#include "wildhaz/panel.hpp"
#include "wildhaz/training/models.hpp"
#include "wildhaz/training/standardizer.hpp"

namespace wildhaz {

inline constexpr double kProbabilityClamp = 1e-7;

namespace detail {

inline void check_cells(const PanelDataset& panel, const CellMask& cells, const DesignTensor& x) {
  if (cells.rows() != panel.num_regions() || cells.cols() != panel.num_months()) {
    throw StructuralError("cell selection does not match the panel shape");
  }
  if (static_cast<Eigen::Index>(x.slices.size()) != panel.num_months()) {
    throw StructuralError("design tensor does not match the panel months");
  }
  if ((cells && !panel.observed).any()) throw StructuralError("cell selection includes missing responses");
}

}  // namespace detail

/// -sum [z log p0 + (1-z) log(1-p0)] over the selected cells, z = 1{y > 0}.
/// Unselected cells still enter through graph propagation.
inline double bernoulli_nll(const DesignTensor& x, const WeightedGraph& graph, const NetworkWeights& net,
                            const PanelDataset& panel, const CellMask& cells, NetworkWeights* grad = nullptr) {
  detail::check_cells(panel, cells, x);
  ForwardCache cache;
  Eigen::VectorXd upstream;
  double loss = 0.0;
  for (Eigen::Index t = 0; t < panel.num_months(); ++t) {
    if (!cells.col(t).any()) continue;
    const auto& logit = forward(x.slices[static_cast<std::size_t>(t)], graph, net, cache);
    upstream = Eigen::VectorXd::Zero(logit.size());
    for (Eigen::Index s = 0; s < logit.size(); ++s) {
      if (!cells(s, t)) continue;
      const double z = panel.response(s, t) > 0.0 ? 1.0 : 0.0;
      const double raw = logistic(logit[s]);
      const double p = std::clamp(raw, kProbabilityClamp, 1.0 - kProbabilityClamp);
      loss -= z * std::log(p) + (1.0 - z) * std::log1p(-p);
      if (p == raw) upstream[s] = p - z;
    }
    if (grad) backward(cache, graph, net, upstream, grad);
  }
  return loss;
}

/// log-density of one positive response and its derivatives with respect
/// to log sigma, log kappa and log xi.
struct EgpdTerm {
  double logpdf = 0.0;
  double d_log_sigma = 0.0;
  double d_log_kappa = 0.0;
  double d_log_xi = 0.0;
};

inline EgpdTerm egpd_term(double y, double log_sigma, double kappa, double xi) {
  const double sigma = std::exp(log_sigma);
  const double z = y / sigma;
  const double u = std::log1p(xi * z);
  const double tail = std::exp(-u / xi);
  const double h = -std::expm1(-u / xi);
  const double log_h = std::log(h);
  EgpdTerm t;
  t.logpdf = std::log(kappa) + (kappa - 1.0) * log_h - log_sigma - (1.0 / xi + 1.0) * u;
  const double r = z / (1.0 + xi * z);  // du/dxi; also -du/dlog_sigma / xi
  t.d_log_sigma = -(kappa - 1.0) * tail * r / h - 1.0 + (1.0 + xi) * r;
  t.d_log_kappa = 1.0 + kappa * log_h;
  const double d_u_over_xi = r / xi - u / (xi * xi);
  const double d_xi = (kappa - 1.0) * tail * d_u_over_xi / h + u / (xi * xi) - (1.0 / xi + 1.0) * r;
  t.d_log_xi = xi * d_xi;
  return t;
}

struct EgpdGradient {
  NetworkWeights network;
  double log_kappa = 0.0;
  double log_xi = 0.0;
};

/// -sum log g(y; kappa, sigma(s,t), xi) over the selected cells, with
/// sigma(s,t) = sqrt(a(s)) exp(m_sigma(x(s,t))). Every selected cell must
/// hold a positive response.
inline double egpd_nll(const DesignTensor& x, const WeightedGraph& graph, const EgpdModel& model,
                       const PanelDataset& panel, const CellMask& cells, EgpdGradient* grad = nullptr) {
  detail::check_cells(panel, cells, x);
  const double kappa = model.kappa(), xi = model.xi();
  const auto v = panel.num_regions();
  Eigen::VectorXd log_sqrt_area(v);
  for (Eigen::Index s = 0; s < v; ++s) {
    log_sqrt_area[s] = 0.5 * std::log(panel.regions[static_cast<std::size_t>(s)].area_km2);
  }
  ForwardCache cache;
  Eigen::VectorXd upstream;
  double loss = 0.0;
  for (Eigen::Index t = 0; t < panel.num_months(); ++t) {
    if (!cells.col(t).any()) continue;
    const auto& m = forward(x.slices[static_cast<std::size_t>(t)], graph, model.network, cache);
    upstream = Eigen::VectorXd::Zero(v);
    for (Eigen::Index s = 0; s < v; ++s) {
      if (!cells(s, t)) continue;
      const double y = panel.response(s, t);
      if (!(y > 0.0)) {
        throw StructuralError("eGPD likelihood selected a nonpositive response at region " +
                              std::to_string(s + 1) + ", month " + std::to_string(t + 1));
      }
      const auto term = egpd_term(y, log_sqrt_area[s] + m[s], kappa, xi);
      loss -= term.logpdf;
      if (grad) {
        upstream[s] = -term.d_log_sigma;
        grad->log_kappa -= term.d_log_kappa;
        grad->log_xi -= term.d_log_xi;
      }
    }
    if (grad) backward(cache, graph, model.network, upstream, &grad->network);
  }
  return loss;
}

}  // namespace wildhaz
