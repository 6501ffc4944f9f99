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

// Generalized Pareto, extended GPD (first family, G = H^kappa) and the
// zero-inflated mixture used for monthly radial spread.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "wildhaz/errors.hpp"

namespace wildhaz {

struct GpdParams {
  double sigma = 1.0;
  double xi = 0.1;
};

struct EgpdParams {
  double kappa = 1.0;
  double sigma = 1.0;
  double xi = 0.1;
};

struct MixtureParams {
  double p0 = 0.5;  ///< probability of a positive response
  EgpdParams egpd;
};

namespace detail {

inline void check_gpd(double sigma, double xi) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw DomainError("GPD scale must be positive, got " + std::to_string(sigma));
  }
  if (!(xi > 0.0) || !std::isfinite(xi)) {
    throw DomainError("GPD shape must be positive, got " + std::to_string(xi));
  }
}

inline void check_egpd(const EgpdParams& p) {
  if (!(p.kappa > 0.0) || !std::isfinite(p.kappa)) {
    throw DomainError("eGPD kappa must be positive, got " + std::to_string(p.kappa));
  }
  check_gpd(p.sigma, p.xi);
}

inline void check_mixture(const MixtureParams& p) {
  if (!(p.p0 >= 0.0 && p.p0 <= 1.0)) {
    throw DomainError("occurrence probability must lie in [0,1], got " + std::to_string(p.p0));
  }
  check_egpd(p.egpd);
}

inline void check_nonneg(double y) {
  if (!(y >= 0.0)) throw DomainError("response must be nonnegative, got " + std::to_string(y));
}

// log1p(xi*y/sigma); every tail term below is exp(-(1/xi) * this).
inline double log_excess(double y, double sigma, double xi) { return std::log1p(xi * y / sigma); }

}  // namespace detail

/// H(y) = 1 - (1 + xi*y/sigma)^(-1/xi) for xi > 0.
inline double gpd_cdf(double y, const GpdParams& p) {
  detail::check_gpd(p.sigma, p.xi);
  detail::check_nonneg(y);
  return -std::expm1(-detail::log_excess(y, p.sigma, p.xi) / p.xi);
}

/// The xi = 0 branch of the GPD, 1 - exp(-y/sigma). Fitted models always
/// have xi > 0, so nothing in the library calls this.
inline double gpd_cdf_exponential(double y, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("GPD scale must be positive");
  detail::check_nonneg(y);
  return -std::expm1(-y / sigma);
}

inline double gpd_survival(double y, const GpdParams& p) {
  detail::check_gpd(p.sigma, p.xi);
  detail::check_nonneg(y);
  return std::exp(-detail::log_excess(y, p.sigma, p.xi) / p.xi);
}

inline double egpd_cdf(double y, const EgpdParams& p) {
  detail::check_egpd(p);
  detail::check_nonneg(y);
  const double h = -std::expm1(-detail::log_excess(y, p.sigma, p.xi) / p.xi);
  return p.kappa == 1.0 ? h : std::pow(h, p.kappa);
}

/// log g(y) = log kappa + (kappa-1) log H(y) + log h(y), with
/// h(y) = (1/sigma)(1 + xi*y/sigma)^(-1/xi - 1).
inline double egpd_logpdf(double y, const EgpdParams& p) {
  detail::check_egpd(p);
  if (!(y > 0.0)) throw DomainError("eGPD density needs y > 0, got " + std::to_string(y));
  const double u = detail::log_excess(y, p.sigma, p.xi);
  const double log_h_cdf = std::log(-std::expm1(-u / p.xi));
  return std::log(p.kappa) + (p.kappa - 1.0) * log_h_cdf - std::log(p.sigma) -
         (1.0 / p.xi + 1.0) * u;
}

/// Closed-form inverse (sigma/xi) * [(1 - prob^(1/kappa))^(-xi) - 1].
inline double egpd_quantile(double prob, const EgpdParams& p) {
  detail::check_egpd(p);
  if (!(prob > 0.0 && prob < 1.0)) {
    throw DomainError("quantile level must lie in (0,1), got " + std::to_string(prob));
  }
  // log(1 - prob^(1/kappa)), accurate at both ends of (0,1).
  const double a = std::log(prob) / p.kappa;
  const double log_one_minus = a < -std::numbers::ln2 ? std::log1p(-std::exp(a)) : std::log(-std::expm1(a));
  return p.sigma / p.xi * std::expm1(-p.xi * log_one_minus);
}

/// Draws n values by inversion. Uniform variates of exactly zero are redrawn.
inline std::vector<double> egpd_sample(std::size_t n, const EgpdParams& p, std::uint64_t seed) {
  detail::check_egpd(p);
  if (n == 0) throw DomainError("sample size must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& v : out) {
    double u = 0.0;
    while (u <= 0.0) u = unif(rng);
    v = egpd_quantile(u, p);
  }
  return out;
}

/// Single draw from an existing engine; used by the panel simulator.
template <class Engine>
double egpd_draw(Engine& rng, const EgpdParams& p) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = 0.0;
  while (u <= 0.0) u = unif(rng);
  return egpd_quantile(u, p);
}

/// F(0) = 1 - p0; F(y) = 1 - p0 + p0 * G(y) for y > 0.
inline double mixture_cdf(double y, const MixtureParams& p) {
  detail::check_mixture(p);
  detail::check_nonneg(y);
  if (y == 0.0) return 1.0 - p.p0;
  return (1.0 - p.p0) + p.p0 * egpd_cdf(y, p.egpd);
}

/// Levels at or below the zero atom (prob <= 1 - p0) map to 0.
inline double mixture_quantile(double prob, const MixtureParams& p) {
  detail::check_mixture(p);
  if (!(prob > 0.0 && prob < 1.0)) {
    throw DomainError("quantile level must lie in (0,1), got " + std::to_string(prob));
  }
  const double atom = 1.0 - p.p0;
  if (prob <= atom) return 0.0;
  const double conditional = (prob - atom) / p.p0;
  if (conditional >= 1.0) return egpd_quantile(std::nextafter(1.0, 0.0), p.egpd);
  return egpd_quantile(conditional, p.egpd);
}

}  // namespace wildhaz
