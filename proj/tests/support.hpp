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

// Helpers shared by the test binaries.

#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <unistd.h>

#include "wildhaz/wildhaz.hpp"

namespace wildhaz::testing {

namespace fs = std::filesystem;

/// Directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "wildhaz") {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

/// Path graph 1 - 2 - ... - n with unit weights.
inline WeightedGraph path_graph(Eigen::Index n) {
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    t.emplace_back(i, i + 1, 1.0);
    t.emplace_back(i + 1, i, 1.0);
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  return make_graph(std::move(a));
}

/// Random symmetric weighted graph with zero diagonal.
template <class Engine>
WeightedGraph random_graph(Eigen::Index n, double density, Engine& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (u(rng) < density) {
        const double w = 0.1 + u(rng);
        t.emplace_back(i, j, w);
        t.emplace_back(j, i, w);
      }
  SparseMatrix a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  return make_graph(std::move(a));
}

template <class Engine>
Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, Engine& rng, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

/// Central difference of f at p along coordinate k.
inline double central_difference(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd p,
                                 Eigen::Index k, double h = 1e-6) {
  const double x0 = p[k];
  p[k] = x0 + h;
  const double up = f(p);
  p[k] = x0 - h;
  const double dn = f(p);
  return (up - dn) / (2.0 * h);
}

/// |a - b| / max(|a|, |b|, floor).
inline double relative_error(double a, double b, double floor = 1e-3) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Bisection for the smallest y with cdf(y) >= p on [lo, hi].
inline double bisect_quantile(const std::function<double(double)>& cdf, double p, double lo, double hi,
                              int iterations = 200) {
  while (cdf(hi) < p) hi *= 2.0;
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) >= p) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

/// A small panel on a few regions with chosen covariates and responses.
inline PanelDataset toy_panel(Eigen::Index v, Eigen::Index t, Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PanelDataset p;
  for (Eigen::Index s = 0; s < v; ++s) {
    Region r;
    r.id = s + 1;
    r.centroid = {-30.0 + static_cast<double>(s), 140.0 + 0.5 * static_cast<double>(s)};
    r.area_km2 = 100.0 + 37.0 * static_cast<double>(s);
    p.regions.regions.push_back(r);
  }
  for (Eigen::Index k = 0; k < d; ++k) p.covariate_names.push_back("c" + std::to_string(k + 1));
  for (Eigen::Index m = 0; m < t; ++m) {
    p.months.push_back({2001 + static_cast<int>(m / 12), static_cast<int>(m % 12) + 1});
    p.covariates.push_back(random_matrix(v, d, rng));
  }
  p.response.resize(v, t);
  p.observed = CellMask::Constant(v, t, true);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Eigen::Index m = 0; m < t; ++m)
    for (Eigen::Index s = 0; s < v; ++s) p.response(s, m) = u(rng) < 0.5 ? 0.0 : egpd_draw(rng, {1.0, 2.0, 0.3});
  return p;
}

}  // namespace wildhaz::testing
