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

// Polygon lattice as a weighted graph: centroids, areas, great-circle
// distances, the distance-kernel adjacency and its symmetric normalization.

#pragma once

#include <Eigen/Sparse>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "wildhaz/csv.hpp"
#include "wildhaz/errors.hpp"

namespace wildhaz {

inline constexpr double kEarthRadiusKm = 6371.0;

struct LatLon {
  double lat = 0.0;  ///< degrees
  double lon = 0.0;  ///< degrees
};

struct Region {
  long long id = 0;
  LatLon centroid;
  double area_km2 = 1.0;
};

/// Regions ordered by vertex index; ids are 1..V in that order.
struct RegionSet {
  std::vector<Region> regions;

  std::size_t size() const { return regions.size(); }
  const Region& operator[](std::size_t i) const { return regions[i]; }

  void validate() const {
    if (regions.empty()) throw ValidationError("region set is empty");
    for (std::size_t i = 0; i < regions.size(); ++i) {
      const auto& r = regions[i];
      if (r.id != static_cast<long long>(i + 1)) {
        throw ValidationError("region ids must be contiguous 1..V; position " +
                              std::to_string(i + 1) + " has id " + std::to_string(r.id));
      }
      if (!(r.area_km2 > 0.0) || !std::isfinite(r.area_km2)) {
        throw ValidationError("region " + std::to_string(r.id) + " has nonpositive area");
      }
      if (!(std::abs(r.centroid.lat) <= 90.0) || !(std::abs(r.centroid.lon) <= 180.0)) {
        throw ValidationError("region " + std::to_string(r.id) + " has coordinates off the sphere");
      }
    }
  }
};

struct AdjacencySpec {
  double lambda = 650.0;  ///< range, km
  int alpha = 2;          ///< kernel shape, 1 or 2
  double delta = 700.0;   ///< cut-off, km

  void validate() const {
    if (!(lambda > 0.0)) throw DomainError("adjacency range must be positive");
    if (alpha != 1 && alpha != 2) throw DomainError("adjacency shape must be 1 or 2");
    if (!(delta >= 0.0)) throw DomainError("adjacency cut-off must be nonnegative");
  }
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Immutable after construction.
struct WeightedGraph {
  SparseMatrix adjacency;   ///< A, symmetric, zero diagonal
  SparseMatrix normalized;  ///< D^{-1/2} A D^{-1/2}
  Eigen::VectorXd degrees;  ///< row sums of A

  Eigen::Index size() const { return adjacency.rows(); }
};

/// Haversine distance on a sphere of radius 6371 km.
inline double great_circle(const LatLon& p, const LatLon& q) {
  auto check = [](const LatLon& x) {
    if (!(x.lat >= -90.0 && x.lat <= 90.0) || !(x.lon >= -180.0 && x.lon <= 180.0)) {
      throw DomainError("coordinates out of range");
    }
  };
  check(p);
  check(q);
  constexpr double rad = std::numbers::pi / 180.0;
  const double phi1 = p.lat * rad, phi2 = q.lat * rad;
  const double dphi = (q.lat - p.lat) * rad;
  const double dlambda = (q.lon - p.lon) * rad;
  const double s1 = std::sin(dphi / 2.0), s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::min(1.0, std::max(0.0, h));
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

/// exp{-(h/lambda)^alpha}; the cut-off is applied by the caller.
inline double kernel_weight(double distance_km, const AdjacencySpec& spec) {
  const double r = distance_km / spec.lambda;
  return std::exp(-(spec.alpha == 1 ? r : r * r));
}

/// Rows and columns of isolated vertices (zero degree) stay zero.
inline SparseMatrix normalize(const SparseMatrix& a) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw StructuralError("adjacency must be square");
  Eigen::VectorXd deg = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (SparseMatrix::InnerIterator it(a, i); it; ++it) deg[i] += it.value();
  }
  Eigen::VectorXd inv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i) inv_sqrt[i] = deg[i] > 0.0 ? 1.0 / std::sqrt(deg[i]) : 0.0;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(a.nonZeros()));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
      trip.emplace_back(i, it.col(), it.value() * inv_sqrt[i] * inv_sqrt[it.col()]);
    }
  }
  SparseMatrix out(n, n);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

inline WeightedGraph make_graph(SparseMatrix adjacency) {
  WeightedGraph g;
  const Eigen::Index n = adjacency.rows();
  g.degrees = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (SparseMatrix::InnerIterator it(adjacency, i); it; ++it) g.degrees[i] += it.value();
  }
  g.normalized = normalize(adjacency);
  g.adjacency = std::move(adjacency);
  return g;
}

/// Graph with no edges; the graph-skip layers then reduce to dense ones.
inline WeightedGraph empty_graph(Eigen::Index n) { return make_graph(SparseMatrix(n, n)); }

inline WeightedGraph build_adjacency(const RegionSet& regions, const AdjacencySpec& spec) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(regions.size());
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double h = great_circle(regions[i].centroid, regions[j].centroid);
      if (h > spec.delta) continue;
      const double w = kernel_weight(h, spec);
      if (w == 0.0) continue;
      trip.emplace_back(i, j, w);
      trip.emplace_back(j, i, w);
    }
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  return make_graph(std::move(a));
}

/// Reads `id,lat,lon,area_km2`. Rows may come in any order; ids must cover 1..V.
inline RegionSet read_regions(const std::string& path) {
  const auto table = csv::read(path);
  const auto c_id = table.column("id"), c_lat = table.column("lat"), c_lon = table.column("lon"),
             c_area = table.column("area_km2");
  std::map<long long, Region> by_id;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto where = path + ":" + std::to_string(table.line_numbers[r]);
    const auto& row = table.rows[r];
    Region reg;
    reg.id = csv::parse_int(row[c_id], where);
    reg.centroid.lat = csv::parse_double(row[c_lat], where);
    reg.centroid.lon = csv::parse_double(row[c_lon], where);
    reg.area_km2 = csv::parse_double(row[c_area], where);
    if (!by_id.emplace(reg.id, reg).second) {
      throw ValidationError(where + ": duplicate region id " + std::to_string(reg.id));
    }
  }
  RegionSet set;
  for (auto& [id, reg] : by_id) set.regions.push_back(reg);
  set.validate();
  return set;
}

inline void write_regions(const std::string& path, const RegionSet& regions) {
  csv::Writer w(path);
  w.row({"id", "lat", "lon", "area_km2"});
  for (const auto& r : regions.regions) {
    w.row({std::to_string(r.id), csv::fmt(r.centroid.lat), csv::fmt(r.centroid.lon), csv::fmt(r.area_km2)});
  }
}

/// Upper and lower triangle triplets `i,j,weight` with 1-based region ids.
inline void write_adjacency(const std::string& path, const WeightedGraph& graph) {
  csv::Writer w(path);
  w.row({"i", "j", "weight"});
  for (Eigen::Index i = 0; i < graph.adjacency.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(graph.adjacency, i); it; ++it) {
      w.row({std::to_string(i + 1), std::to_string(it.col() + 1), csv::fmt(it.value())});
    }
  }
}

}  // namespace wildhaz
