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

// Model inputs: the panel covariates plus derived space-time columns, and
// the per-predictor standardization fitted over the whole panel.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "wildhaz/errors.hpp"
#include "wildhaz/panel.hpp"

namespace wildhaz {

/// Named columns, one V x p slice per month.
struct DesignTensor {
  std::vector<std::string> names;
  std::vector<Eigen::MatrixXd> slices;

  Eigen::Index width() const { return static_cast<Eigen::Index>(names.size()); }

  std::size_t index_of(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ValidationError("unknown covariate '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
  }
};

inline constexpr const char* kAreaColumn = "area";

struct FeatureOptions {
  bool space_time = true;    ///< append lat, lon, year, month
  bool include_area = true;  ///< append polygon area (occurrence model only)
};

/// File covariates followed by the derived columns. A derived column is
/// skipped when the panel already carries a covariate of that name.
inline DesignTensor build_design(const PanelDataset& panel, const FeatureOptions& opt) {
  DesignTensor d;
  d.names = panel.covariate_names;
  struct Derived {
    std::string name;
    int which;
  };
  std::vector<Derived> extra;
  auto want = [&](const std::string& n, int which) {
    if (std::find(d.names.begin(), d.names.end(), n) == d.names.end()) extra.push_back({n, which});
  };
  if (opt.space_time) {
    want("lat", 0);
    want("lon", 1);
    want("year", 2);
    want("month", 3);
  }
  if (opt.include_area) want(kAreaColumn, 4);
  for (const auto& e : extra) d.names.push_back(e.name);

  const auto v = panel.num_regions();
  const auto base = panel.num_covariates();
  for (Eigen::Index t = 0; t < panel.num_months(); ++t) {
    Eigen::MatrixXd s(v, d.width());
    s.leftCols(base) = panel.covariates[static_cast<std::size_t>(t)];
    const auto& stamp = panel.months[static_cast<std::size_t>(t)];
    for (std::size_t k = 0; k < extra.size(); ++k) {
      const auto col = base + static_cast<Eigen::Index>(k);
      for (Eigen::Index r = 0; r < v; ++r) {
        const auto& reg = panel.regions[static_cast<std::size_t>(r)];
        double x = 0.0;
        switch (extra[k].which) {
          case 0: x = reg.centroid.lat; break;
          case 1: x = reg.centroid.lon; break;
          case 2: x = stamp.year; break;
          case 3: x = stamp.month; break;
          default: x = reg.area_km2; break;
        }
        s(r, col) = x;
      }
    }
    d.slices.push_back(std::move(s));
  }
  return d;
}

/// Per-predictor mean and population standard deviation. Zero-variance
/// predictors are flagged and standardize to an all-zero column.
struct Standardizer {
  std::vector<std::string> names;
  std::vector<double> mean;
  std::vector<double> sd;

  bool degenerate(std::size_t i) const { return !(sd[i] > 0.0); }

  std::vector<std::string> degenerate_names() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < names.size(); ++i)
      if (degenerate(i)) out.push_back(names[i]);
    return out;
  }

  std::size_t index_of(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ValidationError("standardizer has no predictor '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
  }

  static Standardizer fit(const DesignTensor& raw) {
    Standardizer st;
    st.names = raw.names;
    const auto p = raw.width();
    Eigen::Index cells = 0;
    for (const auto& s : raw.slices) cells += s.rows();
    if (cells < 2) throw StructuralError("standardization needs at least two cells");
    for (Eigen::Index i = 0; i < p; ++i) {
      // two-pass for accuracy
      double sum = 0.0;
      for (const auto& s : raw.slices) sum += s.col(i).sum();
      const double mu = sum / static_cast<double>(cells);
      double ss = 0.0;
      for (const auto& s : raw.slices) ss += (s.col(i).array() - mu).square().sum();
      double sd = std::sqrt(ss / static_cast<double>(cells));
      // constant columns can leave rounding residue
      if (sd <= 1e-12 * std::max(1.0, std::abs(mu))) sd = 0.0;
      st.mean.push_back(mu);
      st.sd.push_back(sd);
    }
    return st;
  }

  /// Standardized copy of the requested columns, in the requested order.
  DesignTensor transform(const DesignTensor& raw, const std::vector<std::string>& columns) const {
    DesignTensor out;
    out.names = columns;
    std::vector<std::size_t> src, stat;
    for (const auto& c : columns) {
      src.push_back(raw.index_of(c));
      stat.push_back(index_of(c));
    }
    for (const auto& s : raw.slices) {
      Eigen::MatrixXd z(s.rows(), static_cast<Eigen::Index>(columns.size()));
      for (std::size_t k = 0; k < columns.size(); ++k) {
        const auto col = static_cast<Eigen::Index>(k);
        if (degenerate(stat[k])) {
          z.col(col).setZero();
        } else {
          z.col(col) = (s.col(static_cast<Eigen::Index>(src[k])).array() - mean[stat[k]]) / sd[stat[k]];
        }
      }
      out.slices.push_back(std::move(z));
    }
    return out;
  }

  DesignTensor transform(const DesignTensor& raw) const { return transform(raw, raw.names); }

  DesignTensor inverse_transform(const DesignTensor& z) const {
    DesignTensor out;
    out.names = z.names;
    for (const auto& s : z.slices) {
      Eigen::MatrixXd x(s.rows(), s.cols());
      for (Eigen::Index k = 0; k < s.cols(); ++k) {
        const auto i = index_of(z.names[static_cast<std::size_t>(k)]);
        x.col(k) = s.col(k).array() * sd[i] + mean[i];
      }
      out.slices.push_back(std::move(x));
    }
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["format_version"] = 1;
    j["names"] = names;
    j["mean"] = mean;
    j["sd"] = sd;
    j["degenerate"] = degenerate_names();
    return j;
  }

  static Standardizer from_json(const nlohmann::json& j) {
    try {
      Standardizer st;
      st.names = j.at("names").get<std::vector<std::string>>();
      st.mean = j.at("mean").get<std::vector<double>>();
      st.sd = j.at("sd").get<std::vector<double>>();
      if (st.mean.size() != st.names.size() || st.sd.size() != st.names.size()) {
        throw ValidationError("standardizer arrays differ in length");
      }
      return st;
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("malformed standardizer: ") + e.what());
    }
  }
};

}  // namespace wildhaz
