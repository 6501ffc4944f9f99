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

// Space-time panel: per-month covariate slices over the region lattice and
// the response (square-root burnt area, km) with its missing mask.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "wildhaz/csv.hpp"
#include "wildhaz/errors.hpp"
#include "wildhaz/region_graph.hpp"

namespace wildhaz {

using CellMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;  ///< V x T

struct MonthStamp {
  int year = 2001;
  int month = 1;  ///< 1..12
  auto operator<=>(const MonthStamp&) const = default;
};

struct PanelDataset {
  RegionSet regions;
  std::vector<MonthStamp> months;
  std::vector<std::string> covariate_names;
  std::vector<Eigen::MatrixXd> covariates;  ///< one V x d slice per month
  Eigen::MatrixXd response;                 ///< V x T; NaN where missing
  CellMask observed;                        ///< V x T

  Eigen::Index num_regions() const { return static_cast<Eigen::Index>(regions.size()); }
  Eigen::Index num_months() const { return static_cast<Eigen::Index>(months.size()); }
  Eigen::Index num_covariates() const { return static_cast<Eigen::Index>(covariate_names.size()); }

  /// Observed cells with a positive response.
  CellMask positive() const { return observed && (response.array() > 0.0); }

  void validate() const {
    regions.validate();
    const auto v = num_regions(), t = num_months(), d = num_covariates();
    if (t < 1) throw ValidationError("panel has no months");
    if (static_cast<Eigen::Index>(covariates.size()) != t || response.rows() != v || response.cols() != t ||
        observed.rows() != v || observed.cols() != t) {
      throw StructuralError("panel arrays have inconsistent shapes");
    }
    for (Eigen::Index m = 0; m < t; ++m) {
      if (covariates[m].rows() != v || covariates[m].cols() != d) throw StructuralError("bad covariate slice shape");
      if (!covariates[m].allFinite()) throw ValidationError("non-finite covariate in month " + std::to_string(m + 1));
    }
    for (Eigen::Index m = 0; m < t; ++m)
      for (Eigen::Index s = 0; s < v; ++s)
        if (observed(s, m) && !(response(s, m) >= 0.0)) {
          throw ValidationError("negative response at region " + std::to_string(regions[s].id) + ", month " +
                                std::to_string(m + 1));
        }
  }

  /// Copy with months taken in the given order (indices may repeat).
  PanelDataset select_months(const std::vector<std::size_t>& order) const {
    PanelDataset out;
    out.regions = regions;
    out.covariate_names = covariate_names;
    const auto v = num_regions();
    const auto t = static_cast<Eigen::Index>(order.size());
    out.response.resize(v, t);
    out.observed.resize(v, t);
    for (Eigen::Index k = 0; k < t; ++k) {
      const auto src = static_cast<Eigen::Index>(order[static_cast<std::size_t>(k)]);
      out.months.push_back(months[static_cast<std::size_t>(src)]);
      out.covariates.push_back(covariates[static_cast<std::size_t>(src)]);
      out.response.col(k) = response.col(src);
      out.observed.col(k) = observed.col(src);
    }
    return out;
  }
};

struct IngestReport {
  std::size_t rows = 0;
  std::size_t regions = 0;
  std::size_t months = 0;
  std::size_t missing_responses = 0;
  std::size_t positive_responses = 0;
  struct CovariateSummary {
    std::string name;
    double min = 0, mean = 0, max = 0;
  };
  std::vector<CovariateSummary> covariates;

  std::string to_string() const {
    std::ostringstream os;
    os << "rows=" << rows << " regions=" << regions << " months=" << months
       << " missing_responses=" << missing_responses << " positive_responses=" << positive_responses << '\n';
    for (const auto& c : covariates) {
      os << "  " << c.name << ": min=" << c.min << " mean=" << c.mean << " max=" << c.max << '\n';
    }
    return os.str();
  }
};

inline IngestReport summarize(const PanelDataset& panel) {
  IngestReport r;
  r.regions = panel.regions.size();
  r.months = panel.months.size();
  r.rows = r.regions * r.months;
  r.missing_responses = static_cast<std::size_t>((!panel.observed).count());
  r.positive_responses = static_cast<std::size_t>(panel.positive().count());
  for (Eigen::Index i = 0; i < panel.num_covariates(); ++i) {
    IngestReport::CovariateSummary c{panel.covariate_names[static_cast<std::size_t>(i)], INFINITY, 0.0, -INFINITY};
    double sum = 0.0;
    for (const auto& slice : panel.covariates) {
      c.min = std::min(c.min, slice.col(i).minCoeff());
      c.max = std::max(c.max, slice.col(i).maxCoeff());
      sum += slice.col(i).sum();
    }
    c.mean = sum / static_cast<double>(r.rows);
    r.covariates.push_back(c);
  }
  return r;
}

/// Long-form `region_id,year,month,<covariates...>,response`, columns located
/// by name; `NA` marks a missing response. Every region must appear exactly
/// once per month.
inline PanelDataset read_panel(const RegionSet& regions, const std::string& path) {
  const auto table = csv::read(path);
  const auto c_region = table.column("region_id"), c_year = table.column("year"),
             c_month = table.column("month"), c_resp = table.column("response");
  PanelDataset panel;
  panel.regions = regions;
  std::vector<std::size_t> c_cov;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == c_region || c == c_year || c == c_month || c == c_resp) continue;
    if (std::find(panel.covariate_names.begin(), panel.covariate_names.end(), table.header[c]) !=
        panel.covariate_names.end()) {
      throw ValidationError(path + ": duplicate column '" + table.header[c] + "'");
    }
    panel.covariate_names.push_back(table.header[c]);
    c_cov.push_back(c);
  }
  const auto d = static_cast<Eigen::Index>(panel.covariate_names.size());
  const auto v = static_cast<Eigen::Index>(regions.size());

  struct Row {
    std::size_t region;
    MonthStamp stamp;
    std::vector<double> x;
    double y;
    bool observed;
  };
  std::vector<Row> rows;
  std::map<MonthStamp, std::size_t> month_index;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    const auto where = path + ":" + std::to_string(table.line_numbers[r]);
    const auto id = csv::parse_int(f[c_region], where);
    if (id < 1 || id > static_cast<long long>(v)) {
      throw ValidationError(where + ": unknown region id " + std::to_string(id));
    }
    Row row;
    row.region = static_cast<std::size_t>(id - 1);
    row.stamp.year = static_cast<int>(csv::parse_int(f[c_year], where));
    row.stamp.month = static_cast<int>(csv::parse_int(f[c_month], where));
    if (row.stamp.month < 1 || row.stamp.month > 12) throw ValidationError(where + ": month must be 1..12");
    for (Eigen::Index i = 0; i < d; ++i) {
      const double x = csv::parse_double(f[c_cov[static_cast<std::size_t>(i)]], where);
      if (!std::isfinite(x)) {
        throw ValidationError(where + ": covariate '" + panel.covariate_names[static_cast<std::size_t>(i)] +
                              "' is not finite (region " + std::to_string(id) + ", " +
                              std::to_string(row.stamp.year) + "-" + std::to_string(row.stamp.month) + ")");
      }
      row.x.push_back(x);
    }
    const auto& ys = f[c_resp];
    row.observed = !(ys == "NA" || ys.empty());
    row.y = row.observed ? csv::parse_double(ys, where) : std::nan("");
    if (row.observed && !(row.y >= 0.0)) {
      throw ValidationError(where + ": negative or invalid response " + ys + " at region " + std::to_string(id) +
                            ", year " + std::to_string(row.stamp.year) + ", month " +
                            std::to_string(row.stamp.month));
    }
    month_index.emplace(row.stamp, 0);
    rows.push_back(std::move(row));
  }
  std::size_t k = 0;
  for (auto& [stamp, idx] : month_index) {
    idx = k++;
    panel.months.push_back(stamp);
  }
  const auto t = static_cast<Eigen::Index>(panel.months.size());
  if (t == 0) throw ValidationError(path + ": no data rows");
  panel.covariates.assign(static_cast<std::size_t>(t), Eigen::MatrixXd::Zero(v, d));
  panel.response = Eigen::MatrixXd::Constant(v, t, std::nan(""));
  panel.observed = CellMask::Constant(v, t, false);
  Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic> seen = Eigen::ArrayXXi::Zero(v, t);
  for (const auto& row : rows) {
    const auto m = static_cast<Eigen::Index>(month_index.at(row.stamp));
    const auto s = static_cast<Eigen::Index>(row.region);
    if (seen(s, m)++) {
      throw ValidationError(path + ": duplicate row for region " + std::to_string(s + 1) + ", " +
                            std::to_string(row.stamp.year) + "-" + std::to_string(row.stamp.month));
    }
    for (Eigen::Index i = 0; i < d; ++i) panel.covariates[static_cast<std::size_t>(m)](s, i) = row.x[static_cast<std::size_t>(i)];
    panel.response(s, m) = row.y;
    panel.observed(s, m) = row.observed;
  }
  for (Eigen::Index m = 0; m < t; ++m)
    for (Eigen::Index s = 0; s < v; ++s)
      if (!seen(s, m)) {
        throw ValidationError(path + ": no row for region " + std::to_string(s + 1) + ", " +
                              std::to_string(panel.months[static_cast<std::size_t>(m)].year) + "-" +
                              std::to_string(panel.months[static_cast<std::size_t>(m)].month));
      }
  panel.validate();
  return panel;
}

inline PanelDataset ingest(const std::string& regions_path, const std::string& panel_path) {
  return read_panel(read_regions(regions_path), panel_path);
}

inline void write_panel(const std::string& path, const PanelDataset& panel) {
  csv::Writer w(path);
  std::vector<std::string> header{"region_id", "year", "month"};
  for (const auto& n : panel.covariate_names) header.push_back(n);
  header.push_back("response");
  w.row(header);
  for (Eigen::Index m = 0; m < panel.num_months(); ++m) {
    const auto& stamp = panel.months[static_cast<std::size_t>(m)];
    for (Eigen::Index s = 0; s < panel.num_regions(); ++s) {
      std::vector<std::string> row{std::to_string(panel.regions[static_cast<std::size_t>(s)].id),
                                   std::to_string(stamp.year), std::to_string(stamp.month)};
      for (Eigen::Index i = 0; i < panel.num_covariates(); ++i) {
        row.push_back(csv::fmt(panel.covariates[static_cast<std::size_t>(m)](s, i)));
      }
      row.push_back(panel.observed(s, m) ? csv::fmt(panel.response(s, m)) : "NA");
      w.row(row);
    }
  }
}

}  // namespace wildhaz
