// Copyright 2026 The lecsettle Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lec/errors.hpp"
#include "lec/metering.hpp"
#include "lec/metrics.hpp"
#include "lec/settlement.hpp"
#include "lec/tariffs.hpp"

namespace lec {

inline constexpr double kDefaultSweepMin = 0.06;
inline constexpr double kDefaultSweepMax = 0.12;
inline constexpr double kDefaultSweepStep = 0.005;

/// Coefficient of variation: population standard deviation over |mean|.
/// Absent for fewer than two values or a zero mean.
inline std::optional<double> cv(std::span<const double> values) {
  if (values.size() < 2) return std::nullopt;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (mean == 0.0) return std::nullopt;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size())) / std::abs(mean);
}

/// Defined saving percentages in household order.
inline std::vector<double> defined_pcts(std::span<const Savings> s) {
  std::vector<double> out;
  for (const auto& x : s)
    if (x.savings_pct) out.push_back(*x.savings_pct);
  return out;
}

/// Ascending grid p_min, p_min + step, ... <= p_max. Points are snapped to
/// 1e-9 CHF so that a grid price and the same price typed as decimal text
/// are the same double.
inline std::vector<double> make_price_grid(double p_min, double p_max, double step) {
  if (!std::isfinite(p_min) || !std::isfinite(p_max) || !std::isfinite(step))
    throw UsageError("sweep bounds must be finite");
  if (p_min < 0.0) throw UsageError("sweep minimum must be non-negative");
  if (p_min > p_max) throw UsageError("sweep minimum exceeds sweep maximum");
  if (!(step >= 1e-9)) throw UsageError("sweep step must be at least 1e-9 CHF/kWh");
  const auto n = static_cast<std::size_t>(std::floor((p_max - p_min) / step + 1e-9)) + 1;
  std::vector<double> grid;
  grid.reserve(n);
  for (std::size_t k = 0; k < n; ++k)
    grid.push_back(std::round((p_min + static_cast<double>(k) * step) * 1e9) / 1e9);
  return grid;
}

struct SweepRow {
  double local_price = 0.0;
  std::optional<double> cv;
  std::vector<Savings> savings;
};

struct SweepResult {
  std::vector<std::string> unit_ids;
  std::vector<double> price_grid;
  std::vector<SweepRow> rows;
  /// Grid price with the smallest CV; ties go to the lower price.
  std::optional<double> fair_price;
  std::optional<double> cv_min;
  /// Units without a defined saving percentage (never part of the CV).
  std::vector<std::string> excluded_households;
};

/// Per-household savings at one local price, from price-independent ledgers.
inline std::vector<Savings> savings_at_price(const std::vector<double>& cost_ref,
                                             const std::vector<FlowTotals>& lec_flows,
                                             TariffSchedule tariffs, double local_price) {
  tariffs.local_price = local_price;
  std::vector<double> cost_lec;
  cost_lec.reserve(lec_flows.size());
  for (const auto& f : lec_flows) cost_lec.push_back(cost_lec_flows(f, tariffs));
  return savings(cost_ref, cost_lec);
}

/// Exhaustive scan over `grid`. Energy flows do not depend on the local
/// price, so both ledgers are settled once by the caller and only costs are
/// re-evaluated per grid point.
inline SweepResult sweep_ledgers(const SettlementLedger& reference, const SettlementLedger& lec,
                                 const TariffSchedule& tariffs, std::vector<double> grid) {
  if (reference.mode() != SettlementMode::reference || lec.mode() != SettlementMode::lec)
    throw UsageError("sweep needs a reference and an lec ledger");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid[k] < 0.0 || grid[k] > tariffs.retail_import)
      throw UsageError("sweep price " + format_double(grid[k]) +
                       " lies outside [0, retail_import]");
    if (k > 0 && !(grid[k] > grid[k - 1]))
      throw UsageError("sweep grid must be strictly ascending");
  }
  SweepResult r;
  r.unit_ids = lec.unit_ids();
  const auto cost_ref = cost_reference(reference, tariffs);
  for (std::size_t i = 0; i < cost_ref.size(); ++i)
    if (std::abs(cost_ref[i]) < kSavingsBaseThreshold)
      r.excluded_households.push_back(r.unit_ids[i]);

  const auto flows = lec.totals();
  for (double price : grid) {
    SweepRow row;
    row.local_price = price;
    row.savings = savings_at_price(cost_ref, flows, tariffs, price);
    auto pcts = defined_pcts(row.savings);
    row.cv = cv(pcts);
    if (row.cv && (!r.cv_min || *row.cv < *r.cv_min)) {
      r.cv_min = row.cv;
      r.fair_price = price;
    }
    r.rows.push_back(std::move(row));
  }
  r.price_grid = std::move(grid);
  return r;
}

inline SweepResult sweep_local_price(const Community& community, const TariffSchedule& tariffs,
                                     double p_min = kDefaultSweepMin,
                                     double p_max = kDefaultSweepMax,
                                     double step = kDefaultSweepStep) {
  auto grid = make_price_grid(p_min, p_max, step);
  return sweep_ledgers(settle_reference(community), settle_lec(community), tariffs,
                       std::move(grid));
}

/// `local_price,cv,unit_<id>_savings_chf,...`; an undefined CV is left blank.
inline void write_sweep_csv(const SweepResult& r, std::ostream& out) {
  out << "local_price,cv";
  for (const auto& id : r.unit_ids) out << ",unit_" << id << "_savings_chf";
  out << '\n';
  for (const auto& row : r.rows) {
    out << format_double(row.local_price) << ',';
    if (row.cv) out << format_double(*row.cv);
    for (const auto& s : row.savings) out << ',' << format_double(s.savings_chf);
    out << '\n';
  }
}

inline nlohmann::ordered_json sweep_to_json(const SweepResult& r) {
  nlohmann::ordered_json j;
  j["price_grid"] = r.price_grid;
  auto& rows = j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    nlohmann::ordered_json jr;
    jr["local_price"] = row.local_price;
    jr["cv"] = optional_to_json(row.cv);
    auto& hh = jr["households"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < row.savings.size(); ++i) {
      nlohmann::ordered_json h;
      h["unit_id"] = r.unit_ids[i];
      h["savings_chf"] = row.savings[i].savings_chf;
      h["savings_pct"] = optional_to_json(row.savings[i].savings_pct);
      hh.push_back(std::move(h));
    }
    rows.push_back(std::move(jr));
  }
  j["fair_price"] = optional_to_json(r.fair_price);
  j["cv_min"] = optional_to_json(r.cv_min);
  j["excluded_households"] = r.excluded_households;
  return j;
}

}  // namespace lec
