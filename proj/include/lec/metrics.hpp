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

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lec/errors.hpp"
#include "lec/settlement.hpp"

namespace lec {

/// Households whose reference cost magnitude is below this (CHF) have no
/// meaningful saving percentage and are left out of fairness statistics.
inline constexpr double kSavingsBaseThreshold = 0.01;

struct LocalExchangeRates {
  std::optional<double> ler_gen;
  std::optional<double> ler_con;
};

struct GridInteraction {
  double total_import_kwh = 0.0;
  double total_export_kwh = 0.0;
  double peak_import_kw = 0.0;
  double peak_export_kw = 0.0;
};

struct Savings {
  double savings_chf = 0.0;
  /// Absent when |reference cost| < kSavingsBaseThreshold.
  std::optional<double> savings_pct;
};

struct HouseholdMetrics {
  std::string unit_id;
  double cost_chf = 0.0;
  double savings_chf = 0.0;
  std::optional<double> savings_pct;
  double peak_import_kw = 0.0;
  double peak_export_kw = 0.0;
};

struct MetricsReport {
  SettlementMode mode = SettlementMode::reference;
  std::optional<double> scr;
  std::optional<double> ler_gen;
  std::optional<double> ler_con;
  GridInteraction grid;
  std::vector<HouseholdMetrics> per_household;
};

namespace detail {

struct CommunitySums {
  double generation = 0.0;
  double consumption = 0.0;
  double self = 0.0;
  double local = 0.0;
};

inline CommunitySums community_sums(const SettlementLedger& ledger) {
  CommunitySums s;
  for (const auto& f : ledger.totals()) {
    s.generation += f.generation_kwh;
    s.consumption += f.consumption_kwh;
    s.self += f.self_kwh;
  }
  for (double v : ledger.local_exchange_kwh()) s.local += v;
  return s;
}

}  // namespace detail

/// Share of community PV generation consumed inside the community (own use
/// plus local exchange). Absent when the community generates nothing.
inline std::optional<double> scr(const SettlementLedger& ledger) {
  auto s = detail::community_sums(ledger);
  if (!(s.generation > 0.0)) return std::nullopt;
  return (s.local + s.self) / s.generation;
}

inline LocalExchangeRates ler(const SettlementLedger& ledger) {
  auto s = detail::community_sums(ledger);
  LocalExchangeRates r;
  if (s.generation > 0.0) r.ler_gen = s.local / s.generation;
  if (s.consumption > 0.0) r.ler_con = s.local / s.consumption;
  return r;
}

/// Totals over households and intervals; peaks are the largest per-interval
/// community aggregate, converted from kWh per interval to kW.
inline GridInteraction grid_interaction(const SettlementLedger& ledger,
                                        int resolution_minutes) {
  if (resolution_minutes <= 0) throw UsageError("resolution must be positive");
  const double to_kw = 60.0 / resolution_minutes;
  GridInteraction g;
  for (std::size_t t = 0; t < ledger.intervals(); ++t) {
    double imp = 0.0, exp = 0.0;
    for (std::size_t i = 0; i < ledger.households(); ++i) {
      imp += ledger.at(i, t).import_kwh;
      exp += ledger.at(i, t).export_kwh;
    }
    g.peak_import_kw = std::max(g.peak_import_kw, imp * to_kw);
    g.peak_export_kw = std::max(g.peak_export_kw, exp * to_kw);
  }
  for (const auto& f : ledger.totals()) {
    g.total_import_kwh += f.import_kwh;
    g.total_export_kwh += f.export_kwh;
  }
  return g;
}

inline GridInteraction grid_interaction(const SettlementLedger& ledger) {
  return grid_interaction(ledger, ledger.resolution_minutes());
}

/// Savings relative to the reference cost. The percentage base is
/// |reference cost| so net earners keep a meaningful sign.
inline Savings saving(double cost_ref, double cost_lec) {
  Savings s;
  s.savings_chf = cost_ref - cost_lec;
  if (std::abs(cost_ref) >= kSavingsBaseThreshold)
    s.savings_pct = s.savings_chf / std::abs(cost_ref);
  return s;
}

inline std::vector<Savings> savings(const std::vector<double>& cost_ref,
                                    const std::vector<double>& cost_lec) {
  if (cost_ref.size() != cost_lec.size())
    throw UsageError("savings: household sets differ in size");
  std::vector<Savings> out;
  out.reserve(cost_ref.size());
  for (std::size_t i = 0; i < cost_ref.size(); ++i)
    out.push_back(saving(cost_ref[i], cost_lec[i]));
  return out;
}

/// `costs` are the costs of `ledger`'s own mode; `reference_costs` is the
/// baseline the savings are measured against.
inline MetricsReport compute_metrics(const SettlementLedger& ledger,
                                     const std::vector<double>& costs,
                                     const std::vector<double>& reference_costs) {
  if (costs.size() != ledger.households() || reference_costs.size() != ledger.households())
    throw UsageError("compute_metrics: cost vectors do not match the ledger");
  MetricsReport r;
  r.mode = ledger.mode();
  r.scr = scr(ledger);
  auto rates = ler(ledger);
  r.ler_gen = rates.ler_gen;
  r.ler_con = rates.ler_con;
  r.grid = grid_interaction(ledger);

  const double to_kw = 60.0 / ledger.resolution_minutes();
  for (std::size_t i = 0; i < ledger.households(); ++i) {
    HouseholdMetrics h;
    h.unit_id = ledger.unit_ids()[i];
    h.cost_chf = costs[i];
    auto s = saving(reference_costs[i], costs[i]);
    h.savings_chf = s.savings_chf;
    h.savings_pct = s.savings_pct;
    for (const auto& row : ledger.household(i)) {
      h.peak_import_kw = std::max(h.peak_import_kw, row.import_kwh * to_kw);
      h.peak_export_kw = std::max(h.peak_export_kw, row.export_kwh * to_kw);
    }
    r.per_household.push_back(std::move(h));
  }
  return r;
}

inline nlohmann::ordered_json optional_to_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

/// Undefined metrics serialize as null.
inline nlohmann::ordered_json metrics_to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["mode"] = std::string(to_string(r.mode));
  j["scr"] = optional_to_json(r.scr);
  j["ler_gen"] = optional_to_json(r.ler_gen);
  j["ler_con"] = optional_to_json(r.ler_con);
  j["total_import_kwh"] = r.grid.total_import_kwh;
  j["total_export_kwh"] = r.grid.total_export_kwh;
  j["peak_import_kw"] = r.grid.peak_import_kw;
  j["peak_export_kw"] = r.grid.peak_export_kw;
  auto& rows = j["per_household"] = nlohmann::ordered_json::array();
  for (const auto& h : r.per_household) {
    nlohmann::ordered_json row;
    row["unit_id"] = h.unit_id;
    row["cost_chf"] = h.cost_chf;
    row["savings_chf"] = h.savings_chf;
    row["savings_pct"] = optional_to_json(h.savings_pct);
    row["peak_import_kw"] = h.peak_import_kw;
    row["peak_export_kw"] = h.peak_export_kw;
    rows.push_back(std::move(row));
  }
  return j;
}

}  // namespace lec
