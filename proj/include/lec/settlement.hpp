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
#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lec/errors.hpp"
#include "lec/metering.hpp"
#include "lec/tariffs.hpp"

namespace lec {

/// Absolute tolerance for every energy balance check, in kWh.
inline constexpr double kBalanceTolerance = 1e-9;

enum class SettlementMode { reference, lec };

inline std::string_view to_string(SettlementMode m) {
  return m == SettlementMode::reference ? "reference" : "lec";
}

/// Decomposition of one household's interval. For every interval
/// consumption = self + local_buy + import and
/// generation = self + local_sell + export.
struct IntervalSettlement {
  double self_kwh = 0.0;
  double local_buy_kwh = 0.0;
  double local_sell_kwh = 0.0;
  double import_kwh = 0.0;
  double export_kwh = 0.0;

  friend bool operator==(const IntervalSettlement&, const IntervalSettlement&) = default;
};

/// Per-household sums of the ledger columns plus the metered inputs.
struct FlowTotals {
  double consumption_kwh = 0.0;
  double generation_kwh = 0.0;
  double self_kwh = 0.0;
  double local_buy_kwh = 0.0;
  double local_sell_kwh = 0.0;
  double import_kwh = 0.0;
  double export_kwh = 0.0;
};

class SettlementLedger {
 public:
  SettlementLedger(SettlementMode mode, std::vector<std::string> unit_ids,
                   Timestamp start, int resolution_minutes,
                   std::vector<std::vector<IntervalSettlement>> rows,
                   std::vector<double> local_exchange_kwh)
      : mode_(mode),
        unit_ids_(std::move(unit_ids)),
        start_(start),
        resolution_minutes_(resolution_minutes),
        rows_(std::move(rows)),
        local_exchange_(std::move(local_exchange_kwh)) {}

  SettlementMode mode() const { return mode_; }
  std::size_t households() const { return rows_.size(); }
  std::size_t intervals() const { return local_exchange_.size(); }
  const std::vector<std::string>& unit_ids() const { return unit_ids_; }
  Timestamp start() const { return start_; }
  int resolution_minutes() const { return resolution_minutes_; }
  Timestamp timestamp_at(std::size_t t) const {
    return start_ + std::chrono::minutes{static_cast<long long>(t) * resolution_minutes_};
  }

  std::span<const IntervalSettlement> household(std::size_t i) const { return rows_[i]; }
  const IntervalSettlement& at(std::size_t i, std::size_t t) const { return rows_[i][t]; }
  /// Community energy exchanged locally per interval.
  std::span<const double> local_exchange_kwh() const { return local_exchange_; }

  /// Column sums per household, accumulated in interval order.
  std::vector<FlowTotals> totals() const {
    std::vector<FlowTotals> out(rows_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      auto& f = out[i];
      for (const auto& s : rows_[i]) {
        f.self_kwh += s.self_kwh;
        f.local_buy_kwh += s.local_buy_kwh;
        f.local_sell_kwh += s.local_sell_kwh;
        f.import_kwh += s.import_kwh;
        f.export_kwh += s.export_kwh;
        f.consumption_kwh += s.self_kwh + s.local_buy_kwh + s.import_kwh;
        f.generation_kwh += s.self_kwh + s.local_sell_kwh + s.export_kwh;
      }
    }
    return out;
  }

  friend bool operator==(const SettlementLedger&, const SettlementLedger&) = default;

 private:
  SettlementMode mode_;
  std::vector<std::string> unit_ids_;
  Timestamp start_;
  int resolution_minutes_;
  std::vector<std::vector<IntervalSettlement>> rows_;
  std::vector<double> local_exchange_;
};

struct SelfConsumption {
  double self = 0.0;
  double residual_demand = 0.0;
  double surplus = 0.0;
};

/// PV output first covers the household's own consumption.
inline SelfConsumption self_consume(double consumption, double generation) {
  if (!(consumption >= 0.0) || !(generation >= 0.0))
    throw DataError("self_consume: energy must be non-negative, got consumption " +
                    format_double(consumption) + " and generation " +
                    format_double(generation));
  const double self = std::min(consumption, generation);
  return {self, consumption - self, generation - self};
}

namespace detail {

// Rounding can leave residuals like -1e-16; anything beyond tolerance is a bug.
inline double clamp_residual(double v, const char* what, const std::string& unit,
                             std::size_t t) {
  if (v < 0.0) {
    if (v < -kBalanceTolerance)
      throw InvariantViolation(std::string(what) + " of unit " + unit +
                               " negative at interval " + std::to_string(t) + ": " +
                               format_double(v));
    return 0.0;
  }
  return v;
}

inline std::vector<std::string> unit_ids(const Community& c) {
  std::vector<std::string> ids;
  ids.reserve(c.size());
  for (const auto& h : c.households()) ids.push_back(h.id());
  return ids;
}

}  // namespace detail

/// No local exchange: residual demand comes from the grid and surplus is fed in.
inline SettlementLedger settle_reference(const Community& community) {
  const std::size_t n = community.size(), T = community.intervals();
  std::vector<std::vector<IntervalSettlement>> rows(n, std::vector<IntervalSettlement>(T));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& h = community[i];
    for (std::size_t t = 0; t < T; ++t) {
      auto sc = self_consume(h.consumption()[t], h.generation()[t]);
      rows[i][t] = {sc.self, 0.0, 0.0, sc.residual_demand, sc.surplus};
    }
  }
  return SettlementLedger(SettlementMode::reference, detail::unit_ids(community),
                          community.start(), community.resolution_minutes(),
                          std::move(rows), std::vector<double>(T, 0.0));
}

/// Community settlement with local exchange. Per interval the exchanged
/// energy is min(total surplus, total residual demand); buyers receive it in
/// proportion to their residual demand and sellers deliver it in proportion
/// to their surplus. Grid import/export are what remains.
inline SettlementLedger settle_lec(const Community& community) {
  const std::size_t n = community.size(), T = community.intervals();
  std::vector<std::vector<IntervalSettlement>> rows(n, std::vector<IntervalSettlement>(T));
  std::vector<double> local(T, 0.0);
  std::vector<SelfConsumption> sc(n);
  const auto ids = detail::unit_ids(community);

  for (std::size_t t = 0; t < T; ++t) {
    double total_residual = 0.0, total_surplus = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sc[i] = self_consume(community[i].consumption()[t], community[i].generation()[t]);
      total_residual += sc[i].residual_demand;
      total_surplus += sc[i].surplus;
    }
    const double exchanged = std::min(total_surplus, total_residual);
    local[t] = exchanged;

    for (std::size_t i = 0; i < n; ++i) {
      double buy = 0.0, sell = 0.0;
      if (total_residual > 0.0)
        buy = exchanged == total_residual
                  ? sc[i].residual_demand
                  : sc[i].residual_demand / total_residual * exchanged;
      if (total_surplus > 0.0)
        sell = exchanged == total_surplus
                   ? sc[i].surplus
                   : sc[i].surplus / total_surplus * exchanged;
      const double imp =
          detail::clamp_residual(sc[i].residual_demand - buy, "import", ids[i], t);
      const double exp =
          detail::clamp_residual(sc[i].surplus - sell, "export", ids[i], t);
      rows[i][t] = {sc[i].self, buy, sell, imp, exp};
    }
  }
  return SettlementLedger(SettlementMode::lec, ids, community.start(),
                          community.resolution_minutes(), std::move(rows),
                          std::move(local));
}

inline SettlementLedger settle(const Community& community, SettlementMode mode) {
  return mode == SettlementMode::reference ? settle_reference(community)
                                           : settle_lec(community);
}

/// Verifies both per-household balance identities and the community
/// identity sum(buy) = sum(sell) = local exchange at every interval.
/// Throws InvariantViolation on the first failure.
inline void check_ledger(const Community& community, const SettlementLedger& ledger,
                         double tol = kBalanceTolerance) {
  if (ledger.households() != community.size() || ledger.intervals() != community.intervals())
    throw InvariantViolation("ledger shape does not match community");
  for (std::size_t t = 0; t < ledger.intervals(); ++t) {
    double buys = 0.0, sells = 0.0, residual = 0.0, surplus = 0.0;
    for (std::size_t i = 0; i < ledger.households(); ++i) {
      const auto& s = ledger.at(i, t);
      const double con = community[i].consumption()[t];
      const double gen = community[i].generation()[t];
      auto fail = [&](const char* what) {
        throw InvariantViolation(std::string(what) + " violated for unit " +
                                 community[i].id() + " at " +
                                 format_rfc3339(ledger.timestamp_at(t)));
      };
      if (s.self_kwh < 0 || s.local_buy_kwh < 0 || s.local_sell_kwh < 0 ||
          s.import_kwh < 0 || s.export_kwh < 0)
        fail("non-negativity");
      if (std::abs(con - (s.self_kwh + s.local_buy_kwh + s.import_kwh)) > tol)
        fail("consumption balance");
      if (std::abs(gen - (s.self_kwh + s.local_sell_kwh + s.export_kwh)) > tol)
        fail("generation balance");
      if (ledger.mode() == SettlementMode::reference &&
          (s.local_buy_kwh != 0.0 || s.local_sell_kwh != 0.0))
        fail("reference local exchange");
      buys += s.local_buy_kwh;
      sells += s.local_sell_kwh;
      residual += con - s.self_kwh;
      surplus += gen - s.self_kwh;
    }
    const double loc = ledger.local_exchange_kwh()[t];
    auto at = " at " + format_rfc3339(ledger.timestamp_at(t));
    if (std::abs(buys - loc) > tol || std::abs(sells - loc) > tol)
      throw InvariantViolation("community exchange balance violated" + at);
    if (loc > std::min(surplus, residual) + tol)
      throw InvariantViolation("local exchange exceeds available energy" + at);
  }
}

/// Reference cost per household in CHF; negative for net earners.
inline std::vector<double> cost_reference(const SettlementLedger& ledger,
                                          const TariffSchedule& tariffs) {
  if (ledger.mode() != SettlementMode::reference)
    throw UsageError("cost_reference requires a reference-mode ledger");
  std::vector<double> out;
  for (const auto& f : ledger.totals())
    out.push_back(f.import_kwh * tariffs.retail_import - f.export_kwh * tariffs.feed_in);
  return out;
}

/// Cost of one household's LEC flows. Purchases from the community pay the
/// local price plus the reduced network fee (and levies when configured);
/// sales earn the local price.
inline double cost_lec_flows(const FlowTotals& f, const TariffSchedule& tariffs) {
  return f.local_buy_kwh * tariffs.local_buy_unit_cost() -
         f.local_sell_kwh * tariffs.local_price + f.import_kwh * tariffs.retail_import -
         f.export_kwh * tariffs.feed_in;
}

inline std::vector<double> cost_lec(const SettlementLedger& ledger,
                                    const TariffSchedule& tariffs) {
  if (ledger.mode() != SettlementMode::lec)
    throw UsageError("cost_lec requires an lec-mode ledger");
  std::vector<double> out;
  for (const auto& f : ledger.totals()) out.push_back(cost_lec_flows(f, tariffs));
  return out;
}

inline std::vector<double> cost(const SettlementLedger& ledger, const TariffSchedule& tariffs) {
  return ledger.mode() == SettlementMode::reference ? cost_reference(ledger, tariffs)
                                                    : cost_lec(ledger, tariffs);
}

/// `unit_id,timestamp,self_kwh,local_buy_kwh,local_sell_kwh,import_kwh,export_kwh`,
/// one block of rows per household.
inline void write_ledger_csv(const SettlementLedger& ledger, std::ostream& out) {
  out << "unit_id,timestamp,self_kwh,local_buy_kwh,local_sell_kwh,import_kwh,export_kwh\n";
  std::vector<std::string> stamps;
  stamps.reserve(ledger.intervals());
  for (std::size_t t = 0; t < ledger.intervals(); ++t)
    stamps.push_back(format_rfc3339(ledger.timestamp_at(t)));
  for (std::size_t i = 0; i < ledger.households(); ++i) {
    const auto& id = ledger.unit_ids()[i];
    for (std::size_t t = 0; t < ledger.intervals(); ++t) {
      const auto& s = ledger.at(i, t);
      out << id << ',' << stamps[t] << ',' << format_double(s.self_kwh) << ','
          << format_double(s.local_buy_kwh) << ',' << format_double(s.local_sell_kwh)
          << ',' << format_double(s.import_kwh) << ',' << format_double(s.export_kwh)
          << '\n';
    }
  }
}

}  // namespace lec
