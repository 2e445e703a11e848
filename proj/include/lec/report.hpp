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

#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "lec/metering.hpp"
#include "lec/metrics.hpp"
#include "lec/scenario.hpp"
#include "lec/settlement.hpp"
#include "lec/sweep.hpp"
#include "lec/tariffs.hpp"

namespace lec {

/// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Hash of the canonical meter CSV serialization.
inline std::string community_hash(const Community& c) {
  std::ostringstream out;
  write_meter_csv(c, out);
  return fnv1a_hex(out.str());
}

/// A scenario together with both price-independent ledgers.
struct SettledScenario {
  Scenario scenario;
  SettlementLedger reference;
  SettlementLedger lec;
  std::string hash;
  FillGaps fill_gaps = FillGaps::none;
};

/// Settles both modes and asserts the ledger invariants.
inline SettledScenario settle_scenario(Scenario s, FillGaps fill_gaps = FillGaps::none) {
  auto ref = settle_reference(s.community);
  auto loc = settle_lec(s.community);
  check_ledger(s.community, ref);
  check_ledger(s.community, loc);
  auto hash = community_hash(s.community);
  return SettledScenario{std::move(s), std::move(ref), std::move(loc), std::move(hash),
                         fill_gaps};
}

/// Canonical text form of every JSON document the CLI and service emit.
inline std::string render(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

inline nlohmann::ordered_json report_meta(const SettledScenario& s,
                                          const TariffSchedule& tariffs) {
  nlohmann::ordered_json m;
  m["scenario"] = s.scenario.name;
  m["description"] = s.scenario.description;
  m["provenance"] = s.scenario.provenance;
  m["scenario_hash"] = s.hash;
  m["start"] = format_rfc3339(s.scenario.community.start());
  m["resolution_minutes"] = s.scenario.community.resolution_minutes();
  m["intervals"] = s.scenario.community.intervals();
  m["households"] = s.scenario.community.size();
  m["fill_gaps"] = s.fill_gaps == FillGaps::zero ? "zero" : "none";
  m["tariffs"] = tariffs_to_json(tariffs);
  m["gamma"] = tariffs.gamma;
  m["levies_on_local"] = tariffs.levies_on_local;
  m["energy_price"] = energy_price(tariffs);
  return m;
}

inline std::optional<double> reduction(double before, double after) {
  if (!(before > 0.0)) return std::nullopt;
  return (before - after) / before;
}

/// Metrics of a single mode, savings taken against the reference case.
inline nlohmann::ordered_json single_mode_report(const SettledScenario& s,
                                                 const TariffSchedule& tariffs,
                                                 SettlementMode mode) {
  const auto cref = cost_reference(s.reference, tariffs);
  const auto& ledger = mode == SettlementMode::reference ? s.reference : s.lec;
  const auto costs = mode == SettlementMode::reference ? cref : cost_lec(s.lec, tariffs);
  nlohmann::ordered_json j;
  j["meta"] = report_meta(s, tariffs);
  j["metrics"] = metrics_to_json(compute_metrics(ledger, costs, cref));
  return j;
}

/// Reference vs LEC comparison at the schedule's local price. This is the
/// body of both `settle --mode both` and the evaluate endpoint.
inline nlohmann::ordered_json run_report(const SettledScenario& s,
                                         const TariffSchedule& tariffs) {
  const auto cref = cost_reference(s.reference, tariffs);
  const auto clec = cost_lec(s.lec, tariffs);
  const auto ref = compute_metrics(s.reference, cref, cref);
  const auto loc = compute_metrics(s.lec, clec, cref);

  nlohmann::ordered_json j;
  j["meta"] = report_meta(s, tariffs);
  j["reference"] = metrics_to_json(ref);
  j["lec"] = metrics_to_json(loc);

  auto& d = j["deltas"];
  d["import_reduction"] = optional_to_json(
      reduction(ref.grid.total_import_kwh, loc.grid.total_import_kwh));
  d["export_reduction"] = optional_to_json(
      reduction(ref.grid.total_export_kwh, loc.grid.total_export_kwh));
  d["peak_import_change_kw"] = loc.grid.peak_import_kw - ref.grid.peak_import_kw;
  d["peak_export_change_kw"] = loc.grid.peak_export_kw - ref.grid.peak_export_kw;
  d["scr_gain"] = ref.scr && loc.scr ? nlohmann::ordered_json(*loc.scr - *ref.scr)
                                     : nlohmann::ordered_json(nullptr);

  std::vector<Savings> sv;
  std::vector<std::string> excluded;
  for (const auto& h : loc.per_household) {
    sv.push_back({h.savings_chf, h.savings_pct});
    if (!h.savings_pct) excluded.push_back(h.unit_id);
  }
  auto& f = j["fairness"];
  f["local_price"] = tariffs.local_price;
  f["verdict"] = std::string(to_string(validate_local_price(tariffs)));
  f["cv"] = optional_to_json(cv(defined_pcts(sv)));
  f["excluded_households"] = excluded;
  return j;
}

inline nlohmann::ordered_json sweep_report(const SettledScenario& s,
                                           const TariffSchedule& tariffs,
                                           const SweepResult& r) {
  nlohmann::ordered_json j;
  j["meta"] = report_meta(s, tariffs);
  j["sweep"] = sweep_to_json(r);
  return j;
}

}  // namespace lec
