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


// lec: batch settlement, sweep and evaluation service for local electricity
// communities.
//
//   lec synth  --seed 42 --out scenarios/table1
//   lec settle --scenario scenarios/table1 --mode both --out out/
//   lec sweep  --scenario table1 --sweep-min 0.06 --sweep-max 0.12 --sweep-step 0.005 --out out/
//   lec serve
//
// Exit codes: 0 success, 2 input or usage error, 3 invariant violation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lec/errors.hpp"
#include "lec/report.hpp"
#include "lec/scenario.hpp"
#include "lec/service.hpp"
#include "lec/settlement.hpp"
#include "lec/sweep.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInvariant = 3;

struct Options {
  std::string scenario = lec::service::kBundledToken;
  std::string mode = "both";
  std::string out = "out";
  std::uint64_t seed = 42;
  std::string fill_gaps = "none";
  std::optional<double> gamma;
  std::optional<double> local_price;
  bool levies_on_local = false;
  double sweep_min = lec::kDefaultSweepMin;
  double sweep_max = lec::kDefaultSweepMax;
  double sweep_step = lec::kDefaultSweepStep;
};

lec::FillGaps fill_gaps(const Options& o) {
  return o.fill_gaps == "zero" ? lec::FillGaps::zero : lec::FillGaps::none;
}

// "table1" selects the bundled synthetic scenario unless a path of that name exists.
lec::Scenario open_scenario(const Options& o) {
  if (o.scenario == lec::service::kBundledToken && !fs::exists(o.scenario))
    return lec::synth_table1(o.seed);
  return lec::load_scenario(o.scenario, fill_gaps(o));
}

lec::TariffSchedule effective_tariffs(const Options& o, lec::TariffSchedule t) {
  if (o.gamma) t.gamma = *o.gamma;
  if (o.local_price) t.local_price = *o.local_price;
  if (o.levies_on_local) t.levies_on_local = true;
  try {
    t.validate();
  } catch (const lec::ConfigError& e) {
    throw lec::UsageError(e.what());
  }
  return t;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw lec::DataError("cannot write " + path.string());
  out << text;
}

template <class Fn>
void write_stream(const fs::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw lec::DataError("cannot write " + path.string());
  fn(out);
}

int cmd_synth(const Options& o) {
  auto s = lec::synth_table1(o.seed);
  lec::save_scenario(s, o.out);
  for (const auto& t : lec::annual_totals(s.community))
    std::printf("unit %s: demand %.1f kWh, generation %.1f kWh\n", t.id.c_str(),
                t.consumption_kwh, t.generation_kwh);
  std::printf("wrote %s\n", (fs::path(o.out) / lec::kManifestName).string().c_str());
  return kExitOk;
}

int cmd_settle(const Options& o) {
  auto settled = lec::settle_scenario(open_scenario(o), fill_gaps(o));
  const auto tariffs = effective_tariffs(o, settled.scenario.tariffs);
  const fs::path out = o.out;
  fs::create_directories(out);

  if (o.mode == "ref" || o.mode == "both")
    write_stream(out / "ledger_reference.csv",
                 [&](std::ostream& s) { lec::write_ledger_csv(settled.reference, s); });
  if (o.mode == "lec" || o.mode == "both")
    write_stream(out / "ledger_lec.csv",
                 [&](std::ostream& s) { lec::write_ledger_csv(settled.lec, s); });

  if (o.mode == "ref") {
    write_file(out / "metrics_reference.json",
               lec::render(lec::single_mode_report(settled, tariffs,
                                                   lec::SettlementMode::reference)));
  } else if (o.mode == "lec") {
    write_file(out / "metrics_lec.json",
               lec::render(lec::single_mode_report(settled, tariffs, lec::SettlementMode::lec)));
  } else {
    auto report = lec::run_report(settled, tariffs);
    write_file(out / "report.json", lec::render(report));
    const auto& d = report["deltas"];
    std::printf("scr %s -> %s, import reduction %s, export reduction %s\n",
                report["reference"]["scr"].dump().c_str(), report["lec"]["scr"].dump().c_str(),
                d["import_reduction"].dump().c_str(), d["export_reduction"].dump().c_str());
  }
  std::printf("wrote %s\n", out.string().c_str());
  return kExitOk;
}

int cmd_sweep(const Options& o) {
  auto settled = lec::settle_scenario(open_scenario(o), fill_gaps(o));
  const auto tariffs = effective_tariffs(o, settled.scenario.tariffs);
  auto result = lec::sweep_ledgers(settled.reference, settled.lec, tariffs,
                                   lec::make_price_grid(o.sweep_min, o.sweep_max, o.sweep_step));
  const fs::path out = o.out;
  fs::create_directories(out);
  write_stream(out / "sweep.csv", [&](std::ostream& s) { lec::write_sweep_csv(result, s); });
  write_file(out / "sweep.json", lec::render(lec::sweep_report(settled, tariffs, result)));
  if (result.fair_price)
    std::printf("fair price %s CHF/kWh (cv %s) over %zu grid points\n",
                lec::format_double(*result.fair_price).c_str(),
                lec::format_double(*result.cv_min).c_str(), result.rows.size());
  else
    std::printf("CV undefined at every grid point; no fair price\n");
  if (!result.excluded_households.empty()) {
    std::printf("excluded from CV:");
    for (const auto& id : result.excluded_households) std::printf(" %s", id.c_str());
    std::printf("\n");
  }
  return kExitOk;
}

int cmd_serve(const Options& o) {
  return lec::service::serve(lec::service::ServiceConfig::from_env(), o.seed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local electricity community settlement and price assessment"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", o.scenario,
                    "Scenario directory or manifest; 'table1' selects the bundled scenario")
        ->capture_default_str();
    cmd->add_option("--seed", o.seed, "Seed of the bundled synthetic scenario")
        ->capture_default_str();
    cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
    cmd->add_option("--gamma", o.gamma, "Network-charge reduction for local exchange")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--local-price", o.local_price, "Internal exchange price, CHF/kWh")
        ->check(CLI::NonNegativeNumber);
    cmd->add_flag("--levies-on-local", o.levies_on_local,
                  "Charge levies on locally exchanged energy");
    cmd->add_option("--fill-gaps", o.fill_gaps, "Missing intervals: none (error) or zero")
        ->check(CLI::IsMember({"none", "zero"}))
        ->capture_default_str();
  };

  auto* synth = app.add_subcommand("synth", "Write the bundled synthetic scenario");
  synth->add_option("--seed", o.seed, "Generator seed")->capture_default_str();
  synth->add_option("--out", o.out, "Scenario directory")->required();

  auto* settle = app.add_subcommand("settle", "Settle a scenario and write ledgers and metrics");
  add_common(settle);
  settle->add_option("--mode", o.mode, "ref, lec or both")
      ->check(CLI::IsMember({"ref", "lec", "both"}))
      ->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Sweep the internal price and report the CV optimum");
  add_common(sweep);
  sweep->add_option("--sweep-min", o.sweep_min, "Lowest price, CHF/kWh")->capture_default_str();
  sweep->add_option("--sweep-max", o.sweep_max, "Highest price, CHF/kWh")->capture_default_str();
  sweep->add_option("--sweep-step", o.sweep_step, "Grid step, CHF/kWh")->capture_default_str();

  auto* serve = app.add_subcommand("serve", "Run the evaluation HTTP service");
  serve->add_option("--seed", o.seed, "Seed of the preloaded bundled scenario")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*synth) return cmd_synth(o);
    if (*settle) return cmd_settle(o);
    if (*sweep) return cmd_sweep(o);
    if (*serve) return cmd_serve(o);
  } catch (const lec::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const lec::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitInput;
  } catch (const lec::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitInput;
  } catch (const lec::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitInput;
}
