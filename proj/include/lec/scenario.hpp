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

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lec/errors.hpp"
#include "lec/metering.hpp"
#include "lec/tariffs.hpp"

namespace lec {

struct Scenario {
  std::string name;
  Community community;
  TariffSchedule tariffs;
  std::string description;
  std::string provenance;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// ---------------------------------------------------------------------------
// Synthetic seven-unit district
// ---------------------------------------------------------------------------
//
// Only annual totals per unit are known, so the 15-minute shapes below are
// synthetic: a clear-sky solar elevation envelope with daily cloudiness for
// PV, and role-based daily load curves for demand. Each series is scaled so
// its annual sum equals the target exactly (up to rounding).

enum class UnitRole { apartment, office, fitness };

struct Table1Unit {
  const char* id;
  double pv_capacity_kwp;
  double generation_kwh;
  double demand_kwh;
  UnitRole role;
};

/// Annual PV capacity, generation and demand of the seven-unit district.
/// Roles are an assumption: the published data does not map units to uses.
inline constexpr std::array<Table1Unit, 7> kTable1Units{{
    {"1", 7.3, 4418.0, 4682.0, UnitRole::apartment},
    {"2", 2.1, 1060.0, 3291.0, UnitRole::apartment},
    {"3", 26.7, 16760.0, 15863.0, UnitRole::office},
    {"4", 0.0, 0.0, 2269.0, UnitRole::apartment},
    {"5", 0.0, 0.0, 2264.0, UnitRole::apartment},
    {"6", 0.0, 0.0, 3511.0, UnitRole::apartment},
    {"7", 0.0, 0.0, 12195.0, UnitRole::fitness},
}};

namespace synth {

inline constexpr double kLatitudeDeg = 47.40;
inline constexpr double kLongitudeDeg = 8.61;
/// Load curves are defined on local standard time (UTC+1, no DST shift).
inline constexpr int kLocalOffsetHours = 1;
inline constexpr int kYear = 2025;
inline constexpr int kResolutionMinutes = 15;
/// Relative amplitude of per-interval demand noise (uniform, +/-).
inline constexpr double kDemandNoise = 0.12;
/// Relative amplitude of per-interval PV noise within a day (uniform, +/-).
inline constexpr double kPvNoise = 0.10;

/// Uniform [0, 1) from the top 53 bits; independent of the standard
/// library's distribution implementations.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Sine of the solar elevation at a UTC instant.
inline double sin_solar_elevation(int day_of_year, double utc_hours) {
  constexpr double deg = std::numbers::pi / 180.0;
  const double decl =
      23.44 * deg * std::sin(2.0 * std::numbers::pi * (284.0 + day_of_year) / 365.0);
  const double solar_time = utc_hours + kLongitudeDeg / 15.0;
  const double hour_angle = 15.0 * deg * (solar_time - 12.0);
  const double lat = kLatitudeDeg * deg;
  return std::sin(lat) * std::sin(decl) +
         std::cos(lat) * std::cos(decl) * std::cos(hour_angle);
}

/// Smooth bump centred at `mu` hours with width `sigma`.
inline double bump(double hour, double mu, double sigma) {
  const double d = (hour - mu) / sigma;
  return std::exp(-0.5 * d * d);
}

/// Relative demand (arbitrary units) by role at local hour-of-day.
inline double load_shape(UnitRole role, double hour, bool weekend, double winterness) {
  switch (role) {
    case UnitRole::apartment: {
      const double morning = weekend ? 0.45 * bump(hour, 9.0, 1.5) : 0.55 * bump(hour, 7.0, 1.0);
      const double midday = weekend ? 0.35 * bump(hour, 13.0, 2.5) : 0.15 * bump(hour, 12.5, 1.5);
      const double evening = 1.0 * bump(hour, 19.5, 1.6);
      return (0.22 + morning + midday + evening) * (1.0 + 0.30 * winterness);
    }
    case UnitRole::office: {
      double occupied = 0.0;
      if (!weekend) occupied = 1.0 / (1.0 + std::exp(-(hour - 8.0) * 2.0)) *
                               (1.0 / (1.0 + std::exp((hour - 17.5) * 2.0)));
      return (0.30 + 0.85 * occupied) * (1.0 + 0.10 * winterness);
    }
    case UnitRole::fitness: {
      const bool open = hour >= 6.0 && hour < 22.5;
      if (!open) return 0.18;
      const double morning = weekend ? 0.30 * bump(hour, 10.0, 2.0) : 0.35 * bump(hour, 7.5, 1.0);
      const double midday = weekend ? 0.30 * bump(hour, 14.0, 2.5) : 0.20 * bump(hour, 12.5, 1.0);
      const double evening = 1.0 * bump(hour, 19.0, 1.4);
      return (0.30 + morning + midday + evening) * (1.0 + 0.15 * winterness);
    }
  }
  return 0.0;
}

inline void scale_to_total(std::vector<double>& v, double target) {
  double raw = 0.0;
  for (double x : v) raw += x;
  if (target == 0.0 || raw == 0.0) {
    std::fill(v.begin(), v.end(), 0.0);
    return;
  }
  const double k = target / raw;
  for (double& x : v) x *= k;
}

}  // namespace synth

inline constexpr const char* kTable1Provenance =
    "synthetic 15-minute profiles for 2025 reconstructed from annual per-unit totals "
    "(PV capacity, generation, demand) of a seven-unit district; diurnal and seasonal "
    "shapes, weekday/weekend factors and noise are documented constants; unit roles "
    "assumed: units 1,2,4,5,6 apartments, unit 3 office, unit 7 fitness facility";

/// Deterministic for a given seed: a full year at 15-minute resolution whose
/// annual totals per unit match the district table.
inline Scenario synth_table1(std::uint64_t seed = 42) {
  using namespace std::chrono;
  std::mt19937_64 rng(seed);
  const sys_days first_day = year{synth::kYear} / January / 1;
  const sys_days next_year = year{synth::kYear + 1} / January / 1;
  const auto days_in_year = static_cast<int>((next_year - first_day).count());
  const int per_day = 24 * 60 / synth::kResolutionMinutes;
  const std::size_t n = static_cast<std::size_t>(days_in_year) * per_day;

  // Shared weather: a daily clearness factor, cloudier in winter.
  std::vector<double> clearness(days_in_year);
  for (int d = 0; d < days_in_year; ++d) {
    const double winterness = std::cos(2.0 * std::numbers::pi * (d + 1 - 15) / 365.0);
    const double u = synth::uniform01(rng);
    const double p_clear = 0.55 - 0.25 * winterness;
    clearness[d] = u < p_clear ? 0.75 + 0.25 * synth::uniform01(rng)
                               : 0.10 + 0.55 * synth::uniform01(rng);
  }

  std::vector<double> pv_shape(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const int d = static_cast<int>(k / per_day);
    const double utc_hours = ((k % per_day) + 0.5) * synth::kResolutionMinutes / 60.0;
    const double s = synth::sin_solar_elevation(d + 1, utc_hours);
    const double noise = 1.0 + synth::kPvNoise * (2.0 * synth::uniform01(rng) - 1.0);
    if (s > 0.0) pv_shape[k] = std::pow(s, 1.15) * clearness[d] * noise;
  }

  const Timestamp start{first_day};
  std::vector<HouseholdMeter> households;
  for (const auto& unit : kTable1Units) {
    std::vector<double> gen(n, 0.0);
    if (unit.generation_kwh > 0.0) {
      for (std::size_t k = 0; k < n; ++k) gen[k] = unit.pv_capacity_kwp * pv_shape[k];
      synth::scale_to_total(gen, unit.generation_kwh);
    }
    std::vector<double> con(n);
    for (std::size_t k = 0; k < n; ++k) {
      const int d = static_cast<int>(k / per_day);
      const sys_days day = first_day + days{d};
      const bool weekend = weekday{day}.iso_encoding() >= 6;
      const double winterness = std::cos(2.0 * std::numbers::pi * (d + 1 - 15) / 365.0);
      double local_hour = ((k % per_day) + 0.5) * synth::kResolutionMinutes / 60.0 +
                          synth::kLocalOffsetHours;
      if (local_hour >= 24.0) local_hour -= 24.0;
      const double noise = 1.0 + synth::kDemandNoise * (2.0 * synth::uniform01(rng) - 1.0);
      con[k] = synth::load_shape(unit.role, local_hour, weekend, winterness) * noise;
    }
    synth::scale_to_total(con, unit.demand_kwh);
    households.emplace_back(unit.id,
                            IntervalSeries(start, synth::kResolutionMinutes, std::move(con)),
                            IntervalSeries(start, synth::kResolutionMinutes, std::move(gen)));
  }

  Scenario s{"table1", Community(std::move(households)), TariffSchedule{},
             "seven-unit district (three PV units, four consumers), seed " +
                 std::to_string(seed),
             kTable1Provenance};
  return s;
}

// ---------------------------------------------------------------------------
// Scenario files
// ---------------------------------------------------------------------------
//
// A scenario is a directory holding `scenario.json` (the manifest) and the
// meter CSV it references:
//
//   { "name": ..., "description": ..., "meters_csv": "meters.csv",
//     "tariffs": { ... }, "provenance": ... }

inline constexpr const char* kManifestName = "scenario.json";
inline constexpr const char* kDefaultMetersName = "meters.csv";

inline void save_scenario(const Scenario& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / kDefaultMetersName, std::ios::binary);
    if (!out) throw DataError("cannot write " + (dir / kDefaultMetersName).string());
    write_meter_csv(s.community, out);
  }
  nlohmann::ordered_json m;
  m["name"] = s.name;
  m["description"] = s.description;
  m["meters_csv"] = kDefaultMetersName;
  m["tariffs"] = tariffs_to_json(s.tariffs);
  m["provenance"] = s.provenance;
  std::ofstream out(dir / kManifestName, std::ios::binary);
  if (!out) throw DataError("cannot write " + (dir / kManifestName).string());
  out << m.dump(2) << '\n';
}

/// `path` is a scenario directory or a manifest file. The meter CSV path in
/// the manifest is resolved relative to the manifest.
inline Scenario load_scenario(const std::filesystem::path& path,
                              FillGaps fill_gaps = FillGaps::none) {
  namespace fs = std::filesystem;
  const fs::path manifest_path = fs::is_directory(path) ? path / kManifestName : path;
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw DataError("cannot open scenario manifest " + manifest_path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  nlohmann::json m;
  try {
    m = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Report the line of the failing byte.
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i)
      if (text[i] == '\n') ++line;
    throw DataError(manifest_path.string() + ":" + std::to_string(line) +
                    ": invalid JSON: " + e.what());
  }
  if (!m.is_object()) throw DataError(manifest_path.string() + ": manifest must be an object");

  auto text_field = [&](const char* key, bool required) -> std::string {
    if (!m.contains(key)) {
      if (required)
        throw DataError(manifest_path.string() + ": missing key '" + key + "'");
      return {};
    }
    if (!m[key].is_string())
      throw DataError(manifest_path.string() + ": '" + key + "' must be a string");
    return m[key].get<std::string>();
  };
  for (const auto& [key, value] : m.items()) {
    if (key != "name" && key != "description" && key != "meters_csv" && key != "tariffs" &&
        key != "provenance")
      throw ConfigError(manifest_path.string() + ": unknown manifest key '" + key + "'");
  }

  const std::string name = text_field("name", true);
  const std::string meters = text_field("meters_csv", true);
  TariffSchedule tariffs;
  if (m.contains("tariffs")) {
    try {
      tariffs = tariffs_from_json(m["tariffs"]);
    } catch (const ConfigError& e) {
      throw ConfigError(manifest_path.string() + ": " + e.what());
    }
  }
  const fs::path csv_path = manifest_path.parent_path() / meters;
  if (!fs::exists(csv_path))
    throw DataError(manifest_path.string() + ": meter csv " + csv_path.string() +
                    " does not exist");
  return Scenario{name, load_community_file(csv_path.string(), fill_gaps), tariffs,
                  text_field("description", false), text_field("provenance", false)};
}

}  // namespace lec
