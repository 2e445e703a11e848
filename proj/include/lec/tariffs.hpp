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
#include <string>
#include <string_view>

#include <json.hpp>

#include "lec/errors.hpp"

namespace lec {

/// Network-charge reduction for local exchange without a change in voltage level.
inline constexpr double kGammaSameVoltageLevel = 0.4;
/// Network-charge reduction when the local exchange crosses voltage levels.
inline constexpr double kGammaOtherVoltageLevel = 0.2;

/// Flat prices in CHF/kWh. `retail_import` is the all-in retail tariff and
/// contains both `network_fee` and `levies`.
struct TariffSchedule {
  double retail_import = 0.241;
  double feed_in = 0.06;
  double local_price = 0.10;
  double network_fee = 0.0859;
  double levies = 0.0344;
  double gamma = kGammaSameVoltageLevel;
  /// Charge levies on locally purchased energy as well.
  bool levies_on_local = false;

  /// Throws ConfigError on negative/non-finite prices, gamma outside [0, 1],
  /// or components that exceed the retail tariff.
  void validate() const {
    auto check_price = [](double v, const char* key) {
      if (!std::isfinite(v) || v < 0.0)
        throw ConfigError(std::string("tariffs.") + key +
                          " must be a finite non-negative price");
    };
    check_price(retail_import, "retail_import");
    check_price(feed_in, "feed_in");
    check_price(local_price, "local_price");
    check_price(network_fee, "network_fee");
    check_price(levies, "levies");
    if (!std::isfinite(gamma) || gamma < 0.0 || gamma > 1.0)
      throw ConfigError("tariffs.gamma must lie in [0, 1]");
    if (network_fee + levies > retail_import)
      throw ConfigError(
          "tariffs.network_fee + tariffs.levies exceed tariffs.retail_import");
  }

  /// Per-kWh price a household pays for locally exchanged energy.
  double local_buy_unit_cost() const {
    return local_price + (1.0 - gamma) * network_fee + (levies_on_local ? levies : 0.0);
  }

  friend bool operator==(const TariffSchedule&, const TariffSchedule&) = default;
};

/// Energy component of the retail tariff: the upper bound of the fair
/// internal-price interval.
inline double energy_price(const TariffSchedule& t) {
  return t.retail_import - t.network_fee - t.levies;
}

enum class PriceVerdict { fair, below_feed_in, above_energy_price };

inline std::string_view to_string(PriceVerdict v) {
  switch (v) {
    case PriceVerdict::fair: return "fair";
    case PriceVerdict::below_feed_in: return "below_feed_in";
    case PriceVerdict::above_energy_price: return "above_energy_price";
  }
  return "unknown";
}

/// Prices outside [feed_in, energy_price] are reported, never rejected.
inline PriceVerdict validate_local_price(const TariffSchedule& t) {
  if (t.local_price < t.feed_in) return PriceVerdict::below_feed_in;
  if (t.local_price > energy_price(t)) return PriceVerdict::above_energy_price;
  return PriceVerdict::fair;
}

inline nlohmann::ordered_json tariffs_to_json(const TariffSchedule& t) {
  nlohmann::ordered_json j;
  j["retail_import"] = t.retail_import;
  j["feed_in"] = t.feed_in;
  j["local_price"] = t.local_price;
  j["network_fee"] = t.network_fee;
  j["levies"] = t.levies;
  j["gamma"] = t.gamma;
  j["levies_on_local"] = t.levies_on_local;
  return j;
}

/// Reads a `tariffs` block. Missing keys keep their defaults; unknown keys
/// and wrongly typed values raise ConfigError naming the key.
inline TariffSchedule tariffs_from_json(const nlohmann::json& j,
                                        TariffSchedule base = {}) {
  if (!j.is_object()) throw ConfigError("tariffs block must be an object");
  for (const auto& [key, value] : j.items()) {
    double* slot = key == "retail_import" ? &base.retail_import
                   : key == "feed_in"     ? &base.feed_in
                   : key == "local_price" ? &base.local_price
                   : key == "network_fee" ? &base.network_fee
                   : key == "levies"      ? &base.levies
                   : key == "gamma"       ? &base.gamma
                                          : nullptr;
    if (slot != nullptr) {
      if (!value.is_number())
        throw ConfigError("tariffs." + key + " must be a number");
      *slot = value.get<double>();
    } else if (key == "levies_on_local") {
      if (!value.is_boolean())
        throw ConfigError("tariffs.levies_on_local must be true or false");
      base.levies_on_local = value.get<bool>();
    } else {
      throw ConfigError("unknown tariff key '" + key + "'");
    }
  }
  base.validate();
  return base;
}

}  // namespace lec
