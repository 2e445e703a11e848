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


// Naive per-interval settlement written directly from the model equations,
// on plain nested vectors. Shares no code with the engine so it can serve as
// an independent oracle.

#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace lec::testing {

struct OracleTariffs {
  double retail_import;
  double feed_in;
  double local_price;
  double network_fee;
  double levies;
  double gamma;
  bool levies_on_local;
};

struct OracleResult {
  // [household][interval]
  std::vector<std::vector<double>> self, buy, sell;
  std::vector<std::vector<double>> ref_import, ref_export;
  std::vector<std::vector<double>> lec_import, lec_export;
  std::vector<double> local;  // [interval]
  std::vector<double> cost_ref, cost_lec;  // [household]
};

/// Recomputes both cost vectors of `r` for prices `p`, interval by interval.
inline void oracle_costs(OracleResult& r, const OracleTariffs& p) {
  const std::size_t n = r.self.size(), T = r.local.size();
  for (std::size_t i = 0; i < n; ++i) {
    r.cost_ref[i] = 0.0;
    r.cost_lec[i] = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      r.cost_ref[i] += r.ref_import[i][t] * p.retail_import - r.ref_export[i][t] * p.feed_in;
      const double buy_price = p.local_price + (1.0 - p.gamma) * p.network_fee +
                               (p.levies_on_local ? p.levies : 0.0);
      r.cost_lec[i] += r.buy[i][t] * buy_price - r.sell[i][t] * p.local_price +
                       r.lec_import[i][t] * p.retail_import - r.lec_export[i][t] * p.feed_in;
    }
  }
}

inline OracleResult oracle_settle(const std::vector<std::vector<double>>& con,
                                  const std::vector<std::vector<double>>& gen,
                                  const OracleTariffs& p) {
  const std::size_t n = con.size(), T = con.front().size();
  auto grid = [&] { return std::vector<std::vector<double>>(n, std::vector<double>(T, 0.0)); };
  OracleResult r{grid(), grid(), grid(), grid(), grid(), grid(), grid(),
                 std::vector<double>(T, 0.0), std::vector<double>(n, 0.0),
                 std::vector<double>(n, 0.0)};

  for (std::size_t t = 0; t < T; ++t) {
    double lec_sur = 0.0, lec_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      r.self[i][t] = std::min(con[i][t], gen[i][t]);
      r.ref_import[i][t] = con[i][t] - r.self[i][t];
      r.ref_export[i][t] = gen[i][t] - r.self[i][t];
      lec_sur += gen[i][t] - r.self[i][t];
      lec_res += con[i][t] - r.self[i][t];
    }
    const double loc = std::min(lec_sur, lec_res);
    r.local[t] = loc;
    for (std::size_t i = 0; i < n; ++i) {
      const double res = con[i][t] - r.self[i][t];
      const double sur = gen[i][t] - r.self[i][t];
      r.buy[i][t] = lec_res > 0.0 ? res / lec_res * loc : 0.0;
      r.sell[i][t] = lec_sur > 0.0 ? sur / lec_sur * loc : 0.0;
      r.lec_import[i][t] = con[i][t] - r.self[i][t] - r.buy[i][t];
      r.lec_export[i][t] = sur - r.sell[i][t];
    }
  }
  oracle_costs(r, p);
  return r;
}

}  // namespace lec::testing
