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


#include "lec/metrics.hpp"

#include <gtest/gtest.h>

#include <random>

#include "generators.hpp"

namespace lec {
namespace {

using testing::make_community;

TEST(Scr, ReferenceShare) {
  auto ledger = settle_reference(make_community({{40.0}}, {{100.0}}));
  ASSERT_TRUE(scr(ledger));
  EXPECT_DOUBLE_EQ(*scr(ledger), 0.40);
}

TEST(Scr, FullySelfConsumed) {
  auto ledger = settle_lec(make_community({{5.0, 3.0}}, {{2.0, 3.0}}));
  EXPECT_DOUBLE_EQ(*scr(ledger), 1.0);
}

TEST(Scr, UndefinedWithoutGeneration) {
  auto ledger = settle_lec(make_community({{1.0}}, {{0.0}}));
  EXPECT_FALSE(scr(ledger));
  EXPECT_FALSE(ler(ledger).ler_gen);
  ASSERT_TRUE(ler(ledger).ler_con);
  EXPECT_EQ(*ler(ledger).ler_con, 0.0);
}

TEST(Ler, ZeroForReference) {
  auto ledger = settle_reference(make_community({{1.0}, {2.0}}, {{3.0}, {0.0}}));
  auto r = ler(ledger);
  EXPECT_EQ(*r.ler_gen, 0.0);
  EXPECT_EQ(*r.ler_con, 0.0);
}

TEST(Ler, Arithmetic) {
  // Seller: generation 100 of which 10 sold locally; buyer: consumption 200.
  SettlementLedger ledger(SettlementMode::lec, {"A", "B"}, testing::kT0, 15,
                          {{{0, 0, 10.0, 0, 90.0}}, {{0, 10.0, 0, 190.0, 0}}}, {10.0});
  auto r = ler(ledger);
  EXPECT_DOUBLE_EQ(*r.ler_gen, 0.10);
  EXPECT_DOUBLE_EQ(*r.ler_con, 0.05);
}

TEST(GridInteraction, AggregatePeakInKw) {
  auto ledger = settle_reference(make_community({{1.0}, {2.0}}, {{0.0}, {0.0}}));
  auto g = grid_interaction(ledger, 15);
  EXPECT_DOUBLE_EQ(g.peak_import_kw, 12.0);
  EXPECT_DOUBLE_EQ(g.total_import_kwh, 3.0);
  EXPECT_EQ(g.peak_export_kw, 0.0);
  EXPECT_DOUBLE_EQ(grid_interaction(ledger, 60).peak_import_kw, 3.0);
}

TEST(Savings, Cases) {
  auto a = saving(100.0, 90.0);
  EXPECT_DOUBLE_EQ(a.savings_chf, 10.0);
  EXPECT_DOUBLE_EQ(*a.savings_pct, 0.10);
  auto b = saving(42.0, 42.0);
  EXPECT_EQ(b.savings_chf, 0.0);
  EXPECT_EQ(*b.savings_pct, 0.0);
  auto c = saving(-50.0, -60.0);
  EXPECT_DOUBLE_EQ(c.savings_chf, 10.0);
  EXPECT_DOUBLE_EQ(*c.savings_pct, 0.20);
  auto d = saving(0.004, -1.0);
  EXPECT_FALSE(d.savings_pct);
  EXPECT_THROW(savings({1.0}, {1.0, 2.0}), UsageError);
}

TEST(MetricsReport, JsonUsesNullForUndefined) {
  auto ledger = settle_reference(make_community({{1.0}}, {{0.0}}));
  auto costs = cost_reference(ledger, TariffSchedule{});
  auto j = metrics_to_json(compute_metrics(ledger, costs, costs));
  EXPECT_TRUE(j["scr"].is_null());
  EXPECT_TRUE(j["ler_gen"].is_null());
  EXPECT_EQ(j["per_household"][0]["unit_id"], "1");
  EXPECT_DOUBLE_EQ(j["per_household"][0]["peak_import_kw"].get<double>(), 4.0);
}

TEST(MetricsProperties, InvariantsOnRandomCommunities) {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 200; ++k) {
    auto rc = testing::random_case(rng);
    auto c = make_community(rc.con, rc.gen);
    auto ref = settle_reference(c);
    auto lec = settle_lec(c);
    auto gr = grid_interaction(ref);
    auto gl = grid_interaction(lec);

    double sum_con = 0, sum_gen = 0, sum_self = 0, sum_loc = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      sum_con += c[i].consumption().total();
      sum_gen += c[i].generation().total();
      for (const auto& s : lec.household(i)) sum_self += s.self_kwh;
    }
    for (double v : lec.local_exchange_kwh()) sum_loc += v;

    EXPECT_LE(gl.total_import_kwh, gr.total_import_kwh + 1e-9);
    EXPECT_LE(gl.total_export_kwh, gr.total_export_kwh + 1e-9);
    EXPECT_LE(gl.peak_import_kw, gr.peak_import_kw + 1e-9);
    EXPECT_LE(gl.peak_export_kw, gr.peak_export_kw + 1e-9);
    EXPECT_NEAR(sum_con - sum_self - sum_loc, gl.total_import_kwh, 1e-9);
    EXPECT_NEAR(sum_gen - sum_self - sum_loc, gl.total_export_kwh, 1e-9);

    auto rates = ler(lec);
    ASSERT_TRUE(rates.ler_con);
    EXPECT_GE(*rates.ler_con, 0.0);
    EXPECT_LE(*rates.ler_con, 1.0);
    if (sum_gen > 0.0) {
      ASSERT_TRUE(scr(lec) && scr(ref) && rates.ler_gen);
      EXPECT_GE(*scr(lec), *scr(ref) - 1e-12);
      EXPECT_LE(*scr(lec), 1.0 + 1e-12);
      EXPECT_LE(*rates.ler_gen, *scr(lec) + 1e-12);
      EXPECT_NEAR(*rates.ler_gen * sum_gen, *rates.ler_con * sum_con,
                  1e-9 * std::max(1.0, sum_loc));
    }
  }
}

}  // namespace
}  // namespace lec
