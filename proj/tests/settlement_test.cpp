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


#include "lec/settlement.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "generators.hpp"
#include "oracle.hpp"

namespace lec {
namespace {

using testing::make_community;

constexpr double kTol = 1e-9;

SettlementLedger single_row_ledger(SettlementMode mode, IntervalSettlement row) {
  return SettlementLedger(mode, {"1"}, testing::kT0, 15, {{row}},
                          {mode == SettlementMode::lec ? row.local_buy_kwh : 0.0});
}

TEST(SelfConsume, Cases) {
  auto a = self_consume(3.0, 1.0);
  EXPECT_EQ(a.self, 1.0);
  EXPECT_EQ(a.residual_demand, 2.0);
  EXPECT_EQ(a.surplus, 0.0);
  auto b = self_consume(1.0, 3.0);
  EXPECT_EQ(b.self, 1.0);
  EXPECT_EQ(b.residual_demand, 0.0);
  EXPECT_EQ(b.surplus, 2.0);
  auto c = self_consume(2.0, 2.0);
  EXPECT_EQ(c.self, 2.0);
  EXPECT_EQ(c.residual_demand, 0.0);
  EXPECT_EQ(c.surplus, 0.0);
  EXPECT_THROW(self_consume(-1.0, 0.0), DataError);
  EXPECT_THROW(self_consume(0.0, std::nan("")), DataError);
}

TEST(SettleReference, SingleProsumer) {
  auto ledger = settle_reference(make_community({{2.0}}, {{3.0}}));
  EXPECT_EQ(ledger.mode(), SettlementMode::reference);
  const auto& s = ledger.at(0, 0);
  EXPECT_EQ(s.self_kwh, 2.0);
  EXPECT_EQ(s.import_kwh, 0.0);
  EXPECT_EQ(s.export_kwh, 1.0);
  EXPECT_EQ(s.local_buy_kwh, 0.0);
  EXPECT_EQ(s.local_sell_kwh, 0.0);
}

TEST(SettleReference, ConsumerImportsEverything) {
  std::vector<double> con{0.3, 0.0, 1.7, 2.2};
  auto c = make_community({con}, {{0, 0, 0, 0}});
  auto ledger = settle_reference(c);
  for (std::size_t t = 0; t < con.size(); ++t) EXPECT_EQ(ledger.at(0, t).import_kwh, con[t]);
}

TEST(SettleLec, TwoHouseholdsForcedExchange) {
  // A: surplus 2, B: residual 1.
  auto ledger = settle_lec(make_community({{0.0}, {1.0}}, {{2.0}, {0.0}}));
  EXPECT_EQ(ledger.local_exchange_kwh()[0], 1.0);
  EXPECT_EQ(ledger.at(1, 0).local_buy_kwh, 1.0);
  EXPECT_EQ(ledger.at(0, 0).local_sell_kwh, 1.0);
  EXPECT_EQ(ledger.at(0, 0).export_kwh, 1.0);
  EXPECT_EQ(ledger.at(1, 0).import_kwh, 0.0);
}

TEST(SettleLec, ThreeHouseholdsProportionalSellers) {
  auto ledger = settle_lec(make_community({{0.0}, {0.0}, {3.0}}, {{4.0}, {2.0}, {0.0}}));
  EXPECT_DOUBLE_EQ(ledger.local_exchange_kwh()[0], 3.0);
  EXPECT_DOUBLE_EQ(ledger.at(0, 0).local_sell_kwh, 2.0);
  EXPECT_DOUBLE_EQ(ledger.at(1, 0).local_sell_kwh, 1.0);
  EXPECT_DOUBLE_EQ(ledger.at(2, 0).local_buy_kwh, 3.0);
  EXPECT_DOUBLE_EQ(ledger.at(0, 0).export_kwh, 2.0);
  EXPECT_DOUBLE_EQ(ledger.at(1, 0).export_kwh, 1.0);
  EXPECT_EQ(ledger.at(2, 0).import_kwh, 0.0);
}

TEST(SettleLec, ProportionalBuyersWhenSurplusIsShort) {
  // Surplus 1 split over residuals 1 and 3.
  auto ledger = settle_lec(make_community({{0.0}, {1.0}, {3.0}}, {{1.0}, {0.0}, {0.0}}));
  EXPECT_DOUBLE_EQ(ledger.at(1, 0).local_buy_kwh, 0.25);
  EXPECT_DOUBLE_EQ(ledger.at(2, 0).local_buy_kwh, 0.75);
  EXPECT_DOUBLE_EQ(ledger.at(1, 0).import_kwh, 0.75);
  EXPECT_DOUBLE_EQ(ledger.at(2, 0).import_kwh, 2.25);
  EXPECT_EQ(ledger.at(0, 0).export_kwh, 0.0);
}

TEST(SettleLec, NoSurplusMatchesReference) {
  auto c = make_community({{1.0, 2.0}, {0.5, 0.0}}, {{0.5, 0.0}, {0.0, 0.0}});
  auto lec = settle_lec(c);
  auto ref = settle_reference(c);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t t = 0; t < 2; ++t) EXPECT_EQ(lec.at(i, t), ref.at(i, t));
  EXPECT_EQ(lec.local_exchange_kwh()[0], 0.0);
}

TEST(SettleLec, PureConsumerCommunityHasNoExchange) {
  auto ledger = settle_lec(make_community({{1.0, 2.0}, {0.5, 0.1}}, {{0, 0}, {0, 0}}));
  for (double v : ledger.local_exchange_kwh()) EXPECT_EQ(v, 0.0);
}

TEST(CheckLedger, DetectsTampering) {
  auto c = make_community({{0.0}, {1.0}}, {{2.0}, {0.0}});
  auto good = settle_lec(c);
  EXPECT_NO_THROW(check_ledger(c, good));
  auto row = good.at(1, 0);
  row.import_kwh += 0.1;
  SettlementLedger bad(SettlementMode::lec, good.unit_ids(), good.start(), 15,
                       {{good.at(0, 0)}, {row}}, {1.0});
  EXPECT_THROW(check_ledger(c, bad), InvariantViolation);
}

TEST(CostReference, Arithmetic) {
  TariffSchedule t;
  auto imp = single_row_ledger(SettlementMode::reference, {0, 0, 0, 100.0, 0});
  EXPECT_NEAR(cost_reference(imp, t)[0], 24.10, 1e-12);
  auto exp = single_row_ledger(SettlementMode::reference, {0, 0, 0, 0, 100.0});
  EXPECT_NEAR(cost_reference(exp, t)[0], -6.00, 1e-12);
  auto zero = single_row_ledger(SettlementMode::reference, {});
  EXPECT_EQ(cost_reference(zero, t)[0], 0.0);
  EXPECT_THROW(cost_reference(single_row_ledger(SettlementMode::lec, {}), t), UsageError);
}

TEST(CostLec, Arithmetic) {
  TariffSchedule t;
  t.local_price = 0.10;
  auto buy = single_row_ledger(SettlementMode::lec, {0, 10.0, 0, 0, 0});
  EXPECT_NEAR(cost_lec(buy, t)[0], 1.5154, 1e-12);
  SettlementLedger sell(SettlementMode::lec, {"1"}, testing::kT0, 15, {{{0, 0, 10.0, 0, 0}}},
                        {10.0});
  EXPECT_NEAR(cost_lec(sell, t)[0], -1.00, 1e-12);
  EXPECT_THROW(cost_lec(single_row_ledger(SettlementMode::reference, {}), t), UsageError);
}

TEST(CostLec, DegeneratesToReferenceWithoutLocalFlows) {
  TariffSchedule t;
  IntervalSettlement row{1.0, 0.0, 0.0, 12.5, 3.25};
  EXPECT_DOUBLE_EQ(cost_lec(single_row_ledger(SettlementMode::lec, row), t)[0],
                   cost_reference(single_row_ledger(SettlementMode::reference, row), t)[0]);
}

TEST(LedgerCsv, ReferenceWritesZeroLocalColumns) {
  auto ledger = settle_reference(make_community({{2.0}}, {{3.0}}));
  std::ostringstream out;
  write_ledger_csv(ledger, out);
  EXPECT_EQ(out.str(),
            "unit_id,timestamp,self_kwh,local_buy_kwh,local_sell_kwh,import_kwh,export_kwh\n"
            "1,2025-01-01T00:00:00Z,2,0,0,0,1\n");
}

// ---------------------------------------------------------------------------
// Properties over randomized communities
// ---------------------------------------------------------------------------

class SettlementProperties : public ::testing::Test {
 protected:
  std::mt19937_64 rng{20260101};
  static constexpr int kCases = 200;
};

TEST_F(SettlementProperties, BalanceIdentities) {
  for (int k = 0; k < kCases; ++k) {
    auto rc = testing::random_case(rng);
    auto c = make_community(rc.con, rc.gen);
    auto ref = settle_reference(c);
    auto lec = settle_lec(c);
    ASSERT_NO_THROW(check_ledger(c, ref));
    ASSERT_NO_THROW(check_ledger(c, lec));
  }
}

TEST_F(SettlementProperties, LecDominatesReference) {
  for (int k = 0; k < kCases; ++k) {
    auto rc = testing::random_case(rng);
    auto c = make_community(rc.con, rc.gen);
    auto ref = settle_reference(c);
    auto lec = settle_lec(c);
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t t = 0; t < c.intervals(); ++t) {
        ASSERT_LE(lec.at(i, t).import_kwh, ref.at(i, t).import_kwh);
        ASSERT_LE(lec.at(i, t).export_kwh, ref.at(i, t).export_kwh);
      }
  }
}

TEST_F(SettlementProperties, ScaleEquivariance) {
  for (int k = 0; k < 50; ++k) {
    auto rc = testing::random_case(rng);
    const double s = testing::uniform(rng, 0.1, 10.0);
    auto scaled = rc;
    for (auto* m : {&scaled.con, &scaled.gen})
      for (auto& row : *m)
        for (double& v : row) v *= s;
    auto a = settle_lec(make_community(rc.con, rc.gen));
    auto b = settle_lec(make_community(scaled.con, scaled.gen));
    for (std::size_t i = 0; i < a.households(); ++i)
      for (std::size_t t = 0; t < a.intervals(); ++t) {
        const auto& x = a.at(i, t);
        const auto& y = b.at(i, t);
        const double tol = 1e-12 * s * 10.0;
        ASSERT_NEAR(y.self_kwh, s * x.self_kwh, tol);
        ASSERT_NEAR(y.local_buy_kwh, s * x.local_buy_kwh, tol);
        ASSERT_NEAR(y.local_sell_kwh, s * x.local_sell_kwh, tol);
        ASSERT_NEAR(y.import_kwh, s * x.import_kwh, tol);
        ASSERT_NEAR(y.export_kwh, s * x.export_kwh, tol);
      }
  }
}

TEST_F(SettlementProperties, PermutationEquivariance) {
  for (int k = 0; k < 50; ++k) {
    auto rc = testing::random_case(rng);
    std::vector<std::size_t> perm(rc.con.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto shuffled = rc;
    for (std::size_t j = 0; j < perm.size(); ++j) {
      shuffled.con[j] = rc.con[perm[j]];
      shuffled.gen[j] = rc.gen[perm[j]];
    }
    auto a = settle_lec(make_community(rc.con, rc.gen));
    auto b = settle_lec(make_community(shuffled.con, shuffled.gen));
    for (std::size_t j = 0; j < perm.size(); ++j)
      for (std::size_t t = 0; t < a.intervals(); ++t) {
        const auto& x = a.at(perm[j], t);
        const auto& y = b.at(j, t);
        ASSERT_NEAR(x.local_buy_kwh, y.local_buy_kwh, kTol);
        ASSERT_NEAR(x.local_sell_kwh, y.local_sell_kwh, kTol);
        ASSERT_NEAR(x.import_kwh, y.import_kwh, kTol);
        ASSERT_NEAR(x.export_kwh, y.export_kwh, kTol);
        ASSERT_EQ(x.self_kwh, y.self_kwh);
      }
  }
}

TEST_F(SettlementProperties, FairPriceNeverCostsAnyHousehold) {
  for (int k = 0; k < kCases; ++k) {
    auto rc = testing::random_case(rng);
    testing::make_price_fair(rng, rc.tariffs);
    ASSERT_LE(rc.tariffs.local_buy_unit_cost(), rc.tariffs.retail_import + 1e-12);
    auto c = make_community(rc.con, rc.gen);
    auto cref = cost_reference(settle_reference(c), rc.tariffs);
    auto clec = cost_lec(settle_lec(c), rc.tariffs);
    for (std::size_t i = 0; i < c.size(); ++i) ASSERT_GE(cref[i] - clec[i], -1e-9);
  }
}

TEST_F(SettlementProperties, MatchesNaiveOracle) {
  for (int k = 0; k < kCases; ++k) {
    auto rc = testing::random_case(rng);
    auto c = make_community(rc.con, rc.gen);
    auto o = testing::oracle_settle(rc.con, rc.gen, testing::to_oracle(rc.tariffs));
    auto ref = settle_reference(c);
    auto lec = settle_lec(c);
    auto cref = cost_reference(ref, rc.tariffs);
    auto clec = cost_lec(lec, rc.tariffs);
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (std::size_t t = 0; t < c.intervals(); ++t) {
        ASSERT_NEAR(ref.at(i, t).self_kwh, o.self[i][t], kTol);
        ASSERT_NEAR(ref.at(i, t).import_kwh, o.ref_import[i][t], kTol);
        ASSERT_NEAR(ref.at(i, t).export_kwh, o.ref_export[i][t], kTol);
        ASSERT_NEAR(lec.at(i, t).local_buy_kwh, o.buy[i][t], kTol);
        ASSERT_NEAR(lec.at(i, t).local_sell_kwh, o.sell[i][t], kTol);
        ASSERT_NEAR(lec.at(i, t).import_kwh, o.lec_import[i][t], kTol);
        ASSERT_NEAR(lec.at(i, t).export_kwh, o.lec_export[i][t], kTol);
      }
      ASSERT_NEAR(cref[i], o.cost_ref[i], kTol);
      ASSERT_NEAR(clec[i], o.cost_lec[i], kTol);
    }
    for (std::size_t t = 0; t < c.intervals(); ++t)
      ASSERT_NEAR(lec.local_exchange_kwh()[t], o.local[t], kTol);
  }
}

}  // namespace
}  // namespace lec
