#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "dgame/dgame.hpp"
#include "reference_engine.hpp"

using namespace dgame;

namespace {

std::vector<std::uint8_t> bits(std::initializer_list<int> v) {
  std::vector<std::uint8_t> out;
  for (int b : v) out.push_back(static_cast<std::uint8_t>(b));
  return out;
}

StrategyTable constant_table(int m, Action a) {
  return StrategyTable(std::vector<Action>(std::size_t{1} << m, a));
}

MarketParams params(int n, int m, int s, double lambda = 1.0, double d = 100.0, double pf = 100.0,
                    bool fundamental = true) {
  return MarketParams{n, m, s, lambda, d, pf, fundamental};
}

}  // namespace

TEST(EncodeHistory, Examples) {
  EXPECT_EQ(encode_history(bits({0, 0, 0}), 3), 0u);
  EXPECT_EQ(encode_history(bits({1, 1, 1}), 3), 7u);
  // oldest first: b(t-2)=1, b(t-1)=0, b(t)=1
  EXPECT_EQ(encode_history(bits({1, 0, 1}), 3), 5u);
  EXPECT_EQ(encode_history(bits({0, 0, 1}), 3), 1u);
  EXPECT_EQ(encode_history(bits({1, 0, 0}), 3), 4u);
}

TEST(EncodeHistory, Errors) {
  EXPECT_THROW(encode_history(bits({0, 1}), 3), ParameterError);
  EXPECT_THROW(encode_history(bits({0, 2, 1}), 3), ParameterError);
  EXPECT_THROW(encode_history(bits({}), 0), ParameterError);
}

TEST(EncodeHistory, BijectiveRoundTrip) {
  for (int m = 1; m <= 10; ++m) {
    for (std::uint32_t h = 0; h < (1u << m); ++h) {
      const HistoryWindow w(m, h);
      const auto b = w.bits();
      ASSERT_EQ(b.size(), static_cast<std::size_t>(m));
      EXPECT_EQ(encode_history(b, m), h);
      EXPECT_EQ(HistoryWindow::from_bits(b), w);
    }
  }
}

TEST(HistoryWindow, PushShiftsInMostRecentBit) {
  HistoryWindow w = HistoryWindow::from_bits(bits({1, 0, 1}));
  w.push(1);
  EXPECT_EQ(w.bits(), bits({0, 1, 1}));
  w.push(0);
  EXPECT_EQ(w.bits(), bits({1, 1, 0}));
  EXPECT_THROW(HistoryWindow(3, 8), ParameterError);
}

TEST(StrategyTable, Validation) {
  EXPECT_THROW(StrategyTable(std::vector<Action>(3, Action::buy)), ParameterError);
  EXPECT_THROW(StrategyTable(std::vector<Action>{Action::buy, static_cast<Action>(0)}), ParameterError);
  EXPECT_EQ(constant_table(4, Action::sell).memory(), 4);
}

TEST(GenerateStrategy, ShapeAndDeterminism) {
  Rng a(1), b(1), c(2);
  const auto ta = generate_strategy(a, 8);
  EXPECT_EQ(ta.size(), 256u);
  EXPECT_EQ(ta, generate_strategy(b, 8));
  EXPECT_NE(ta, generate_strategy(c, 8));
  Rng r(0);
  EXPECT_THROW(generate_strategy(r, kMaxMemory + 1), ParameterError);
  EXPECT_THROW(generate_strategy(r, 0), ParameterError);
}

TEST(GenerateStrategy, EntriesAreBalanced) {
  Rng rng(20240601);
  constexpr int tables = 10000;
  long sum = 0;
  std::array<long, 8> per_entry{};
  for (int k = 0; k < tables; ++k) {
    const auto t = generate_strategy(rng, 3);
    for (std::uint32_t h = 0; h < 8; ++h) {
      sum += to_int(t[h]);
      per_entry[h] += to_int(t[h]);
    }
  }
  EXPECT_NEAR(static_cast<double>(sum) / (8.0 * tables), 0.0, 0.05);
  for (long e : per_entry) EXPECT_NEAR(static_cast<double>(e) / tables, 0.0, 0.05);
}

TEST(BestStrategy, UniqueMaximumConsumesNoDraw) {
  Rng a(5), b(5);
  const std::array<double, 2> scores{3.0, -1.0};
  EXPECT_EQ(best_strategy_index(scores, a), 0u);
  EXPECT_EQ(a.next(), b.next());
  const std::array<double, 3> later{-2.0, 0.5, 0.25};
  EXPECT_EQ(best_strategy_index(later, a), 1u);
}

TEST(BestStrategy, TwoWayTieIsFair) {
  Rng rng(99);
  const std::array<double, 2> scores{2.0, 2.0};
  constexpr int draws = 10000;
  int zeros = 0;
  for (int k = 0; k < draws; ++k) zeros += best_strategy_index(scores, rng) == 0 ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(zeros) / draws, 0.5, 0.02);
}

TEST(BestStrategy, EighteenWayTieIsUniform) {
  Rng rng(7);
  const std::vector<double> scores(18, 0.0);
  constexpr int draws = 18 * 2000;
  std::array<int, 18> hits{};
  for (int k = 0; k < draws; ++k) ++hits[best_strategy_index(scores, rng)];
  for (int h : hits) EXPECT_NEAR(static_cast<double>(h) / draws, 1.0 / 18.0, 0.02);
}

TEST(BestStrategy, PartialTieOnlyPicksMaxima) {
  Rng rng(3);
  const std::array<double, 4> scores{1.0, 4.0, -3.0, 4.0};
  std::array<int, 4> hits{};
  for (int k = 0; k < 4000; ++k) ++hits[best_strategy_index(scores, rng)];
  EXPECT_EQ(hits[0], 0);
  EXPECT_EQ(hits[2], 0);
  EXPECT_NEAR(hits[1] / 4000.0, 0.5, 0.03);
}

TEST(Fundamental, Signal) {
  EXPECT_EQ(fundamental_signal(120, 100), Action::sell);
  EXPECT_EQ(fundamental_signal(80, 100), Action::buy);
  EXPECT_FALSE(fundamental_signal(100, 100).has_value());
}

TEST(Fundamental, Probability) {
  EXPECT_EQ(fundamental_probability(100, 100, 10), 0.0);
  EXPECT_NEAR(fundamental_probability(110, 100, 10), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(fundamental_probability(90, 100, 10), 0.36788, 1e-5);
  EXPECT_NEAR(fundamental_probability(200, 100, 10), 4.54e-4, 1e-6);
  EXPECT_NEAR(fundamental_probability(200, 100, 10), 10.0 * std::exp(-10.0), 1e-18);
  EXPECT_EQ(fundamental_probability(1e300, 100, std::numeric_limits<double>::infinity()), 0.0);
  EXPECT_THROW(fundamental_probability(100, 100, 0.0), ParameterError);
  for (double p = 1.0; p < 500.0; p += 0.37) {
    const double q = fundamental_probability(p, 100, 7.5);
    EXPECT_GE(q, 0.0);
    EXPECT_LE(q, std::exp(-1.0) + 1e-16);
  }
}

TEST(Profit, TotalProfitAndOrderParameter) {
  EXPECT_EQ(total_profit(11, 11), 121.0);
  EXPECT_EQ(total_profit(11, -11), -121.0);
  EXPECT_EQ(total_profit(0, 5), 0.0);
  EXPECT_EQ(order_parameter(11, 11), 1.0);
  EXPECT_EQ(order_parameter(0, 101), 0.0);
  EXPECT_NEAR(order_parameter(-5, 11), -0.454545, 1e-6);
  EXPECT_THROW(order_parameter(12, 11), ParameterError);
}

TEST(Step, AllBuyArithmetic) {
  const int n = 11;
  std::vector<std::vector<StrategyTable>> tables(n, {constant_table(2, Action::buy)});
  Market market(params(n, 2, 1, 11.0, 100.0, 100.0, false), tables, HistoryWindow(2, 2));
  Rng rng(0);
  const auto rec = market.step(rng);
  EXPECT_EQ(rec.imbalance, 11);
  EXPECT_EQ(rec.return_, 1.0);
  EXPECT_EQ(rec.direction_bit, 1);
  EXPECT_NEAR(rec.price_after, 100.0 * std::exp(1.0), 1e-12);
  EXPECT_EQ(market.history(), 0b01u);
  EXPECT_EQ(market.time(), 1);
  // first update pairs the initial recommendation (+1) with A = 11
  EXPECT_EQ(market.agent(0).scores[0], 11.0);
}

TEST(Step, ScoreChangesByPrevActionTimesImbalance) {
  const int m = 1;
  const StrategyTable sell = constant_table(m, Action::sell);
  const StrategyTable follow(std::vector<Action>{Action::sell, Action::buy});
  std::vector<std::vector<StrategyTable>> tables(5, {sell, follow});
  Market market(params(5, m, 2, 1.0, 100.0, 100.0, false), tables, HistoryWindow(m, 1));
  Rng rng(11);
  market.step(rng);
  const auto before = market.agent(0);
  const auto r2 = market.step(rng);
  const auto after = market.agent(0);
  for (std::size_t j = 0; j < 2; ++j) {
    EXPECT_EQ(after.scores[j] - before.scores[j], to_int(before.prev_actions[j]) * static_cast<double>(r2.imbalance));
  }
  // strategy recommending -1 against A = 4 loses 4
  TechnicalAgent a;
  a.scores = {0.0, 0.0};
  a.prev_actions = {Action::sell, Action::buy};
  for (std::size_t j = 0; j < 2; ++j) a.scores[j] += to_int(a.prev_actions[j]) * 4.0;
  EXPECT_EQ(a.scores[0], -4.0);
  EXPECT_EQ(a.relative_payoff(), -8.0);
}

TEST(Step, RelativePayoffNeedsTwoStrategies) {
  TechnicalAgent a;
  a.scores = {1.0, 2.0, 3.0};
  EXPECT_THROW((void)a.relative_payoff(), ParameterError);
}

TEST(Step, ZeroImbalanceDrawsCoin) {
  std::vector<std::vector<StrategyTable>> tables{{constant_table(1, Action::buy)}, {constant_table(1, Action::sell)}};
  int ups = 0;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    Market market(params(2, 1, 1, 1.0, 100.0, 100.0, false), tables, HistoryWindow(1, 0));
    Rng rng(seed);
    const auto rec = market.step(rng);
    ASSERT_EQ(rec.imbalance, 0);
    ASSERT_EQ(rec.return_, 0.0);
    ups += rec.direction_bit;
  }
  EXPECT_NEAR(ups / 2000.0, 0.5, 0.04);
}

TEST(Step, OverflowLeavesStateUntouched) {
  Rng rng(1);
  Market market(params(101, 2, 1, 1e-3, 100.0, 100.0, false), rng);
  bool thrown = false;
  for (int k = 0; k < 10 && !thrown; ++k) {
    const long t = market.time();
    const double p = market.price();
    const auto h = market.history();
    try {
      market.step(rng);
    } catch (const PriceOverflow&) {
      thrown = true;
      EXPECT_EQ(market.time(), t);
      EXPECT_EQ(market.price(), p);
      EXPECT_EQ(market.history(), h);
    }
  }
  EXPECT_TRUE(thrown);
}

TEST(Market, MatchesReferenceImplementation) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng pick(seed + 1000);
    const int n = 1 + static_cast<int>(pick.below(5));
    const int m = 1 + static_cast<int>(pick.below(3));
    const int s = 1 + static_cast<int>(pick.below(2));
    const std::array<double, 4> lambdas{1.0, 3.0, 10.0, 40.0};
    const std::array<double, 4> dividends{5.0, 30.0, 100.0, std::numeric_limits<double>::infinity()};
    const double lambda = lambdas[pick.below(4)];
    const double d = dividends[pick.below(4)];
    const bool fundamental = pick.coin();

    reference::Game ref(n, m, s, lambda, d, 100.0, fundamental, seed);
    Rng rng(seed);
    Market market(params(n, m, s, lambda, d, 100.0, fundamental), rng);
    ASSERT_EQ(market.history(), static_cast<std::uint32_t>(ref.history()));
    for (int t = 0; t < 50; ++t) {
      const auto got = market.step(rng);
      const auto want = ref.step();
      ASSERT_EQ(got.imbalance, want.imbalance) << "seed " << seed << " t " << t;
      ASSERT_EQ(got.actions.size(), want.actions.size());
      for (std::size_t i = 0; i < want.actions.size(); ++i) ASSERT_EQ(to_int(got.actions[i]), want.actions[i]);
      ASSERT_EQ(got.return_, want.r);
      ASSERT_EQ(got.direction_bit, want.bit);
      ASSERT_EQ(got.n_fundamental_plays, want.fundamental_plays);
      ASSERT_EQ(got.price_after, want.price);
      ASSERT_EQ(market.history(), static_cast<std::uint32_t>(ref.history()));
      for (int i = 0; i < n; ++i) {
        const auto agent = market.agent(i);
        const auto& r = ref.agents()[static_cast<std::size_t>(i)];
        for (int j = 0; j < s; ++j) {
          ASSERT_EQ(agent.scores[static_cast<std::size_t>(j)], r.scores[static_cast<std::size_t>(j)]);
          ASSERT_EQ(to_int(agent.prev_actions[static_cast<std::size_t>(j)]), r.prev[static_cast<std::size_t>(j)]);
        }
      }
    }
  }
}

TEST(Market, TablesMatchStreamProtocol) {
  Rng a(42), b(42);
  Market market(params(3, 3, 2), a);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 2; ++j) EXPECT_EQ(market.agent(i).strategies[static_cast<std::size_t>(j)], generate_strategy(b, 3));
  }
  EXPECT_EQ(market.history(), b.next() & 7u);
}

TEST(Market, FundamentalOffEqualsInfiniteDividend) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto off = SimulationConfig::make(11, 3, 2, 5.0, 20.0, 100.0);
    off.fundamental = false;
    off.detail = TrajectoryDetail::full;
    off.early_stop = false;
    off.max_steps = 200;
    auto inf = off;
    inf.fundamental = true;
    inf.dividend = std::numeric_limits<double>::infinity();
    const auto a = run_realization(off, seed);
    const auto b = run_realization(inf, seed);
    ASSERT_EQ(a.trajectory.size(), b.trajectory.size());
    for (std::size_t k = 0; k < a.trajectory.size(); ++k) {
      ASSERT_EQ(a.trajectory[k].imbalance, b.trajectory[k].imbalance);
      ASSERT_EQ(a.trajectory[k].price_after, b.trajectory[k].price_after);
      ASSERT_EQ(a.trajectory[k].direction_bit, b.trajectory[k].direction_bit);
    }
    EXPECT_EQ(a.label, b.label);
  }
}

TEST(Market, IdenticalTablesGiveFullCoordination) {
  Rng gen(17);
  const auto table = generate_strategy(gen, 3);
  std::vector<std::vector<StrategyTable>> tables(9, {table});
  Market market(params(9, 3, 1, 50.0, 100.0, 100.0, false), tables, HistoryWindow(3, 5));
  Rng rng(1);
  for (int t = 0; t < 40; ++t) EXPECT_EQ(std::abs(market.step(rng).imbalance), 9);
}

TEST(Market, Invariants) {
  Rng pick(2718);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + static_cast<int>(pick.below(40));
    const int m = 1 + static_cast<int>(pick.below(6));
    const int s = 1 + static_cast<int>(pick.below(5));
    const double lambda = 5.0 + 100.0 * pick.uniform01();
    const double d = 1.0 + 200.0 * pick.uniform01();
    Rng rng(pick.next());
    Market market(params(n, m, s, lambda, d, 100.0, pick.coin()), rng);
    for (int t = 0; t < 100; ++t) {
      const auto before = market.agent(t % n);
      StepRecord rec;
      try {
        rec = market.step(rng);
      } catch (const PriceOverflow&) {
        break;
      }
      ASSERT_LE(std::abs(rec.imbalance), n);
      ASSERT_EQ((rec.imbalance - n) % 2, 0);
      const double o = order_parameter(rec.imbalance, n);
      ASSERT_GE(o, -1.0);
      ASSERT_LE(o, 1.0);
      ASSERT_EQ(rec.return_, static_cast<double>(rec.imbalance) / lambda);
      ASSERT_EQ((rec.return_ > 0) - (rec.return_ < 0), (rec.imbalance > 0) - (rec.imbalance < 0));
      if (rec.imbalance != 0) {
        ASSERT_EQ(rec.direction_bit, rec.imbalance > 0 ? 1 : 0);
      }
      ASSERT_GT(rec.price_after, 0.0);
      ASSERT_TRUE(std::isfinite(rec.price_after));
      ASSERT_LE(rec.n_fundamental_plays, n);
      const auto after = market.agent(t % n);
      for (int j = 0; j < s; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        ASSERT_EQ(after.scores[jj], before.scores[jj] + to_int(before.prev_actions[jj]) * static_cast<double>(rec.imbalance));
        ASSERT_TRUE(std::isfinite(after.scores[jj]));
      }
    }
  }
}

TEST(Realization, ZeroStepsIsUndetermined) {
  auto c = SimulationConfig::make(11, 3, 2, 1.0, 100.0, 100.0);
  c.max_steps = 0;
  const auto r = run_realization(c, 1);
  EXPECT_EQ(r.label, PhaseLabel::undetermined);
  EXPECT_EQ(r.stop_step, 0);
  EXPECT_TRUE(r.trajectory.empty());
}

TEST(Realization, DefaultStepCap) {
  EXPECT_EQ(SimulationConfig::make(11, 3, 2, 1.0, 100.0, 100.0).max_steps, 1600);
  EXPECT_EQ(default_burn_in(3), 8);
}

TEST(Realization, Deterministic) {
  auto c = SimulationConfig::make(11, 3, 2, 20.0, 50.0, 100.0);
  c.detail = TrajectoryDetail::full;
  c.early_stop = false;
  const auto a = run_realization(c, 77);
  const auto b = run_realization(c, 77);
  EXPECT_EQ(a.label, b.label);
  EXPECT_EQ(a.final_price, b.final_price);
  ASSERT_EQ(a.trajectory.size(), b.trajectory.size());
  for (std::size_t k = 0; k < a.trajectory.size(); ++k) {
    EXPECT_EQ(a.trajectory[k].imbalance, b.trajectory[k].imbalance);
    EXPECT_EQ(a.trajectory[k].price_after, b.trajectory[k].price_after);
  }
}

TEST(Realization, LabelAgreesWithOfflineClassifier) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto c = SimulationConfig::make(21, 2, 2, 30.0, 10.0, 100.0);
    c.detail = TrajectoryDetail::full;
    const auto r = run_realization(c, seed);
    if (r.label == PhaseLabel::aborted) continue;
    EXPECT_EQ(r.label, classify_run(r.prices(), c.memory, c.fundamental_price, c.burn_in));
  }
}

TEST(Realization, OverflowIsAborted) {
  auto c = SimulationConfig::make(101, 3, 2, 1e-3, 100.0, 100.0);
  c.early_stop = false;
  const auto r = run_realization(c, 3);
  EXPECT_EQ(r.label, PhaseLabel::aborted);
  EXPECT_FALSE(r.abort_reason.empty());
}
