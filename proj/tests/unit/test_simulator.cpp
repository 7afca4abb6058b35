#include <gtest/gtest.h>

#include <cmath>

#include "pricewar/random_policy.hpp"
#include "pricewar/simulator.hpp"

namespace pricewar {
namespace {

class FixedPolicy : public AwardPolicy {
public:
    explicit FixedPolicy(int award) : award_(award) {}
    std::string name() const override { return "fixed"; }
    std::vector<int> choose_awards(const RoundContext& ctx, Rng&) override {
        return std::vector<int>(static_cast<std::size_t>(ctx.num_customers), award_);
    }

private:
    int award_;
};

long double logistic_ref(long double d) { return 1.0L / (1.0L + std::exp(-d)); }

MarketConfig small_market(int rounds = 10) {
    MarketConfig c;
    c.num_customer_groups = 2;
    c.customers_per_group = 25;
    c.rounds = rounds;
    c.budgets = {100.0, 100.0};
    return c;
}

TEST(Sigmoid, ZeroDifferenceReturnsSigma) {
    for (double s : {0.01, 0.3, 0.5, 0.77, 0.999}) EXPECT_EQ(sigmoid_preference(0.0, s), s);
}

TEST(Sigmoid, HalfSigmaIsPlainLogistic) {
    for (double d = -6.0; d <= 6.0; d += 0.25)
        EXPECT_NEAR(sigmoid_preference(d, 0.5), static_cast<double>(logistic_ref(d)), 1e-15);
    EXPECT_NEAR(sigmoid_preference(2.0, 0.5), 0.880797077977882, 1e-12);
    EXPECT_NEAR(sigmoid_preference(4.0, 0.5), 0.982013790037908, 1e-12);
}

TEST(Sigmoid, StrictlyIncreasingInsideUnitInterval) {
    for (double s : {0.05, 0.3, 0.5, 0.8, 0.97}) {
        double prev = 0.0;
        for (double d = -8.0; d <= 8.0; d += 0.5) {
            const double p = sigmoid_preference(d, s);
            ASSERT_GT(p, prev);
            ASSERT_LT(p, 1.0);
            prev = p;
        }
    }
}

TEST(Sigmoid, DiminishingReturnsForPositiveDifferences) {
    for (double s : {0.1, 0.5, 0.9}) {
        double prev_gain = 1.0;
        for (int d = 0; d < 10; ++d) {
            const double gain = sigmoid_preference(d + 1, s) - sigmoid_preference(d, s);
            ASSERT_LT(gain, prev_gain);
            prev_gain = gain;
        }
    }
}

TEST(UpdateSigma, Examples) {
    EXPECT_DOUBLE_EQ(update_sigma(0.4, 0.4, 0.7), 0.4);
    EXPECT_DOUBLE_EQ(update_sigma(0.4, 0.8, 1.0), 0.8);
    EXPECT_DOUBLE_EQ(update_sigma(0.4, 0.8, 0.5), 0.6000000000000001);
}

TEST(UpdateSigma, DriftsTowardUsage) {
    for (double s : {0.1, 0.5, 0.9})
        for (double u : {0.0, 0.2, 0.5, 0.7, 1.0})
            for (double g : {0.1, 0.5, 1.0}) {
                const double next = update_sigma(s, u, g);
                const double du = u - s;
                EXPECT_EQ((next > s) - (next < s), (du > 0) - (du < 0));
            }
}

TEST(RunRound, ConservesDemandAndChargesBudgets) {
    auto config = small_market(1);
    auto state = MarketState::initial(config);
    FixedPolicy p1(2), p2(1);
    const auto out = run_round(config, state, p1, p2);
    ASSERT_EQ(out.demand.size(), 50u);
    for (std::size_t j = 0; j < out.demand.size(); ++j) {
        EXPECT_GE(out.captured1[j], 0);
        EXPECT_EQ(out.captured1[j] + out.captured2(j), out.demand[j]);
        EXPECT_GE(out.demand[j], config.demand_min);
        EXPECT_LE(out.demand[j], config.demand_max);
    }
    // 50 customers, award 2 costs 2: only 50 can be afforded from 100.
    EXPECT_EQ(out.coerced[0], 0);
    EXPECT_DOUBLE_EQ(out.remaining_budget[0], 0.0);
    EXPECT_DOUBLE_EQ(out.remaining_budget[1], 50.0);
}

TEST(RunRound, UnaffordableAwardsAreCoercedToZero) {
    auto config = small_market(1);
    config.budgets = {10.0, 0.0};
    auto state = MarketState::initial(config);
    FixedPolicy p1(4), p2(1);
    const auto out = run_round(config, state, p1, p2);
    EXPECT_EQ(out.coerced[0], 48);
    EXPECT_EQ(out.coerced[1], 50);
    EXPECT_EQ(out.award1[0], 4);
    EXPECT_EQ(out.award1[1], 4);
    EXPECT_EQ(out.award1[2], 0);
    for (int a : out.award2) EXPECT_EQ(a, 0);
    EXPECT_GE(out.remaining_budget[0], 0.0);
}

TEST(RunRound, PerRoundBudgetResets) {
    auto config = small_market(3);
    config.budget_mode = BudgetMode::PerRound;
    config.budgets = {20.0, 20.0};
    FixedPolicy p1(1), p2(0);
    const auto game = run_game(config, p1, p2);
    EXPECT_EQ(game.coerced[0], 3 * 30);
}

TEST(RunRound, CaptureProbabilityMatchesPreference) {
    MarketConfig config;
    config.num_customer_groups = 1;
    config.customers_per_group = 2000;
    config.rounds = 1;
    config.budgets = {1e9, 1e9};
    auto state = MarketState::initial(config);
    FixedPolicy p1(4), p2(0);
    const auto out = run_round(config, state, p1, p2);
    long long c = 0, n = 0;
    for (std::size_t j = 0; j < out.demand.size(); ++j) {
        c += out.captured1[j];
        n += out.demand[j];
    }
    const double p = 0.982013790037908;
    const double se = std::sqrt(p * (1 - p) / static_cast<double>(n));
    EXPECT_NEAR(static_cast<double>(c) / static_cast<double>(n), p, 5 * se);
}

TEST(RunRound, SigmaNearOneCapturesEverything) {
    auto config = small_market(1);
    config.initial_sigma = 1.0 - 1e-9;
    config.demand_min = config.demand_max = 1;
    auto state = MarketState::initial(config);
    FixedPolicy p1(0), p2(0);
    const auto out = run_round(config, state, p1, p2);
    for (int c : out.captured1) EXPECT_EQ(c, 1);
    for (const auto& cs : state.customers) {
        EXPECT_LT(cs.sigma, 1.0);
        EXPECT_GT(cs.sigma, 0.0);
    }
}

TEST(RunGame, ZeroRoundsIsEmpty) {
    auto config = small_market(0);
    RandomPolicy p1, p2;
    const auto game = run_game(config, p1, p2);
    EXPECT_TRUE(game.trajectory.empty());
    EXPECT_TRUE(game.records[0].empty());
    EXPECT_TRUE(game.records[1].empty());
}

TEST(RunGame, SeedDeterministicAndThreadIndependent) {
    auto config = small_market(8);
    config.seed = 42;
    RandomPolicy a1, a2, b1, b2, c1, c2;
    const auto g1 = run_game(config, a1, a2);
    const auto g2 = run_game(config, b1, b2);
    const auto g3 = run_game(config, c1, c2, SimOptions{4});
    EXPECT_EQ(g1.records[0], g2.records[0]);
    EXPECT_EQ(g1.records[1], g2.records[1]);
    EXPECT_EQ(g1.records[0], g3.records[0]);
    EXPECT_EQ(g1.final_share, g3.final_share);
    config.seed = 43;
    RandomPolicy d1, d2;
    EXPECT_NE(run_game(config, d1, d2).records[0], g1.records[0]);
}

TEST(RunGame, RecordsAreSymmetric) {
    auto config = small_market(4);
    RandomPolicy p1, p2;
    const auto game = run_game(config, p1, p2);
    ASSERT_EQ(game.records[0].size(), game.records[1].size());
    for (std::size_t i = 0; i < game.records[0].size(); ++i) {
        const auto& r1 = game.records[0][i];
        const auto& r2 = game.records[1][i];
        EXPECT_EQ(r1.demand, r2.demand);
        EXPECT_EQ(r1.count + r2.count, *r1.demand);
    }
    EXPECT_DOUBLE_EQ(game.final_share[0] + game.final_share[1], 1.0);
    EXPECT_DOUBLE_EQ(game.trajectory.back().share1, game.final_share[0]);
}

TEST(RunGame, FixedDemandModeKeepsDemand) {
    auto config = small_market(3);
    config.demand_mode = DemandMode::Fixed;
    FixedPolicy p1(0), p2(0);
    const auto game = run_game(config, p1, p2);
    const int m = config.num_customers();
    for (int t = 1; t < 3; ++t)
        for (int j = 0; j < m; ++j)
            EXPECT_EQ(game.records[0][static_cast<std::size_t>(t * m + j)].demand, game.records[0][static_cast<std::size_t>(j)].demand);
}

TEST(RunGame, RandomVersusRandomIsSymmetric) {
    auto config = small_market(20);
    double sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        config.seed = seed;
        RandomPolicy p1, p2;
        sum += run_game(config, p1, p2).final_share[0];
    }
    EXPECT_NEAR(sum / 10.0, 0.5, 0.02);
}

}  // namespace
}  // namespace pricewar
