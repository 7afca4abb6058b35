#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "pricewar/csv.hpp"
#include "pricewar/error.hpp"
#include "pricewar/game.hpp"

namespace pricewar {
namespace {

TEST(AwardSet, IdentityIsFreeAtZeroAndIncreasing) {
    const auto a = AwardSet::identity(5);
    ASSERT_EQ(a.size(), 5);
    EXPECT_EQ(a.cost(0), 0.0);
    EXPECT_EQ(a.value(0), 0.0);
    for (int x = 1; x < 5; ++x) {
        EXPECT_EQ(a.cost(x), x);
        EXPECT_GT(a.value(x), a.value(x - 1));
    }
}

TEST(AwardSet, RejectsInvalidMenus) {
    EXPECT_THROW(AwardSet({1.0, 2.0}, {0.0, 1.0}), ConfigError);
    EXPECT_THROW(AwardSet({0.0, 2.0, 2.0}, {0.0, 1.0, 2.0}), ConfigError);
    EXPECT_THROW(AwardSet({0.0, 1.0}, {0.0, 1.0, 2.0}), ConfigError);
    EXPECT_THROW(AwardSet({0.0, 1.0, 2.0}, {0.0, 3.0, 2.0}), ConfigError);
    EXPECT_NO_THROW(AwardSet({0.0, 1.5, 4.0}, {0.0, 1.0, 2.0}));
}

TEST(AwardSet, IntegerCostsScale) {
    const AwardSet a({0.0, 0.5, 1.5}, {0.0, 1.0, 2.0});
    EXPECT_EQ(a.integer_costs(2.0), (std::vector<int>{0, 1, 3}));
}

TEST(Discretize, Examples) {
    EXPECT_EQ(discretize(5, 10, 10), 5);
    EXPECT_EQ(discretize(0, 7, 10), 0);
    EXPECT_EQ(discretize(10, 10, 10), 9);
    EXPECT_EQ(discretize(1, 1, 2), 1);
    EXPECT_EQ(discretize(0, 1, 2), 0);
}

TEST(Discretize, RejectsInvalidRecords) {
    EXPECT_THROW(discretize(0, 0, 10), DataError);
    EXPECT_THROW(discretize(3, 2, 10), DataError);
    EXPECT_THROW(discretize(-1, 2, 10), DataError);
    EXPECT_THROW(discretize(1, 2, 1), ConfigError);
}

TEST(Discretize, MonotoneAndInRange) {
    for (int acc = 2; acc <= 12; ++acc)
        for (int n = 1; n <= 60; ++n) {
            int prev = 0;
            for (int c = 0; c <= n; ++c) {
                const int h = discretize(c, n, acc);
                ASSERT_GE(h, 0);
                ASSERT_LT(h, acc);
                ASSERT_GE(h, prev);
                prev = h;
            }
        }
}

TEST(MarketShare, Examples) {
    const std::vector<int> c1{3, 2}, n1{5, 5};
    EXPECT_DOUBLE_EQ(market_share(c1, n1)[0], 0.5);
    const std::vector<int> c2{4, 6}, n2{4, 6};
    EXPECT_DOUBLE_EQ(market_share(c2, n2)[0], 1.0);
    const std::vector<int> c3{1, 0, 2}, n3{2, 3, 5};
    EXPECT_DOUBLE_EQ(market_share(c3, n3)[0], 0.3);
}

TEST(MarketShare, SharesSumToOne) {
    const std::vector<int> c{1, 7, 0, 3}, n{3, 9, 4, 3};
    const auto s = market_share(c, n);
    EXPECT_DOUBLE_EQ(s[0] + s[1], 1.0);
    EXPECT_GE(s[1], 0.0);
}

TEST(MarketShare, EmptyPoolIsAnError) {
    EXPECT_THROW(market_share({}, {}), DataError);
    const std::vector<int> zero{0}, zero_n{0};
    EXPECT_THROW(market_share(zero, zero_n), DataError);
}

TEST(MarketConfig, Validation) {
    MarketConfig c;
    EXPECT_NO_THROW(c.validate());
    c.updating_rate = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = MarketConfig{};
    c.budgets[1] = -1;
    EXPECT_THROW(c.validate(), ConfigError);
    c = MarketConfig{};
    c.demand_min = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = MarketConfig{};
    c.initial_sigma = 1.0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(RecordCsv, RoundTripWithOptionalDemand) {
    const std::vector<ConsumptionRecord> recs{{1, 0, 2, 3, 7}, {2, 5, 0, 0, std::nullopt}};
    std::ostringstream out;
    write_records(out, recs);
    EXPECT_EQ(out.str(), "period,customer_id,own_award,count,demand\n1,0,2,3,7\n2,5,0,0,\n");
    const auto path = std::filesystem::temp_directory_path() / "pricewar_records_roundtrip.csv";
    write_records(path, recs);
    EXPECT_EQ(read_records(path), recs);
}

TEST(RecordCsv, RejectsCountAboveDemand) {
    const auto path = std::filesystem::temp_directory_path() / "pricewar_records_bad.csv";
    {
        std::ofstream f(path);
        f << "period,customer_id,own_award,count,demand\n1,0,0,5,3\n";
    }
    EXPECT_THROW(read_records(path), DataError);
}

}  // namespace
}  // namespace pricewar
