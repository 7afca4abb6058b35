#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pricewar/error.hpp"
#include "pricewar/metrics.hpp"

namespace pricewar {
namespace {

std::vector<double> random_distribution(std::mt19937_64& gen, int k) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> p(static_cast<std::size_t>(k));
    double s = 0;
    for (double& v : p) s += v = u(gen);
    for (double& v : p) v /= s;
    return p;
}

TEST(Nll, PerfectPredictionsAreZero) {
    const std::vector<double> p(10, 1.0);
    EXPECT_EQ(negative_log_likelihood(p).nll, 0.0);
}

TEST(Nll, HalfProbabilities) {
    const std::vector<double> p(37, 0.5);
    EXPECT_NEAR(negative_log_likelihood(p).nll, 37 * std::log(2.0), 1e-12);
}

TEST(Nll, FloorIsCounted) {
    const std::vector<double> p{0.0, 1.0, 1e-20};
    const auto r = negative_log_likelihood(p);
    EXPECT_EQ(r.floored, 2u);
    EXPECT_NEAR(r.nll, -2 * std::log(1e-12), 1e-9);
}

TEST(Nll, EmptyIsError) { EXPECT_THROW(negative_log_likelihood({}), DataError); }

TEST(Nll, AdditiveOverDisjointSets) {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    std::vector<double> a, b;
    for (int i = 0; i < 20; ++i) a.push_back(u(gen));
    for (int i = 0; i < 13; ++i) b.push_back(u(gen));
    std::vector<double> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    EXPECT_NEAR(negative_log_likelihood(ab).nll, negative_log_likelihood(a).nll + negative_log_likelihood(b).nll, 1e-10);
}

TEST(Nll, UniformPredictor) {
    std::vector<lda::LdaRecord> recs(25);
    EXPECT_NEAR(uniform_nll(10, recs).nll, 25 * std::log(10.0), 1e-10);
}

TEST(Nll, LdaPredictorUsesMixture) {
    lda::PreferenceMatrix pref(1, 2, 2);
    pref.at(0, 0, 1) = 1.0;
    pref.at(0, 1, 0) = 1.0;
    lda::StrategyDistribution theta(1, 2);
    theta.at(0, 0) = 0.25;
    theta.at(0, 1) = 0.75;
    const std::vector<lda::LdaRecord> recs{{0, 0, 1, 1}, {0, 0, 0, 0}};
    EXPECT_NEAR(lda_nll(pref, theta, recs).nll, -std::log(0.25) - std::log(0.75), 1e-12);
}

TEST(Wasserstein, Examples) {
    const std::vector<double> p{1, 0, 0}, q{0, 0, 1};
    EXPECT_DOUBLE_EQ(wasserstein1(p, q), 2.0);
    EXPECT_DOUBLE_EQ(wasserstein1(p, p), 0.0);
    const std::vector<double> support{0.0, 0.5, 3.0};
    EXPECT_DOUBLE_EQ(wasserstein1(p, q, support), 3.0);
}

TEST(Wasserstein, MismatchedSupportIsError) {
    const std::vector<double> p{0.5, 0.5}, q{0.2, 0.3, 0.5};
    EXPECT_THROW(wasserstein1(p, q), DataError);
    const std::vector<double> bad{0.5, 0.6};
    EXPECT_THROW(wasserstein1(p, bad), DataError);
}

TEST(Wasserstein, IsAMetric) {
    std::mt19937_64 gen(2);
    for (int trial = 0; trial < 500; ++trial) {
        const auto p = random_distribution(gen, 4);
        const auto q = random_distribution(gen, 4);
        const auto r = random_distribution(gen, 4);
        EXPECT_NEAR(wasserstein1(p, q), wasserstein1(q, p), 1e-15);
        EXPECT_EQ(wasserstein1(p, p), 0.0);
        EXPECT_GT(wasserstein1(p, q), 0.0);
        EXPECT_LE(wasserstein1(p, r), wasserstein1(p, q) + wasserstein1(q, r) + 1e-12);
    }
}

TEST(Wasserstein, MatchesTransportOracle) {
    // Greedy left-to-right transport is optimal on the line.
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = random_distribution(gen, 5);
        const auto q = random_distribution(gen, 5);
        auto pp = p, qq = q;
        double cost = 0.0;
        std::size_t i = 0, j = 0;
        while (i < 5 && j < 5) {
            const double moved = std::min(pp[i], qq[j]);
            cost += moved * std::abs(static_cast<double>(i) - static_cast<double>(j));
            pp[i] -= moved;
            qq[j] -= moved;
            if (pp[i] <= 1e-15) ++i;
            if (qq[j] <= 1e-15) ++j;
        }
        EXPECT_NEAR(wasserstein1(p, q), cost, 1e-9);
    }
}

TEST(DistanceReport, Columns) {
    lda::StrategyDistribution truth(2, 3), est(2, 3);
    truth.at(0, 0) = 1.0;
    truth.at(1, 2) = 1.0;
    est = truth;
    const auto r = strategy_distance_report(est, truth, {});
    ASSERT_EQ(r.rows.size(), 2u);
    EXPECT_EQ(r.rows[0].lda, 0.0);
    const std::vector<double> uniform(3, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(r.rows[0].uniform, wasserstein1(uniform, truth.row(0)));
    // Pooled truth is (0.5, 0, 0.5): one unit from either point mass.
    EXPECT_DOUBLE_EQ(r.rows[1].overall, 1.0);
    EXPECT_DOUBLE_EQ(r.mean.uniform, (r.rows[0].uniform + r.rows[1].uniform) / 2);
}

}  // namespace
}  // namespace pricewar
