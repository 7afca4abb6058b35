#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "pricewar/error.hpp"
#include "pricewar/lda.hpp"

namespace pricewar::lda {
namespace {

LdaConfig micro_config(int own = 1, int opp = 2, int acc = 2) {
    LdaConfig c;
    c.own_arity = own;
    c.opp_arity = opp;
    c.acc = acc;
    c.sweeps = 10;
    c.burn_in = 5;
    c.thin = 1;
    c.chains = 1;
    return c;
}

void assign(GibbsState& s, std::size_t i, int k) {
    if (s.is_assigned(i)) s.remove(i);
    s.insert(i, k);
}

// Independent evaluation of the leave-one-out weights straight from the tables.
std::vector<double> reference_conditional(const GibbsState& s, std::size_t i) {
    const auto& c = s.config();
    const auto& r = s.record(i);
    std::vector<double> w(static_cast<std::size_t>(c.opp_arity));
    double total = 0.0;
    for (int k = 0; k < c.opp_arity; ++k) {
        w[k] = (s.bin_count(r.own_award, k, r.bin) + c.beta) / (s.pair_count(r.own_award, k) + c.acc * c.beta) *
               (s.doc_label_count(r.doc, k) + c.alpha) / (s.doc_count(r.doc) + c.opp_arity * c.alpha);
        total += w[k];
    }
    for (double& v : w) v /= total;
    return w;
}

TEST(DemandDistribution, ImputeBoundaries) {
    const auto d = DemandDistribution::uniform(1, 100);
    Rng rng(7);
    for (int i = 0; i < 100; ++i) EXPECT_GE(impute_demand(0, d, rng), 1);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(impute_demand(100, d, rng), 100);
    EXPECT_THROW(impute_demand(101, d, rng), DataError);
}

TEST(DemandDistribution, ImputeIsConditionalUniform) {
    const auto d = DemandDistribution::uniform(1, 100);
    Rng rng(11);
    std::vector<int> hist(101, 0);
    const int draws = 102000;
    for (int i = 0; i < draws; ++i) {
        const int n = impute_demand(50, d, rng);
        ASSERT_GE(n, 50);
        ASSERT_LE(n, 100);
        ++hist[n];
    }
    // chi-square over 51 cells, 50 dof; 99.9% quantile is about 86.7.
    const double expected = draws / 51.0;
    double chi2 = 0.0;
    for (int n = 50; n <= 100; ++n) chi2 += (hist[n] - expected) * (hist[n] - expected) / expected;
    EXPECT_LT(chi2, 86.7);
}

TEST(ConditionalPosterior, EmptyTablesGiveUniform) {
    auto c = micro_config(2, 4, 10);
    GibbsState s(c, {LdaRecord{0, 1, 3, 0}}, 1);
    s.initialize(1);
    s.remove(0);
    std::vector<double> p(4);
    s.conditional_posterior(0, p);
    for (double v : p) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(ConditionalPosterior, HandComputedExample) {
    // Leave-one-out tables: N(h=0 | b1=0,k=0) = 2, N(b1=0,k=0) = 2, N(h=0 | b1=0,k=1) = 0,
    // N(b1=0,k=1) = 2, doc 0 has two records, both labelled 0.
    std::vector<LdaRecord> recs{{0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {1, 0, 1, 0}, {1, 0, 1, 0}};
    GibbsState s(micro_config(), recs, 2);
    s.initialize(3);
    assign(s, 1, 0);
    assign(s, 2, 0);
    assign(s, 3, 1);
    assign(s, 4, 1);
    s.remove(0);
    ASSERT_EQ(s.bin_count(0, 0, 0), 2);
    ASSERT_EQ(s.pair_count(0, 1), 2);
    ASSERT_EQ(s.doc_count(0), 2);
    std::vector<double> p(2);
    s.conditional_posterior(0, p);
    EXPECT_NEAR(p[0], 0.9, 1e-15);
    EXPECT_NEAR(p[1], 0.1, 1e-15);
}

TEST(ConditionalPosterior, MatchesReferenceOnRandomTables) {
    std::mt19937_64 gen(5);
    auto c = micro_config(3, 3, 4);
    c.alpha = 0.7;
    c.beta = 1.3;
    std::vector<LdaRecord> recs;
    for (int i = 0; i < 60; ++i)
        recs.push_back({static_cast<int>(gen() % 5), static_cast<int>(gen() % 3), static_cast<int>(gen() % 4), 0});
    GibbsState s(c, recs, 5);
    s.initialize(9);
    std::vector<double> p(3);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const int k = s.assignment(i);
        s.remove(i);
        s.conditional_posterior(i, p);
        const auto ref = reference_conditional(s, i);
        EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(p[j], ref[j], 1e-12);
        s.insert(i, k);
    }
}

TEST(ConditionalPosterior, AgreesWithJointRatio) {
    // The conditional must equal the ratio of collapsed joints with the record relabelled.
    std::mt19937_64 gen(17);
    auto c = micro_config(2, 3, 3);
    std::vector<LdaRecord> recs;
    for (int i = 0; i < 25; ++i)
        recs.push_back({static_cast<int>(gen() % 3), static_cast<int>(gen() % 2), static_cast<int>(gen() % 3), 0});
    GibbsState s(c, recs, 3);
    s.initialize(2);
    for (std::size_t i : {0u, 7u, 19u}) {
        std::vector<double> lj(3);
        for (int k = 0; k < 3; ++k) {
            assign(s, i, k);
            lj[k] = s.log_joint();
        }
        s.remove(i);
        std::vector<double> p(3);
        s.conditional_posterior(i, p);
        for (int k = 1; k < 3; ++k) EXPECT_NEAR(std::log(p[k] / p[0]), lj[k] - lj[0], 1e-9);
        s.insert(i, 0);
    }
}

TEST(GibbsState, NegativeCountIsCorruption) {
    GibbsState s(micro_config(), {LdaRecord{0, 0, 0, 0}}, 1);
    s.initialize(1);
    s.remove(0);
    EXPECT_THROW(s.remove(0), StateError);
}

TEST(GibbsSweep, PreservesTableInvariants) {
    std::mt19937_64 gen(23);
    auto c = micro_config(3, 4, 5);
    std::vector<LdaRecord> recs;
    for (int i = 0; i < 200; ++i)
        recs.push_back({static_cast<int>(gen() % 8), static_cast<int>(gen() % 3), static_cast<int>(gen() % 5), 0});
    GibbsState s(c, recs, 8);
    s.initialize(4);
    Rng rng(3);
    for (int sweep = 0; sweep < 20; ++sweep) {
        gibbs_sweep(s, rng);
        ASSERT_NO_THROW(s.check_consistency());
        int total = 0;
        for (int d = 0; d < 8; ++d) total += s.doc_count(d);
        ASSERT_EQ(total, 200);
    }
}

TEST(GibbsSweep, SingleLabelNeverMoves) {
    auto c = micro_config(1, 1, 2);
    GibbsState s(c, {LdaRecord{0, 0, 1, 0}}, 1);
    s.initialize(5);
    Rng rng(1);
    for (int i = 0; i < 10; ++i) {
        gibbs_sweep(s, rng);
        EXPECT_EQ(s.assignment(0), 0);
    }
}

TEST(GibbsSweep, MicroChainMatchesEnumeration) {
    // Three records, two labels: enumerate all 8 labelings of the collapsed joint.
    std::vector<LdaRecord> recs{{0, 0, 0, 0}, {0, 0, 1, 0}, {1, 0, 0, 0}};
    auto c = micro_config();
    GibbsState s(c, recs, 2);
    s.initialize(1);
    std::vector<double> exact(8);
    for (int code = 0; code < 8; ++code) {
        for (std::size_t i = 0; i < 3; ++i) assign(s, i, (code >> i) & 1);
        exact[code] = std::exp(s.log_joint());
    }
    const double z = std::accumulate(exact.begin(), exact.end(), 0.0);
    for (double& v : exact) v /= z;

    s.initialize(7);
    Rng rng(99);
    for (int i = 0; i < 1000; ++i) gibbs_sweep(s, rng);
    std::vector<double> freq(8, 0.0);
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
        gibbs_sweep(s, rng);
        ++freq[s.assignment(0) | (s.assignment(1) << 1) | (s.assignment(2) << 2)];
    }
    double tv = 0.0;
    for (int code = 0; code < 8; ++code) tv += 0.5 * std::abs(freq[code] / n - exact[code]);
    EXPECT_LT(tv, 0.02);
}

TEST(Exchangeability, KeyedInitializationIgnoresOrder) {
    std::mt19937_64 gen(31);
    auto c = micro_config(2, 3, 4);
    std::vector<LdaRecord> recs;
    for (int i = 0; i < 50; ++i) {
        LdaRecord r{static_cast<int>(gen() % 4), static_cast<int>(gen() % 2), static_cast<int>(gen() % 4), 0};
        r.key = static_cast<std::uint64_t>(i);
        recs.push_back(r);
    }
    auto shuffled = recs;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    GibbsState a(c, recs, 4), b(c, shuffled, 4);
    a.initialize(12);
    b.initialize(12);
    for (int b1 = 0; b1 < 2; ++b1)
        for (int k = 0; k < 3; ++k) {
            EXPECT_EQ(a.pair_count(b1, k), b.pair_count(b1, k));
            for (int h = 0; h < 4; ++h) EXPECT_EQ(a.bin_count(b1, k, h), b.bin_count(b1, k, h));
        }
    for (int d = 0; d < 4; ++d)
        for (int k = 0; k < 3; ++k) EXPECT_EQ(a.doc_label_count(d, k), b.doc_label_count(d, k));
}

TEST(Exchangeability, PermutedRecordsGiveSamePosteriorStatistics) {
    std::mt19937_64 gen(37);
    std::vector<LdaRecord> recs;
    for (int i = 0; i < 300; ++i) {
        const int doc = i % 6;
        const int b1 = static_cast<int>(gen() % 2);
        const int h = (doc < 3) ? (b1 == 0 ? 1 : 2) : static_cast<int>(gen() % 2);
        recs.push_back({doc, b1, h, 0});
    }
    auto shuffled = recs;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    LdaConfig c = micro_config(2, 2, 3);
    c.sweeps = 1500;
    c.burn_in = 500;
    c.thin = 5;
    c.chains = 2;
    const auto a = run_inference(recs, 6, c);
    const auto b = run_inference(shuffled, 6, c);
    for (int d = 0; d < 6; ++d)
        for (int k = 0; k < 2; ++k) EXPECT_NEAR(a.estimates.theta.at(d, k), b.estimates.theta.at(d, k), 0.05);
    for (int b1 = 0; b1 < 2; ++b1)
        for (int k = 0; k < 2; ++k) EXPECT_NEAR(a.estimates.pref.expected_usage(b1, k), b.estimates.pref.expected_usage(b1, k), 0.05);
}

TEST(Synthetic, PointMassStrategy) {
    StrategyDistribution theta(4, 3);
    for (int d = 0; d < 4; ++d) theta.at(d, 1) = 1.0;
    PreferenceMatrix pref(2, 3, 10);
    for (int b1 = 0; b1 < 2; ++b1)
        for (int k = 0; k < 3; ++k)
            for (int h = 0; h < 10; ++h) pref.at(b1, k, h) = 0.1;
    Rng rng(1);
    const auto data = generate_synthetic(theta, pref, DemandDistribution::uniform(1, 100),
                                         [](int, int, Rng& r) { return static_cast<int>(r() % 2); }, 10, rng);
    ASSERT_EQ(data.records.size(), 40u);
    for (int k : data.hidden_opp_award) EXPECT_EQ(k, 1);
    for (std::size_t i = 0; i < data.records.size(); ++i)
        EXPECT_EQ(discretize(data.records[i].count, *data.records[i].demand, 10), data.hidden_bin[i]);
}

TEST(Synthetic, PointMassPreferenceGivesZeroCounts) {
    StrategyDistribution theta(3, 2);
    for (int d = 0; d < 3; ++d) theta.at(d, 0) = theta.at(d, 1) = 0.5;
    PreferenceMatrix pref(1, 2, 10);
    pref.at(0, 0, 0) = pref.at(0, 1, 0) = 1.0;
    // With n <= 9 and acc = 10, bin 0 holds only c = 0.
    Rng rng(2);
    const auto data = generate_synthetic(theta, pref, DemandDistribution::uniform(1, 9),
                                         [](int, int, Rng&) { return 0; }, 20, rng);
    for (const auto& r : data.records) EXPECT_EQ(r.count, 0);
}

TEST(Synthetic, StrategyFrequencies) {
    StrategyDistribution theta(300, 3);
    for (int d = 0; d < 300; ++d)
        for (int k = 0; k < 3; ++k) theta.at(d, k) = 1.0 / 3.0;
    PreferenceMatrix pref(1, 3, 10);
    for (int k = 0; k < 3; ++k) pref.at(0, k, 4) = 1.0;
    Rng rng(3);
    const auto data = generate_synthetic(theta, pref, DemandDistribution::uniform(1, 100),
                                         [](int, int, Rng&) { return 0; }, 10, rng);
    std::vector<int> count(3, 0);
    for (int k : data.hidden_opp_award) ++count[k];
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(count[k] / 3000.0, 1.0 / 3.0, 0.03);
}

TEST(Alignment, SortsByExpectedBinAndPermutesTheta) {
    PreferenceMatrix pref(2, 3, 4);
    StrategyDistribution theta(2, 3);
    // Label 0 low usage, label 1 high, label 2 middle.
    const int bins[3] = {0, 3, 2};
    for (int b1 = 0; b1 < 2; ++b1)
        for (int k = 0; k < 3; ++k) pref.at(b1, k, bins[k]) = 1.0;
    theta.at(0, 0) = 0.2, theta.at(0, 1) = 0.5, theta.at(0, 2) = 0.3;
    theta.at(1, 0) = 1.0;
    const auto aligned = align_labels({pref, theta});
    EXPECT_EQ(aligned.permutation, (std::vector<int>{1, 2, 0}));
    for (int k = 0; k + 1 < 3; ++k)
        EXPECT_GE(aligned.estimates.pref.expected_bin(k), aligned.estimates.pref.expected_bin(k + 1));
    EXPECT_DOUBLE_EQ(aligned.estimates.theta.at(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(aligned.estimates.theta.at(0, 2), 0.2);
    EXPECT_DOUBLE_EQ(aligned.estimates.theta.at(1, 2), 1.0);
}

TEST(Prediction, MixtureIsADistribution) {
    std::mt19937_64 gen(41);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    PreferenceMatrix pref(3, 3, 5);
    for (int b1 = 0; b1 < 3; ++b1)
        for (int k = 0; k < 3; ++k) {
            double s = 0;
            for (int h = 0; h < 5; ++h) s += pref.at(b1, k, h) = u(gen);
            for (int h = 0; h < 5; ++h) pref.at(b1, k, h) /= s;
        }
    const std::vector<double> theta{0.2, 0.3, 0.5};
    for (int b1 = 0; b1 < 3; ++b1) {
        const auto p = predict_bin_distribution(pref, theta, b1);
        EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
        for (int h = 0; h < 5; ++h) {
            double ref = 0;
            for (int k = 0; k < 3; ++k) ref += theta[k] * pref.at(b1, k, h);
            EXPECT_NEAR(p[h], ref, 1e-15);
        }
    }
}

TEST(Inference, RecoversSeparatedStrategies) {
    // Own award 0 only; opponent label 0 -> high usage, label 1 -> low usage.
    StrategyDistribution theta(20, 2);
    for (int d = 0; d < 20; ++d) {
        theta.at(d, 0) = d < 10 ? 0.9 : 0.1;
        theta.at(d, 1) = 1.0 - theta.at(d, 0);
    }
    PreferenceMatrix pref(1, 2, 4);
    pref.at(0, 0, 3) = 0.8, pref.at(0, 0, 2) = 0.2;
    pref.at(0, 1, 0) = 0.8, pref.at(0, 1, 1) = 0.2;
    Rng rng(5);
    const auto data = generate_synthetic(theta, pref, DemandDistribution::uniform(1, 100),
                                         [](int, int, Rng&) { return 0; }, 40, rng);
    LdaConfig c = micro_config(1, 2, 4);
    c.sweeps = 400;
    c.burn_in = 200;
    c.thin = 5;
    c.chains = 2;
    Rng conv(1);
    const auto recs = to_lda_records(data.records, [](int j) { return j; }, 4, nullptr, conv);
    const auto result = run_inference(recs, 20, c);
    for (int d = 0; d < 20; ++d) EXPECT_NEAR(result.estimates.theta.at(d, 0), theta.at(d, 0), 0.15);
    EXPECT_GT(result.estimates.pref.expected_usage(0, 0), result.estimates.pref.expected_usage(0, 1));
    ASSERT_EQ(result.diagnostics.size(), 2u);
    EXPECT_EQ(result.diagnostics[0].log_joint.size(), 400u);
}

TEST(Inference, DeterministicAcrossThreadCounts) {
    std::mt19937_64 gen(43);
    std::vector<LdaRecord> recs;
    for (int i = 0; i < 100; ++i)
        recs.push_back({static_cast<int>(gen() % 5), static_cast<int>(gen() % 2), static_cast<int>(gen() % 3), 0});
    LdaConfig c = micro_config(2, 2, 3);
    c.sweeps = 60;
    c.burn_in = 20;
    c.chains = 3;
    const auto a = run_inference(recs, 5, c, nullptr, 1);
    const auto b = run_inference(recs, 5, c, nullptr, 3);
    EXPECT_EQ(a.estimates.pref.flat(), b.estimates.pref.flat());
    for (int d = 0; d < 5; ++d)
        for (int k = 0; k < 2; ++k) EXPECT_EQ(a.estimates.theta.at(d, k), b.estimates.theta.at(d, k));
}

TEST(Inference, ReimputationKeepsTablesConsistent) {
    std::vector<ConsumptionRecord> raw;
    for (int i = 0; i < 40; ++i) raw.push_back({1, i % 4, i % 2, i % 7, std::nullopt});
    const auto demand = DemandDistribution::uniform(1, 20);
    Rng rng(3);
    auto recs = to_lda_records(raw, [](int j) { return j; }, 5, &demand, rng);
    for (const auto& r : recs) EXPECT_TRUE(r.imputed);
    LdaConfig c = micro_config(2, 2, 5);
    c.reimpute_each_sweep = true;
    c.sweeps = 30;
    c.burn_in = 10;
    EXPECT_NO_THROW(run_inference(recs, 4, c, &demand));
    EXPECT_THROW(run_inference(recs, 4, c, nullptr), ConfigError);
}

TEST(EstimateFiles, RoundTrip) {
    PreferenceMatrix pref(2, 2, 3);
    for (int b1 = 0; b1 < 2; ++b1)
        for (int k = 0; k < 2; ++k)
            for (int h = 0; h < 3; ++h) pref.at(b1, k, h) = (h + 1 + b1 + k) / (6.0 + 3 * (b1 + k));
    StrategyDistribution theta(2, 2);
    theta.at(0, 0) = 0.25, theta.at(0, 1) = 0.75, theta.at(1, 0) = 1.0;
    const auto dir = std::filesystem::temp_directory_path();
    write_preference(dir / "pw_pref.csv", pref);
    const std::vector<int> ids{7, 9};
    write_strategy(dir / "pw_theta.csv", theta, ids);
    const auto p2 = read_preference(dir / "pw_pref.csv");
    const auto [t2, ids2] = read_strategy(dir / "pw_theta.csv");
    EXPECT_EQ(ids2, ids);
    for (std::size_t i = 0; i < pref.flat().size(); ++i) EXPECT_NEAR(p2.flat()[i], pref.flat()[i], 1e-9);
    EXPECT_DOUBLE_EQ(t2.at(0, 1), 0.75);
}

TEST(LdaConfig, Validation) {
    LdaConfig c;
    EXPECT_NO_THROW(c.validate());
    c.alpha = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = LdaConfig{};
    c.burn_in = c.sweeps;
    EXPECT_THROW(c.validate(), ConfigError);
    c = LdaConfig{};
    c.acc = 1;
    EXPECT_THROW(c.validate(), ConfigError);
}

}  // namespace
}  // namespace pricewar::lda
