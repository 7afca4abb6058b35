#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pricewar/lda.hpp"

namespace pricewar {

inline constexpr double kProbabilityFloor = 1e-12;

struct NllResult {
    double nll = 0.0;
    std::size_t samples = 0;
    std::size_t floored = 0;  // outcomes whose probability was raised to the floor
};

/// -sum log p over the probabilities assigned to observed outcomes, each
/// floored at kProbabilityFloor. Throws DataError on an empty set.
NllResult negative_log_likelihood(std::span<const double> outcome_probabilities);

/// NLL of observed bins under the mixture predictor of each record's document.
NllResult lda_nll(const lda::PreferenceMatrix& pref, const lda::StrategyDistribution& theta,
                  std::span<const lda::LdaRecord> test);
/// NLL of a predictor that puts 1/acc on every bin.
NllResult uniform_nll(int acc, std::span<const lda::LdaRecord> test);

/// One-dimensional earth mover's distance between two categoricals on the
/// ordered positions `support` (defaults to 0, 1, ...). Throws DataError on
/// size mismatch, unordered support, or invalid distributions.
double wasserstein1(std::span<const double> p, std::span<const double> q,
                    std::span<const double> support = {});

struct DistanceRow {
    std::string group;
    double lda = 0.0;
    double uniform = 0.0;
    double overall = 0.0;
};

struct DistanceReport {
    std::vector<DistanceRow> rows;
    DistanceRow mean;  // group = "mean"
};

/// Compares each group's estimated strategy with its true exposure
/// distribution, against the uniform distribution and the exposure pooled over
/// all groups. `truth_weights` (one per group) weights the pooled baseline;
/// empty means equal weights.
DistanceReport strategy_distance_report(const lda::StrategyDistribution& theta_hat,
                                        const lda::StrategyDistribution& truth,
                                        std::span<const int> group_ids,
                                        std::span<const double> truth_weights = {});

struct NllRow {
    std::string predictor;
    NllResult result;
};

void write_nll_report(const std::filesystem::path& path, std::span<const NllRow> rows);
void write_w1_report(const std::filesystem::path& path, const DistanceReport& report);

}  // namespace pricewar
