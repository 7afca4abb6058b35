#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "pricewar/game.hpp"
#include "pricewar/rng.hpp"

namespace pricewar::lda {

struct LdaConfig {
    int acc = 10;
    int own_arity = 5;  // |B1|
    int opp_arity = 5;  // |B2|
    double alpha = 1.0;
    double beta = 1.0;
    int sweeps = 2000;
    int burn_in = 1000;
    int thin = 10;
    int chains = 4;
    std::uint64_t seed = 1;
    bool reimpute_each_sweep = false;

    void validate() const;
};

/// Discrete distribution over consecutive integers [min, max].
class DemandDistribution {
public:
    DemandDistribution() : DemandDistribution(uniform(1, 100)) {}
    DemandDistribution(int min_value, std::vector<double> weights);
    static DemandDistribution uniform(int lo, int hi);

    int min() const { return min_; }
    int max() const { return min_ + static_cast<int>(weights_.size()) - 1; }
    double probability(int n) const;
    int sample(Rng& rng) const;

private:
    int min_ = 1;
    std::vector<double> weights_;
    std::vector<double> cumulative_;
};

/// Draws n from `dist` until n >= count. Throws DataError when no value in the
/// support can satisfy the constraint.
int impute_demand(int count, const DemandDistribution& dist, Rng& rng);

/// One observation as the sampler sees it. `doc` is the index of the unit that
/// owns a strategy distribution (a customer or a strategy group).
struct LdaRecord {
    int doc = 0;
    int own_award = 0;
    int bin = 0;
    int count = 0;
    bool imputed = false;
    /// Identity used to derive the initial label; defaults to the record's
    /// position. Keeping keys fixed makes initialization order-independent.
    std::uint64_t key = kPositionKey;

    static constexpr std::uint64_t kPositionKey = ~std::uint64_t{0};
};

/// Converts company records into sampler records. doc_of maps customer id to
/// document index. Records without demand are imputed once via impute_demand.
std::vector<LdaRecord> to_lda_records(std::span<const ConsumptionRecord> records,
                                      const std::function<int(int)>& doc_of, int acc,
                                      const DemandDistribution* demand, Rng& rng);

/// Row-stochastic |B1| x |B2| x acc table: distribution over usage bins given an
/// award pair.
class PreferenceMatrix {
public:
    PreferenceMatrix() = default;
    PreferenceMatrix(int own_arity, int opp_arity, int acc);

    int own_arity() const { return own_; }
    int opp_arity() const { return opp_; }
    int acc() const { return acc_; }
    double& at(int b1, int k, int h) { return data_[index(b1, k, h)]; }
    double at(int b1, int k, int h) const { return data_[index(b1, k, h)]; }
    std::span<const double> row(int b1, int k) const {
        return {data_.data() + index(b1, k, 0), static_cast<std::size_t>(acc_)};
    }
    std::span<double> row(int b1, int k) {
        return {data_.data() + index(b1, k, 0), static_cast<std::size_t>(acc_)};
    }
    const std::vector<double>& flat() const { return data_; }

    /// Mean usage fraction of a row using bin midpoints (h + 0.5) / acc.
    double expected_usage(int b1, int k) const;
    /// Expected bin index of opponent label k, averaged over own awards.
    double expected_bin(int k) const;

private:
    std::size_t index(int b1, int k, int h) const {
        return (static_cast<std::size_t>(b1) * opp_ + k) * acc_ + h;
    }
    int own_ = 0, opp_ = 0, acc_ = 0;
    std::vector<double> data_;
};

/// One categorical over opponent awards per document.
class StrategyDistribution {
public:
    StrategyDistribution() = default;
    StrategyDistribution(int num_docs, int opp_arity);

    int num_docs() const { return docs_; }
    int opp_arity() const { return opp_; }
    double& at(int doc, int k) { return data_[static_cast<std::size_t>(doc) * opp_ + k]; }
    double at(int doc, int k) const { return data_[static_cast<std::size_t>(doc) * opp_ + k]; }
    std::span<const double> row(int doc) const {
        return {data_.data() + static_cast<std::size_t>(doc) * opp_, static_cast<std::size_t>(opp_)};
    }
    std::span<double> row(int doc) {
        return {data_.data() + static_cast<std::size_t>(doc) * opp_, static_cast<std::size_t>(opp_)};
    }

private:
    int docs_ = 0, opp_ = 0;
    std::vector<double> data_;
};

struct Estimates {
    PreferenceMatrix pref;
    StrategyDistribution theta;
};

/// Collapsed sampler state: one opponent-award assignment per record plus the
/// four count tables of the conditional posterior.
class GibbsState {
public:
    GibbsState(const LdaConfig& config, std::vector<LdaRecord> records, int num_docs,
               const DemandDistribution* demand = nullptr);

    /// Assigns every record from a hash of (seed, record key), so the same
    /// record gets the same initial label under any record order.
    void initialize(std::uint64_t seed);

    const LdaConfig& config() const { return config_; }
    std::size_t num_records() const { return records_.size(); }
    int num_docs() const { return docs_; }
    const LdaRecord& record(std::size_t i) const { return records_[i]; }
    int assignment(std::size_t i) const { return assign_[i]; }
    bool is_assigned(std::size_t i) const { return assign_[i] >= 0; }

    // Count tables.
    int bin_count(int b1, int k, int h) const { return hk_[hk_index(b1, k, h)]; }
    int pair_count(int b1, int k) const { return pair_[pair_index(b1, k)]; }
    int doc_label_count(int doc, int k) const { return jk_[static_cast<std::size_t>(doc) * K_ + k]; }
    int doc_count(int doc) const { return j_[static_cast<std::size_t>(doc)]; }

    /// Removes record i from all tables ("-i" statistics).
    void remove(std::size_t i);
    /// Assigns label k to a removed record and adds it back.
    void insert(std::size_t i, int k);
    /// Re-draws the demand of an imputed, currently removed record.
    void reimpute(std::size_t i, Rng& rng);

    /// Normalized distribution over opponent labels for removed record i.
    /// Throws StateError if any table entry involved is negative.
    void conditional_posterior(std::size_t i, std::span<double> out) const;

    /// Throws StateError unless all row sums agree and every count is >= 0.
    void check_consistency() const;

    /// Log of the collapsed joint P(bins, labels | own awards, alpha, beta).
    double log_joint() const;

private:
    std::size_t hk_index(int b1, int k, int h) const {
        return (static_cast<std::size_t>(b1) * K_ + k) * acc_ + h;
    }
    std::size_t pair_index(int b1, int k) const { return static_cast<std::size_t>(b1) * K_ + k; }

    LdaConfig config_;
    std::vector<LdaRecord> records_;
    int docs_;
    int K_;
    int acc_;
    const DemandDistribution* demand_;
    std::vector<int> assign_;
    std::vector<int> hk_, pair_, jk_, j_;
};

/// Visits every record once in order: remove, draw a label from the conditional
/// posterior, reinsert.
void gibbs_sweep(GibbsState& state, Rng& rng);

/// Posterior means of the smoothed count ratios over retained samples.
class PosteriorAccumulator {
public:
    PosteriorAccumulator(int own_arity, int opp_arity, int acc, int num_docs);
    void add(const GibbsState& state);
    int samples() const { return samples_; }
    /// Throws StateError when no sample has been added.
    Estimates mean() const;

private:
    Estimates sum_;
    int samples_ = 0;
};

Estimates estimate(std::span<const GibbsState> samples);

struct AlignedEstimates {
    Estimates estimates;
    /// permutation[new_label] = old_label.
    std::vector<int> permutation;
};

/// Relabels opponent awards so that the expected usage bin is non-increasing in
/// the label. Ties keep the original order.
AlignedEstimates align_labels(const Estimates& estimates);

/// Mixture sum_k theta(k) * pref(. | b1, k).
std::vector<double> predict_bin_distribution(const PreferenceMatrix& pref,
                                             std::span<const double> theta, int b1);

struct ChainDiagnostics {
    int chain = 0;
    std::vector<double> log_joint;  // one entry per sweep
};

struct InferenceResult {
    Estimates estimates;  // aligned, averaged over chains
    std::vector<std::vector<int>> permutations;
    std::vector<ChainDiagnostics> diagnostics;
};

/// Runs config.chains independent chains (in parallel up to `threads`), aligns
/// each chain's estimates and averages them. Deterministic in config.seed.
InferenceResult run_inference(const std::vector<LdaRecord>& records, int num_docs,
                              const LdaConfig& config, const DemandDistribution* demand = nullptr,
                              int threads = 1);

struct SyntheticData {
    std::vector<ConsumptionRecord> records;
    std::vector<int> hidden_opp_award;
    std::vector<int> hidden_bin;
};

using OwnAwardPolicy = std::function<int(int customer, int period, Rng& rng)>;

/// Samples records from the generative model: b2 ~ theta(customer), b1 from
/// own_policy, n ~ demand, bin ~ pref(b1, b2), and a count uniform among the
/// counts that discretize to that bin. If the bin is unreachable for the drawn
/// n, n is redrawn.
SyntheticData generate_synthetic(const StrategyDistribution& theta, const PreferenceMatrix& pref,
                                 const DemandDistribution& demand, const OwnAwardPolicy& own_policy,
                                 int periods, Rng& rng);

void write_preference(const std::filesystem::path& path, const PreferenceMatrix& pref);
void write_strategy(const std::filesystem::path& path, const StrategyDistribution& theta,
                    std::span<const int> doc_ids);
void write_diagnostics(const std::filesystem::path& path, std::span<const ChainDiagnostics> diags);
PreferenceMatrix read_preference(const std::filesystem::path& path);
/// Returns the distribution plus the id column of each row block.
std::pair<StrategyDistribution, std::vector<int>> read_strategy(const std::filesystem::path& path);

}  // namespace pricewar::lda
