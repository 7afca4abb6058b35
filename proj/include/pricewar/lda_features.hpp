#pragma once

#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pricewar/lda.hpp"

namespace pricewar {

enum class StateVariant { Dqn, DqnP, DqnS, DqnLda };

StateVariant parse_state_variant(const std::string& name);
std::string to_string(StateVariant variant);
bool uses_pref(StateVariant v);
bool uses_strategy(StateVariant v);

/// One (own award, usage bin) observation of a customer.
struct HistoryItem {
    int award = 0;
    int bin = 0;
};

struct StateLayout {
    int window = 10;
    int own_arity = 5;
    int opp_arity = 5;
    int acc = 10;

    /// Length of the state vector for a variant.
    int size(StateVariant v) const;
};

/// Builds the learner input. Layout, in order:
///   history: `window` pairs (award / (|B1|-1), (bin + 0.5) / acc), most recent
///            first, zero-padded when fewer observations exist;
///   pref:    the group's preference table flattened as (b1, b2, bin);
///   strat:   the customer's strategy distribution over opponent labels.
/// Throws ConfigError if the variant needs a feature that is missing.
std::vector<double> build_state(StateVariant variant, const StateLayout& layout,
                                std::span<const HistoryItem> history_recent_first,
                                const lda::PreferenceMatrix* pref, std::span<const double> theta);

struct LdaFeatureSettings {
    lda::LdaConfig lda{.acc = 10, .sweeps = 200, .burn_in = 100, .thin = 5, .chains = 1};
    /// Periods of own records fed to each inference run.
    int window = 20;
    /// Re-run inference every this many rounds.
    int refresh_interval = 1;
    int threads = 1;
};

/// Keeps a company's recent records per customer group and re-estimates the
/// group preference table and per-customer strategy distributions on demand.
class LdaFeatureProvider {
public:
    LdaFeatureProvider(const LdaFeatureSettings& settings, int own_arity, int opp_arity,
                       std::span<const int> customer_group);

    void observe(std::span<const ConsumptionRecord> records);

    /// Runs inference if `round` is a refresh round and records exist. Returns
    /// true when the estimates changed.
    bool maybe_refresh(int round);

    bool ready() const { return ready_; }
    int num_groups() const { return static_cast<int>(group_pref_.size()); }
    const lda::PreferenceMatrix& pref(int group) const { return group_pref_[static_cast<std::size_t>(group)]; }
    std::span<const double> theta(int customer) const;
    const LdaFeatureSettings& settings() const { return settings_; }

private:
    void refresh(int round);

    LdaFeatureSettings settings_;
    int own_arity_, opp_arity_;
    std::vector<int> group_of_;
    std::vector<int> local_index_;  // customer -> index within its group
    std::vector<std::vector<int>> members_;
    std::deque<std::vector<ConsumptionRecord>> window_;  // one entry per period
    std::vector<lda::PreferenceMatrix> group_pref_;
    std::vector<double> theta_;  // customers x opp_arity
    bool ready_ = false;
};

}  // namespace pricewar
