#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "pricewar/lda_features.hpp"
#include "pricewar/policy.hpp"
#include "pricewar/qlearner.hpp"

namespace pricewar {

struct DqnSettings {
    StateVariant variant = StateVariant::Dqn;
    int history_window = 10;
    int train_batches_per_round = 16;
    /// Decision rounds over which the epsilon schedule is laid out.
    int total_rounds = 200;
};

/// Online DQN award policy. Every round it builds one state per customer,
/// picks epsilon-greedy actions, keeps the spend within the round budget by
/// falling back to the best affordable action (customers visited in a random
/// order), and after the round stores one transition per customer and trains.
class DqnPolicy : public AwardPolicy {
public:
    DqnPolicy(const DqnSettings& settings, const QLearnerConfig& qconfig,
              const LdaFeatureSettings& features, const AwardSet& own_awards, int opp_arity,
              std::span<const int> customer_group);

    std::string name() const override { return to_string(settings_.variant); }
    std::vector<int> choose_awards(const RoundContext& ctx, Rng& rng) override;
    void observe(const RoundFeedback& feedback) override;

    const QLearner& learner() const { return learner_; }
    const StateLayout& layout() const { return layout_; }

private:
    std::vector<double> state_of(int customer) const;

    DqnSettings settings_;
    AwardSet awards_;
    StateLayout layout_;
    std::vector<int> group_of_;
    std::optional<LdaFeatureProvider> features_;
    QLearner learner_;
    std::vector<std::vector<HistoryItem>> history_;  // most recent first
    std::vector<std::vector<double>> last_states_;
    int rounds_seen_ = 0;
};

}  // namespace pricewar
