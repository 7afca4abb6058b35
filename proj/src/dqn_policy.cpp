#include "pricewar/dqn_policy.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "pricewar/error.hpp"

namespace pricewar {

DqnPolicy::DqnPolicy(const DqnSettings& settings, const QLearnerConfig& qconfig,
                     const LdaFeatureSettings& features, const AwardSet& own_awards, int opp_arity,
                     std::span<const int> customer_group)
    : settings_(settings), awards_(own_awards),
      layout_{settings.history_window, own_awards.size(), opp_arity, features.lda.acc},
      group_of_(customer_group.begin(), customer_group.end()),
      learner_(qconfig, layout_.size(settings.variant), own_awards.size()),
      history_(customer_group.size()) {
    if (settings_.history_window < 1) throw ConfigError("history_window must be >= 1");
    if (settings_.train_batches_per_round < 0) throw ConfigError("train_batches_per_round must be >= 0");
    if (uses_pref(settings_.variant) || uses_strategy(settings_.variant))
        features_.emplace(features, own_awards.size(), opp_arity, customer_group);
}

std::vector<double> DqnPolicy::state_of(int customer) const {
    const lda::PreferenceMatrix* pref = nullptr;
    std::span<const double> theta;
    if (features_) {
        pref = &features_->pref(group_of_[static_cast<std::size_t>(customer)]);
        theta = features_->theta(customer);
    }
    return build_state(settings_.variant, layout_, history_[static_cast<std::size_t>(customer)], pref, theta);
}

std::vector<int> DqnPolicy::choose_awards(const RoundContext& ctx, Rng& rng) {
    if (ctx.num_customers != static_cast<int>(history_.size()))
        throw ConfigError("policy was built for a different number of customers");
    if (features_) features_->maybe_refresh(ctx.round);

    const int m = ctx.num_customers;
    const int dim = learner_.state_dim();
    Eigen::MatrixXd x(dim, m);
    last_states_.resize(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        last_states_[static_cast<std::size_t>(j)] = state_of(j);
        x.col(j) = Eigen::Map<const Eigen::VectorXd>(last_states_[static_cast<std::size_t>(j)].data(), dim);
    }
    const Eigen::MatrixXd q = learner_.q_values(x);
    const double eps = learner_.epsilon(rounds_seen_, settings_.total_rounds);

    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<int> out(static_cast<std::size_t>(m), 0);
    double budget = ctx.budget_available;
    const int num_awards = awards_.size();
    for (int j : order) {
        int affordable = 1;
        while (affordable < num_awards && awards_.cost(affordable) <= budget + 1e-9) ++affordable;
        int action = 0;
        if (unit(rng) < eps) {
            action = std::uniform_int_distribution<int>(0, affordable - 1)(rng);
        } else {
            for (int a = 1; a < affordable; ++a)
                if (q(a, j) > q(action, j)) action = a;
        }
        out[static_cast<std::size_t>(j)] = action;
        budget -= awards_.cost(action);
    }
    return out;
}

void DqnPolicy::observe(const RoundFeedback& feedback) {
    const auto& records = feedback.records;
    if (features_) features_->observe(records);
    const bool have_states = last_states_.size() == history_.size();
    for (const auto& r : records) {
        const auto j = static_cast<std::size_t>(r.customer);
        if (j >= history_.size()) throw DataError("record customer outside the market");
        if (!r.demand) throw DataError("DQN policy needs records with demand");
        auto& h = history_[j];
        h.insert(h.begin(), HistoryItem{r.own_award, discretize(r.count, *r.demand, layout_.acc)});
        if (static_cast<int>(h.size()) > layout_.window) h.pop_back();
        if (have_states) {
            const auto next = state_of(r.customer);
            learner_.remember(last_states_[j], r.own_award,
                              reward(r.count, awards_.cost(r.own_award), learner_.config().reward_weight),
                              next);
        }
    }
    for (int b = 0; b < settings_.train_batches_per_round; ++b) learner_.train_step();
    ++rounds_seen_;
}

}  // namespace pricewar
