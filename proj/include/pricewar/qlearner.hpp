#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "pricewar/mlp.hpp"
#include "pricewar/rng.hpp"

namespace pricewar {

/// Per-customer reward: captured consumptions minus the weighted award cost.
inline double reward(int count, double award_cost, double xi) { return count - xi * award_cost; }

struct QLearnerConfig {
    double learning_rate = 0.01;
    double discount = 0.9;  // lambda
    std::size_t replay_capacity = 200000;
    int batch_size = 64;
    int hidden_width = 512;
    double reward_weight = 0.5;  // xi
    /// Rewards are multiplied by this before they are stored.
    double reward_scale = 1.0;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    /// Fraction of the decision steps over which epsilon decays linearly.
    double epsilon_decay_fraction = 0.2;
    /// Copy online weights into a separate target network every N train steps;
    /// 0 bootstraps from the online network.
    int target_sync_interval = 0;
    Optimizer optimizer = Optimizer::Adam;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Fixed-capacity ring of transitions. States are stored as float.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, int state_dim);

    void push(std::span<const double> state, int action, double reward,
              std::span<const double> next_state);
    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    int state_dim() const { return dim_; }

    /// Uniform sample with replacement.
    std::vector<std::size_t> sample(std::size_t batch, Rng& rng) const;

    std::span<const float> state(std::size_t i) const {
        return {states_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }
    std::span<const float> next_state(std::size_t i) const {
        return {next_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }
    int action(std::size_t i) const { return actions_[i]; }
    double reward(std::size_t i) const { return rewards_[i]; }

private:
    std::size_t capacity_;
    int dim_;
    std::size_t size_ = 0;
    std::size_t head_ = 0;
    std::vector<float> states_, next_;
    std::vector<int> actions_;
    std::vector<double> rewards_;
};

/// Value-based learner: Q(s, a) is moved toward r + lambda * max_a' Q(s', a')
/// on minibatches drawn from the replay buffer.
class QLearner {
public:
    QLearner(const QLearnerConfig& config, int state_dim, int num_actions);

    const QLearnerConfig& config() const { return config_; }
    int state_dim() const { return state_dim_; }
    int num_actions() const { return actions_; }
    const Mlp& network() const { return net_; }
    Mlp& network() { return net_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    std::int64_t train_steps() const { return train_steps_; }

    /// Stores a transition; the reward is scaled by config.reward_scale.
    void remember(std::span<const double> state, int action, double reward,
                  std::span<const double> next_state);

    /// Samples one minibatch and takes one optimizer step. Returns the batch
    /// loss, or nullopt (and does nothing) when the buffer is empty.
    std::optional<double> train_step();

    /// Q-values for a batch of states (columns).
    Eigen::MatrixXd q_values(const Eigen::MatrixXd& states) const;

    double epsilon(std::int64_t step, std::int64_t total_steps) const;

    void save(const std::filesystem::path& path) const;
    static QLearner load(const std::filesystem::path& path);

private:
    QLearnerConfig config_;
    int state_dim_;
    int actions_;
    Rng rng_;
    Mlp net_;
    std::optional<Mlp> target_;
    ReplayBuffer buffer_;
    std::int64_t train_steps_ = 0;
};

/// Bundles remember() + train_step(): the single-transition form of the update.
std::optional<double> q_update(QLearner& learner, std::span<const double> state, int action,
                               double reward, std::span<const double> next_state);

}  // namespace pricewar
