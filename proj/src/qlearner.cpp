#include "pricewar/qlearner.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>

#include "pricewar/error.hpp"

namespace pricewar {

void QLearnerConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (!(discount >= 0.0 && discount < 1.0)) throw ConfigError("discount must lie in [0, 1)");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (replay_capacity <= static_cast<std::size_t>(batch_size))
        throw ConfigError("replay_capacity must exceed batch_size");
    if (hidden_width < 1) throw ConfigError("hidden_width must be >= 1");
    if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0))
        throw ConfigError("epsilon bounds must lie in [0, 1]");
    if (!(epsilon_decay_fraction >= 0.0 && epsilon_decay_fraction <= 1.0))
        throw ConfigError("epsilon_decay_fraction must lie in [0, 1]");
    if (target_sync_interval < 0) throw ConfigError("target_sync_interval must be >= 0");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, int state_dim)
    : capacity_(capacity), dim_(state_dim) {
    if (capacity_ == 0) throw ConfigError("replay capacity must be > 0");
    // Storage grows with use; a full buffer is only paid for when reached.
}

void ReplayBuffer::push(std::span<const double> state, int action, double reward,
                        std::span<const double> next_state) {
    const auto dim = static_cast<std::size_t>(dim_);
    if (state.size() != dim || next_state.size() != dim)
        throw ConfigError("transition state dimension mismatch");
    if (size_ < capacity_) {
        states_.insert(states_.end(), state.begin(), state.end());
        next_.insert(next_.end(), next_state.begin(), next_state.end());
        actions_.push_back(action);
        rewards_.push_back(reward);
        ++size_;
        head_ = size_ % capacity_;
        return;
    }
    std::copy(state.begin(), state.end(), states_.begin() + static_cast<std::ptrdiff_t>(head_ * dim));
    std::copy(next_state.begin(), next_state.end(), next_.begin() + static_cast<std::ptrdiff_t>(head_ * dim));
    actions_[head_] = action;
    rewards_[head_] = reward;
    head_ = (head_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
    std::vector<std::size_t> out(batch);
    if (size_ == 0) return {};
    std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
    for (auto& i : out) i = pick(rng);
    return out;
}

QLearner::QLearner(const QLearnerConfig& config, int state_dim, int num_actions)
    : config_(config), state_dim_(state_dim), actions_(num_actions),
      rng_(make_stream(config.seed, {0x91e})), buffer_(config.replay_capacity, state_dim) {
    config_.validate();
    if (state_dim < 1 || num_actions < 1) throw ConfigError("state and action sizes must be >= 1");
    Rng init = make_stream(config.seed, {0x1417});
    net_ = Mlp(state_dim, config.hidden_width, num_actions, init);
    if (config_.target_sync_interval > 0) target_ = net_;
}

void QLearner::remember(std::span<const double> state, int action, double r,
                        std::span<const double> next_state) {
    if (action < 0 || action >= actions_) throw ConfigError("action index out of range");
    buffer_.push(state, action, r * config_.reward_scale, next_state);
}

std::optional<double> QLearner::train_step() {
    if (buffer_.size() == 0) return std::nullopt;
    const auto batch = buffer_.sample(static_cast<std::size_t>(config_.batch_size), rng_);
    const auto n = static_cast<Eigen::Index>(batch.size());
    Eigen::MatrixXd x(state_dim_, n), x_next(state_dim_, n);
    std::vector<int> acts(batch.size());
    for (Eigen::Index b = 0; b < n; ++b) {
        const std::size_t i = batch[static_cast<std::size_t>(b)];
        const auto s = buffer_.state(i);
        const auto s2 = buffer_.next_state(i);
        for (int d = 0; d < state_dim_; ++d) {
            x(d, b) = s[static_cast<std::size_t>(d)];
            x_next(d, b) = s2[static_cast<std::size_t>(d)];
        }
        acts[static_cast<std::size_t>(b)] = buffer_.action(i);
    }
    const Eigen::MatrixXd q_next = (target_ ? *target_ : net_).forward(x_next);
    std::vector<double> targets(batch.size());
    for (Eigen::Index b = 0; b < n; ++b)
        targets[static_cast<std::size_t>(b)] =
            buffer_.reward(batch[static_cast<std::size_t>(b)]) + config_.discount * q_next.col(b).maxCoeff();
    const double loss = net_.train_step(x, acts, targets, config_.learning_rate, config_.optimizer);
    ++train_steps_;
    if (target_ && train_steps_ % config_.target_sync_interval == 0) target_ = net_;
    return loss;
}

Eigen::MatrixXd QLearner::q_values(const Eigen::MatrixXd& states) const { return net_.forward(states); }

double QLearner::epsilon(std::int64_t step, std::int64_t total_steps) const {
    const double horizon = config_.epsilon_decay_fraction * static_cast<double>(total_steps);
    if (horizon <= 0.0) return config_.epsilon_end;
    const double frac = static_cast<double>(step) / horizon;
    if (frac >= 1.0) return config_.epsilon_end;
    return config_.epsilon_start + (config_.epsilon_end - config_.epsilon_start) * frac;
}

namespace {
std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace

void QLearner::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "pricewar-qlearner 1\n"
        << "state_dim " << state_dim_ << "\n"
        << "num_actions " << actions_ << "\n"
        << "hidden_width " << config_.hidden_width << "\n"
        << "learning_rate " << fmt17(config_.learning_rate) << "\n"
        << "discount " << fmt17(config_.discount) << "\n"
        << "reward_weight " << fmt17(config_.reward_weight) << "\n"
        << "reward_scale " << fmt17(config_.reward_scale) << "\n"
        << "optimizer " << (config_.optimizer == Optimizer::Adam ? "adam" : "sgd") << "\n";
    const auto params = net_.parameters();
    out << "parameters " << params.size() << "\n";
    for (double p : params) out << fmt17(p) << "\n";
}

QLearner QLearner::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::string key;
    int version = 0;
    in >> key >> version;
    if (key != "pricewar-qlearner" || version != 1) throw DataError("not a pricewar checkpoint");
    QLearnerConfig cfg;
    int state_dim = 0, num_actions = 0;
    std::size_t count = 0;
    std::string optimizer;
    auto expect = [&](const char* name) {
        in >> key;
        if (key != name) throw DataError(std::string("checkpoint: expected '") + name + "'");
    };
    expect("state_dim"); in >> state_dim;
    expect("num_actions"); in >> num_actions;
    expect("hidden_width"); in >> cfg.hidden_width;
    expect("learning_rate"); in >> cfg.learning_rate;
    expect("discount"); in >> cfg.discount;
    expect("reward_weight"); in >> cfg.reward_weight;
    expect("reward_scale"); in >> cfg.reward_scale;
    expect("optimizer"); in >> optimizer;
    cfg.optimizer = optimizer == "sgd" ? Optimizer::Sgd : Optimizer::Adam;
    expect("parameters"); in >> count;
    if (!in) throw DataError("checkpoint header is truncated");
    std::vector<double> params(count);
    for (auto& p : params)
        if (!(in >> p)) throw DataError("checkpoint parameter array is truncated");
    QLearner learner(cfg, state_dim, num_actions);
    learner.net_.set_parameters(params);
    if (learner.target_) learner.target_ = learner.net_;
    return learner;
}

std::optional<double> q_update(QLearner& learner, std::span<const double> state, int action,
                               double r, std::span<const double> next_state) {
    learner.remember(state, action, r, next_state);
    return learner.train_step();
}

}  // namespace pricewar
