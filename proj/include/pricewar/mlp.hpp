#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "pricewar/rng.hpp"

namespace pricewar {

enum class Optimizer { Sgd, Adam };

/// inputs -> ReLU hidden layer -> linear outputs (one Q-value per action).
/// Columns of every input matrix are samples.
class Mlp {
public:
    Mlp() = default;
    Mlp(int inputs, int hidden, int outputs, Rng& rng);

    int inputs() const { return static_cast<int>(w1_.cols()); }
    int hidden() const { return static_cast<int>(w1_.rows()); }
    int outputs() const { return static_cast<int>(w2_.rows()); }

    Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;

    /// 0.5 * mean over samples of (Q(x_b, a_b) - y_b)^2.
    double loss(const Eigen::MatrixXd& x, std::span<const int> actions,
                std::span<const double> targets) const;

    /// Gradient of loss() with respect to parameters(), same layout.
    std::vector<double> gradient(const Eigen::MatrixXd& x, std::span<const int> actions,
                                 std::span<const double> targets) const;

    /// One optimizer step on loss(). Returns the loss before the step.
    double train_step(const Eigen::MatrixXd& x, std::span<const int> actions,
                      std::span<const double> targets, double learning_rate, Optimizer optimizer);

    std::size_t parameter_count() const;
    /// Flattened as W1 (column-major), b1, W2 (column-major), b2.
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> flat);

private:
    struct Grads {
        Eigen::MatrixXd w1, w2;
        Eigen::VectorXd b1, b2;
    };
    Grads backprop(const Eigen::MatrixXd& x, std::span<const int> actions,
                   std::span<const double> targets, double* loss_out) const;

    Eigen::MatrixXd w1_, w2_;
    Eigen::VectorXd b1_, b2_;
    // Adam moments, lazily sized.
    std::vector<double> m_, v_;
    std::int64_t adam_steps_ = 0;
};

}  // namespace pricewar
