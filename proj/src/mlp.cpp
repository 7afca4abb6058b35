#include "pricewar/mlp.hpp"

#include <cmath>
#include <random>

#include "pricewar/error.hpp"

namespace pricewar {

Mlp::Mlp(int inputs, int hidden, int outputs, Rng& rng) {
    if (inputs < 1 || hidden < 1 || outputs < 1) throw ConfigError("network sizes must be >= 1");
    w1_.resize(hidden, inputs);
    w2_.resize(outputs, hidden);
    b1_ = Eigen::VectorXd::Zero(hidden);
    b2_ = Eigen::VectorXd::Zero(outputs);
    // He-uniform for the ReLU layer, Glorot-uniform for the linear head.
    const double r1 = std::sqrt(6.0 / inputs);
    const double r2 = std::sqrt(6.0 / (hidden + outputs));
    std::uniform_real_distribution<double> u1(-r1, r1), u2(-r2, r2);
    for (Eigen::Index c = 0; c < w1_.cols(); ++c)
        for (Eigen::Index r = 0; r < w1_.rows(); ++r) w1_(r, c) = u1(rng);
    for (Eigen::Index c = 0; c < w2_.cols(); ++c)
        for (Eigen::Index r = 0; r < w2_.rows(); ++r) w2_(r, c) = u2(rng);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
    if (x.rows() != w1_.cols()) throw ConfigError("input dimension does not match the network");
    Eigen::MatrixXd a1 = ((w1_ * x).colwise() + b1_).cwiseMax(0.0);
    return (w2_ * a1).colwise() + b2_;
}

Mlp::Grads Mlp::backprop(const Eigen::MatrixXd& x, std::span<const int> actions,
                         std::span<const double> targets, double* loss_out) const {
    const auto batch = x.cols();
    if (x.rows() != w1_.cols()) throw ConfigError("input dimension does not match the network");
    if (static_cast<Eigen::Index>(actions.size()) != batch ||
        static_cast<Eigen::Index>(targets.size()) != batch)
        throw ConfigError("batch sizes of states, actions and targets differ");

    const Eigen::MatrixXd z1 = (w1_ * x).colwise() + b1_;
    const Eigen::MatrixXd a1 = z1.cwiseMax(0.0);
    const Eigen::MatrixXd q = (w2_ * a1).colwise() + b2_;

    Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(q.rows(), q.cols());
    double loss = 0.0;
    for (Eigen::Index b = 0; b < batch; ++b) {
        const int a = actions[static_cast<std::size_t>(b)];
        if (a < 0 || a >= q.rows()) throw ConfigError("action index out of range");
        const double err = q(a, b) - targets[static_cast<std::size_t>(b)];
        loss += 0.5 * err * err;
        dq(a, b) = err / static_cast<double>(batch);
    }
    if (loss_out) *loss_out = loss / static_cast<double>(batch);

    Grads g;
    g.w2 = dq * a1.transpose();
    g.b2 = dq.rowwise().sum();
    const Eigen::MatrixXd dz1 = (w2_.transpose() * dq).cwiseProduct((z1.array() > 0.0).cast<double>().matrix());
    g.w1 = dz1 * x.transpose();
    g.b1 = dz1.rowwise().sum();
    return g;
}

double Mlp::loss(const Eigen::MatrixXd& x, std::span<const int> actions,
                 std::span<const double> targets) const {
    const Eigen::MatrixXd q = forward(x);
    double loss = 0.0;
    for (Eigen::Index b = 0; b < q.cols(); ++b) {
        const double err = q(actions[static_cast<std::size_t>(b)], b) - targets[static_cast<std::size_t>(b)];
        loss += 0.5 * err * err;
    }
    return loss / static_cast<double>(q.cols());
}

std::vector<double> Mlp::gradient(const Eigen::MatrixXd& x, std::span<const int> actions,
                                  std::span<const double> targets) const {
    const Grads g = backprop(x, actions, targets, nullptr);
    std::vector<double> flat;
    flat.reserve(parameter_count());
    flat.insert(flat.end(), g.w1.data(), g.w1.data() + g.w1.size());
    flat.insert(flat.end(), g.b1.data(), g.b1.data() + g.b1.size());
    flat.insert(flat.end(), g.w2.data(), g.w2.data() + g.w2.size());
    flat.insert(flat.end(), g.b2.data(), g.b2.data() + g.b2.size());
    return flat;
}

double Mlp::train_step(const Eigen::MatrixXd& x, std::span<const int> actions,
                       std::span<const double> targets, double learning_rate, Optimizer optimizer) {
    double loss = 0.0;
    Grads g = backprop(x, actions, targets, &loss);
    if (optimizer == Optimizer::Sgd) {
        w1_ -= learning_rate * g.w1;
        b1_ -= learning_rate * g.b1;
        w2_ -= learning_rate * g.w2;
        b2_ -= learning_rate * g.b2;
        return loss;
    }
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    if (m_.size() != parameter_count()) {
        m_.assign(parameter_count(), 0.0);
        v_.assign(parameter_count(), 0.0);
        adam_steps_ = 0;
    }
    ++adam_steps_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam_steps_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam_steps_));
    std::size_t offset = 0;
    auto apply = [&](double* param, const double* grad, Eigen::Index n) {
        for (Eigen::Index i = 0; i < n; ++i, ++offset) {
            m_[offset] = kBeta1 * m_[offset] + (1 - kBeta1) * grad[i];
            v_[offset] = kBeta2 * v_[offset] + (1 - kBeta2) * grad[i] * grad[i];
            param[i] -= learning_rate * (m_[offset] / c1) / (std::sqrt(v_[offset] / c2) + kEps);
        }
    };
    apply(w1_.data(), g.w1.data(), w1_.size());
    apply(b1_.data(), g.b1.data(), b1_.size());
    apply(w2_.data(), g.w2.data(), w2_.size());
    apply(b2_.data(), g.b2.data(), b2_.size());
    return loss;
}

std::size_t Mlp::parameter_count() const {
    return static_cast<std::size_t>(w1_.size() + b1_.size() + w2_.size() + b2_.size());
}

std::vector<double> Mlp::parameters() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    flat.insert(flat.end(), w1_.data(), w1_.data() + w1_.size());
    flat.insert(flat.end(), b1_.data(), b1_.data() + b1_.size());
    flat.insert(flat.end(), w2_.data(), w2_.data() + w2_.size());
    flat.insert(flat.end(), b2_.data(), b2_.data() + b2_.size());
    return flat;
}

void Mlp::set_parameters(std::span<const double> flat) {
    if (flat.size() != parameter_count()) throw ConfigError("parameter vector has the wrong size");
    const double* p = flat.data();
    std::copy(p, p + w1_.size(), w1_.data());
    p += w1_.size();
    std::copy(p, p + b1_.size(), b1_.data());
    p += b1_.size();
    std::copy(p, p + w2_.size(), w2_.data());
    p += w2_.size();
    std::copy(p, p + b2_.size(), b2_.data());
}

}  // namespace pricewar
