#pragma once

// Fully connected Q-network (ReLU hidden layers, linear output) with all
// weights and biases stored in one flat vector, plus an Adam optimizer over it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace rlvqsd {

using RMatrix = Eigen::MatrixXd;

class QNetwork {
public:
    QNetwork() = default;

    /// Zero-initialised network with the given layer widths (input first).
    explicit QNetwork(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
        if (sizes_.size() < 2) throw std::invalid_argument("QNetwork needs at least input and output sizes");
        for (auto s : sizes_)
            if (s == 0) throw std::invalid_argument("QNetwork layer sizes must be positive");
        std::size_t total = 0;
        for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
            w_off_.push_back(total);
            total += sizes_[l + 1] * sizes_[l];
            b_off_.push_back(total);
            total += sizes_[l + 1];
        }
        params_.assign(total, 0.0);
    }

    /// Glorot-uniform weights, zero biases.
    template <class Rng>
    void init_glorot(Rng& rng) {
        std::fill(params_.begin(), params_.end(), 0.0);
        for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
            const double limit = std::sqrt(6.0 / static_cast<double>(sizes_[l] + sizes_[l + 1]));
            std::uniform_real_distribution<double> u(-limit, limit);
            auto w = weights(l);
            for (Eigen::Index j = 0; j < w.cols(); ++j)
                for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = u(rng);
        }
    }

    const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
    std::size_t input_size() const { return sizes_.front(); }
    std::size_t output_size() const { return sizes_.back(); }
    std::size_t n_layers() const { return sizes_.size() - 1; }

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    Eigen::Map<RMatrix> weights(std::size_t l) { return {params_.data() + w_off_[l], rows(l), cols(l)}; }
    Eigen::Map<const RMatrix> weights(std::size_t l) const { return {params_.data() + w_off_[l], rows(l), cols(l)}; }
    Eigen::Map<Eigen::VectorXd> bias(std::size_t l) { return {params_.data() + b_off_[l], rows(l)}; }
    Eigen::Map<const Eigen::VectorXd> bias(std::size_t l) const { return {params_.data() + b_off_[l], rows(l)}; }

    /// Q-values for every column of `x` (one input per column).
    RMatrix forward(const RMatrix& x) const {
        if (static_cast<std::size_t>(x.rows()) != input_size()) throw std::invalid_argument("QNetwork input size mismatch");
        RMatrix a = x;
        for (std::size_t l = 0; l < n_layers(); ++l) {
            RMatrix z = (weights(l) * a).colwise() + bias(l);
            a = l + 1 < n_layers() ? RMatrix(z.cwiseMax(0.0)) : std::move(z);
        }
        return a;
    }

    Eigen::VectorXd forward(std::span<const double> x) const {
        return forward(RMatrix(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()))));
    }

    bool same_architecture(const QNetwork& o) const { return sizes_ == o.sizes_; }

    /// Mean Huber (delta = 1) loss between Q(x_i, a_i) and y_i, with the
    /// gradient with respect to every parameter written into `grad`.
    double huber_loss_and_gradient(const RMatrix& x, std::span<const std::size_t> actions, std::span<const double> targets,
                                   std::vector<double>& grad) const {
        const auto batch = x.cols();
        if (static_cast<std::size_t>(batch) != actions.size() || actions.size() != targets.size() || batch == 0)
            throw std::invalid_argument("batch sizes disagree");

        std::vector<RMatrix> acts{x};
        acts.reserve(n_layers() + 1);
        for (std::size_t l = 0; l < n_layers(); ++l) {
            RMatrix z = (weights(l) * acts.back()).colwise() + bias(l);
            acts.push_back(l + 1 < n_layers() ? RMatrix(z.cwiseMax(0.0)) : std::move(z));
        }

        double loss = 0.0;
        RMatrix delta = RMatrix::Zero(static_cast<Eigen::Index>(output_size()), batch);
        const double inv_b = 1.0 / static_cast<double>(batch);
        for (Eigen::Index i = 0; i < batch; ++i) {
            const auto a = static_cast<Eigen::Index>(actions[static_cast<std::size_t>(i)]);
            if (a >= delta.rows()) throw std::out_of_range("action index exceeds network output");
            const double diff = acts.back()(a, i) - targets[static_cast<std::size_t>(i)];
            loss += huber(diff);
            delta(a, i) = std::clamp(diff, -1.0, 1.0) * inv_b;
        }

        grad.assign(params_.size(), 0.0);
        for (std::size_t l = n_layers(); l-- > 0;) {
            Eigen::Map<RMatrix>(grad.data() + w_off_[l], rows(l), cols(l)) = delta * acts[l].transpose();
            Eigen::Map<Eigen::VectorXd>(grad.data() + b_off_[l], rows(l)) = delta.rowwise().sum();
            if (l > 0) {
                RMatrix back = weights(l).transpose() * delta;
                delta = back.cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
            }
        }
        return loss * inv_b;
    }

    static double huber(double diff) {
        const double a = std::abs(diff);
        return a < 1.0 ? 0.5 * diff * diff : a - 0.5;
    }

private:
    Eigen::Index rows(std::size_t l) const { return static_cast<Eigen::Index>(sizes_[l + 1]); }
    Eigen::Index cols(std::size_t l) const { return static_cast<Eigen::Index>(sizes_[l]); }

    std::vector<std::size_t> sizes_;
    std::vector<std::size_t> w_off_, b_off_;
    std::vector<double> params_;
};

/// Copies the policy parameters into the target network bit for bit.
inline void sync_target(const QNetwork& policy, QNetwork& target) {
    if (!policy.same_architecture(target)) throw std::invalid_argument("sync_target: architectures differ");
    target.params() = policy.params();
}

struct Adam {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::vector<double> m, v;
    std::size_t t = 0;

    void step(std::vector<double>& params, const std::vector<double>& grad) {
        if (grad.size() != params.size()) throw std::invalid_argument("Adam: gradient size mismatch");
        if (m.size() != params.size()) {
            m.assign(params.size(), 0.0);
            v.assign(params.size(), 0.0);
        }
        ++t;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (std::size_t i = 0; i < params.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
            params[i] -= learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
    }
};

}  // namespace rlvqsd
