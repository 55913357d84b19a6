#pragma once

// Double deep Q-learning: experience replay, epsilon-greedy selection,
// DDQN bootstrap targets, Huber loss with Adam updates, periodic target sync.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "rlvqsd/encoding.hpp"
#include "rlvqsd/qnetwork.hpp"

namespace rlvqsd {

using Rng = std::mt19937_64;

/// States are stored as the flattened 0/1 bits of the RL-state tensor.
struct Transition {
    std::vector<std::uint8_t> state;
    std::size_t action = 0;
    double reward = 0.0;
    std::vector<std::uint8_t> next_state;
    bool done = false;
};

/// Bounded FIFO; the oldest transition is evicted first.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = 20000) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
    }

    void push(Transition t) {
        if (items_.size() == capacity_) items_.pop_front();
        items_.push_back(std::move(t));
    }

    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& operator[](std::size_t i) const { return items_[i]; }

    /// `k` distinct indices drawn uniformly.
    std::vector<std::size_t> sample_indices(std::size_t k, Rng& rng) const {
        if (k > items_.size()) throw std::invalid_argument("sample larger than buffer");
        std::vector<std::size_t> idx;
        idx.reserve(k);
        std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
        while (idx.size() < k) {
            const auto i = pick(rng);
            if (std::find(idx.begin(), idx.end(), i) == idx.end()) idx.push_back(i);
        }
        return idx;
    }

private:
    std::size_t capacity_;
    std::deque<Transition> items_;
};

struct AgentConfig {
    double gamma = 0.88;
    double epsilon_start = 1.0;
    double epsilon_min = 0.05;
    double epsilon_decay = 0.99995;
    std::size_t target_sync_every = 500;
    std::size_t replay_capacity = 20000;
    std::size_t batch_size = 64;
    double learning_rate = 1e-3;
    std::vector<std::size_t> hidden{128, 128};
    std::uint64_t seed = 1;

    void validate() const {
        if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
        if (!(epsilon_min >= 0.0 && epsilon_min <= epsilon_start && epsilon_start <= 1.0))
            throw std::invalid_argument("need 0 <= epsilon_min <= epsilon_start <= 1");
        if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0)) throw std::invalid_argument("epsilon_decay must lie in (0, 1]");
        if (target_sync_every == 0 || batch_size == 0 || replay_capacity == 0)
            throw std::invalid_argument("sync interval, batch size and replay capacity must be positive");
        if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
    }
};

inline double decay_epsilon(double eps, const AgentConfig& cfg) { return std::max(cfg.epsilon_min, eps * cfg.epsilon_decay); }

inline std::size_t random_action(std::size_t n_qubits, Rng& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, action_space_size(n_qubits) - 1);
    return pick(rng);
}

/// Lowest index among the maxima.
inline std::size_t argmax(const Eigen::VectorXd& q) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < q.size(); ++i)
        if (q(i) > q(best)) best = i;
    return static_cast<std::size_t>(best);
}

inline std::size_t select_action(const QNetwork& net, std::span<const double> state, double epsilon, Rng& rng) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
    if (epsilon > 0.0) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        if (u(rng) < epsilon) {
            std::uniform_int_distribution<std::size_t> pick(0, net.output_size() - 1);
            return pick(rng);
        }
    }
    return argmax(net.forward(state));
}

namespace detail {

inline RMatrix stack_columns(std::span<const Transition* const> batch, bool next) {
    const auto rows = static_cast<Eigen::Index>((next ? batch[0]->next_state : batch[0]->state).size());
    RMatrix x(rows, static_cast<Eigen::Index>(batch.size()));
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& v = next ? batch[i]->next_state : batch[i]->state;
        if (static_cast<Eigen::Index>(v.size()) != rows) throw std::invalid_argument("inconsistent state sizes in batch");
        for (Eigen::Index r = 0; r < rows; ++r) x(r, static_cast<Eigen::Index>(i)) = v[static_cast<std::size_t>(r)];
    }
    return x;
}

}  // namespace detail

/// Y = r + gamma * Q_target(s', argmax_a Q_policy(s', a)); Y = r when done.
inline std::vector<double> td_targets(std::span<const Transition* const> batch, const QNetwork& policy, const QNetwork& target,
                                      double gamma) {
    if (batch.empty()) throw std::invalid_argument("td_targets: empty batch");
    const RMatrix next = detail::stack_columns(batch, true);
    const RMatrix q_policy = policy.forward(next);
    const RMatrix q_target = target.forward(next);
    std::vector<double> y(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        y[i] = batch[i]->reward;
        if (!batch[i]->done) y[i] += gamma * q_target(static_cast<Eigen::Index>(argmax(q_policy.col(col))), col);
    }
    return y;
}

inline std::vector<double> td_targets(std::span<const Transition> batch, const QNetwork& policy, const QNetwork& target, double gamma) {
    std::vector<const Transition*> ptrs;
    for (const auto& t : batch) ptrs.push_back(&t);
    return td_targets(std::span<const Transition* const>(ptrs), policy, target, gamma);
}

/// One gradient step of `policy` on `batch`; returns the Huber loss.
inline double fit_batch(QNetwork& policy, const QNetwork& target, Adam& adam, std::span<const Transition* const> batch, double gamma) {
    const auto y = td_targets(batch, policy, target, gamma);
    const RMatrix x = detail::stack_columns(batch, false);
    std::vector<std::size_t> actions;
    actions.reserve(batch.size());
    for (const auto* t : batch) actions.push_back(t->action);
    std::vector<double> grad;
    const double loss = policy.huber_loss_and_gradient(x, actions, y, grad);
    adam.step(policy.params(), grad);
    return loss;
}

/// Samples a uniform batch and performs one update. Returns nullopt while the
/// buffer holds fewer than batch_size transitions.
inline std::optional<double> train_step(QNetwork& policy, const QNetwork& target, Adam& adam, const ReplayBuffer& buffer,
                                        const AgentConfig& cfg, Rng& rng) {
    if (buffer.size() < cfg.batch_size) return std::nullopt;
    const auto idx = buffer.sample_indices(cfg.batch_size, rng);
    std::vector<const Transition*> batch;
    batch.reserve(idx.size());
    for (auto i : idx) batch.push_back(&buffer[i]);
    return fit_batch(policy, target, adam, batch, cfg.gamma);
}

/// Learner state: networks, optimizer, replay memory, exploration schedule.
class DdqnAgent {
public:
    DdqnAgent(std::size_t input_size, std::size_t n_actions, AgentConfig cfg)
        : cfg_(std::move(cfg)), buffer_(cfg_.replay_capacity), rng_(cfg_.seed), epsilon_(cfg_.epsilon_start) {
        cfg_.validate();
        std::vector<std::size_t> sizes{input_size};
        sizes.insert(sizes.end(), cfg_.hidden.begin(), cfg_.hidden.end());
        sizes.push_back(n_actions);
        policy_ = QNetwork(sizes);
        policy_.init_glorot(rng_);
        target_ = QNetwork(sizes);
        sync_target(policy_, target_);
        adam_.learning_rate = cfg_.learning_rate;
    }

    std::size_t act(std::span<const double> state, bool explore) {
        return select_action(policy_, state, explore ? epsilon_ : 0.0, rng_);
    }

    /// Stores a training transition, performs one update when enough data is
    /// available, decays epsilon and syncs the target network on schedule.
    std::optional<double> observe(Transition t) {
        buffer_.push(std::move(t));
        const auto loss = train_step(policy_, target_, adam_, buffer_, cfg_, rng_);
        if (loss) ++updates_;
        epsilon_ = decay_epsilon(epsilon_, cfg_);
        ++actions_;
        if (actions_ % cfg_.target_sync_every == 0) sync_target(policy_, target_);
        return loss;
    }

    const AgentConfig& config() const { return cfg_; }
    const QNetwork& policy() const { return policy_; }
    const QNetwork& target() const { return target_; }
    QNetwork& policy() { return policy_; }
    QNetwork& target() { return target_; }
    const Adam& adam() const { return adam_; }
    Adam& adam() { return adam_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    Rng& rng() { return rng_; }
    double epsilon() const { return epsilon_; }
    void set_epsilon(double e) { epsilon_ = e; }
    std::size_t actions_taken() const { return actions_; }
    std::size_t updates() const { return updates_; }
    void set_counters(std::size_t actions, std::size_t updates) {
        actions_ = actions;
        updates_ = updates;
    }

private:
    AgentConfig cfg_;
    QNetwork policy_, target_;
    Adam adam_;
    ReplayBuffer buffer_;
    Rng rng_;
    double epsilon_;
    std::size_t actions_ = 0;
    std::size_t updates_ = 0;
};

}  // namespace rlvqsd
