#pragma once

// Circuit-growing environment: every action appends one gate, after which all
// angles are re-optimized from the previous optimum (new angle starts at 0).

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "rlvqsd/circuit.hpp"
#include "rlvqsd/cobyla.hpp"
#include "rlvqsd/encoding.hpp"
#include "rlvqsd/qsim.hpp"
#include "rlvqsd/vqsd.hpp"

namespace rlvqsd {

/// Margin added to zeta by the success branch of the reward.
inline constexpr double kSuccessMargin = 1e-5;

struct EnvConfig {
    DensityMatrix target_state = DensityMatrix::basis_state(1, 0);
    double zeta = 1e-5;
    std::size_t n_steps = 20;
    std::size_t d_max = 20;
    OptimizerBudget optimizer_budget{};
    double success_reward = 5.0;

    void validate() const {
        if (!(zeta > 0.0)) throw std::invalid_argument("zeta must be positive");
        if (n_steps < 1) throw std::invalid_argument("n_steps must be at least 1");
        if (d_max < 1) throw std::invalid_argument("d_max must be at least 1");
        if (!(success_reward > 0.0)) throw std::invalid_argument("success_reward must be positive");
        optimizer_budget.validate();
    }
};

inline bool is_success(double cost, double zeta) { return cost < zeta + kSuccessMargin; }

/// +R on success, otherwise -ln(C - zeta) (argument floored at 1e-300).
inline double dense_reward(double cost, double zeta, double success_reward) {
    if (is_success(cost, zeta)) return success_reward;
    return -std::log(std::max(cost - zeta, 1e-300));
}

struct StepOutcome {
    RlStateTensor state;
    double reward = 0.0;
    bool done = false;
    bool success = false;
    bool overflow = false;
    double cost = 0.0;
    Circuit circuit_snapshot;
    std::size_t optimizer_evals = 0;
};

class Environment {
public:
    explicit Environment(EnvConfig cfg) : cfg_(std::move(cfg)), circuit_(cfg_.target_state.n_qubits()) {
        cfg_.validate();
        purity_ = purity(cfg_.target_state);
    }

    const EnvConfig& config() const { return cfg_; }
    std::size_t n_qubits() const { return cfg_.target_state.n_qubits(); }
    std::size_t n_actions() const { return action_space_size(n_qubits()); }
    std::size_t observation_size() const { return cfg_.d_max * (n_qubits() + 3) * n_qubits(); }

    RlStateTensor reset() {
        circuit_ = Circuit(n_qubits());
        steps_ = 0;
        done_ = false;
        started_ = true;
        cost_ = cost(cfg_.target_state, circuit_);
        return RlStateTensor(cfg_.d_max, n_qubits());
    }

    StepOutcome step(std::size_t action) {
        if (!started_) throw std::logic_error("step called before reset");
        if (done_) throw std::logic_error("step called on a finished episode");
        const Gate g = action_to_gate(action, n_qubits());
        ++steps_;

        Circuit grown = circuit_.appended(g, 0.0);
        if (circuit_depth(grown) > cfg_.d_max) {
            done_ = true;
            return {encode_state(circuit_, cfg_.d_max), dense_reward(cost_, cfg_.zeta, cfg_.success_reward), true, false, true, cost_,
                    circuit_, 0};
        }

        CostFunction objective(cfg_.target_state, grown);
        const auto opt = minimize(objective, grown.params(), cfg_.optimizer_budget);
        circuit_ = grown.with_params(opt.theta);
        cost_ = opt.f;

        const bool success = is_success(cost_, cfg_.zeta);
        done_ = success || steps_ >= cfg_.n_steps;
        return {encode_state(circuit_, cfg_.d_max), dense_reward(cost_, cfg_.zeta, cfg_.success_reward), done_, success, false, cost_,
                circuit_, opt.evals};
    }

    const Circuit& circuit() const { return circuit_; }
    double current_cost() const { return cost_; }
    double input_purity() const { return purity_; }
    std::size_t steps_taken() const { return steps_; }
    bool done() const { return done_; }

private:
    EnvConfig cfg_;
    Circuit circuit_;
    double purity_ = 1.0;
    double cost_ = 0.0;
    bool started_ = false;
    std::size_t steps_ = 0;
    bool done_ = false;
};

}  // namespace rlvqsd
