#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rlvqsd/qsim.hpp"

namespace rlvqsd {

enum class GateKind { RX, RY, RZ, CNOT, CZ };

inline bool is_rotation(GateKind k) { return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ; }

inline Axis rotation_axis(GateKind k) {
    switch (k) {
        case GateKind::RX: return Axis::X;
        case GateKind::RY: return Axis::Y;
        case GateKind::RZ: return Axis::Z;
        default: throw std::invalid_argument("gate kind is not a rotation");
    }
}

inline std::string_view to_string(GateKind k) {
    switch (k) {
        case GateKind::RX: return "RX";
        case GateKind::RY: return "RY";
        case GateKind::RZ: return "RZ";
        case GateKind::CNOT: return "CNOT";
        case GateKind::CZ: return "CZ";
    }
    return "?";
}

inline GateKind gate_kind_from_string(std::string_view s) {
    for (auto k : {GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::CNOT, GateKind::CZ})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown gate kind '" + std::string(s) + "'");
}

/// One gate of an ansatz. Rotations use `qubits[0]`; two-qubit gates use
/// (control, target). `param_slot` indexes the circuit parameter vector.
struct Gate {
    GateKind kind = GateKind::RX;
    std::array<std::size_t, 2> qubits{0, 0};
    std::optional<std::size_t> param_slot;

    static Gate rotation(Axis axis, std::size_t q) {
        constexpr GateKind kinds[] = {GateKind::RX, GateKind::RY, GateKind::RZ};
        return {kinds[static_cast<int>(axis)], {q, q}, std::nullopt};
    }
    static Gate rx(std::size_t q) { return rotation(Axis::X, q); }
    static Gate ry(std::size_t q) { return rotation(Axis::Y, q); }
    static Gate rz(std::size_t q) { return rotation(Axis::Z, q); }
    static Gate cnot(std::size_t control, std::size_t target) { return {GateKind::CNOT, {control, target}, std::nullopt}; }
    static Gate cz(std::size_t a, std::size_t b) { return {GateKind::CZ, {a, b}, std::nullopt}; }

    bool rotation() const { return is_rotation(kind); }
    std::size_t arity() const { return rotation() ? 1 : 2; }
    std::span<const std::size_t> targets() const { return {qubits.data(), arity()}; }

    /// Same operation, ignoring the parameter slot.
    bool same_op(const Gate& o) const {
        return kind == o.kind && qubits[0] == o.qubits[0] && (rotation() || qubits[1] == o.qubits[1]);
    }
};

struct GateCounts {
    std::size_t one_qubit = 0;
    std::size_t two_qubit = 0;
    std::size_t depth = 0;
    std::size_t total() const { return one_qubit + two_qubit; }
    bool operator==(const GateCounts&) const = default;
};

/// Ordered gate sequence U(theta) on n qubits with one angle per rotation.
class Circuit {
public:
    explicit Circuit(std::size_t n_qubits) : n_(n_qubits) {
        if (n_qubits == 0 || n_qubits > kMaxQubits) throw std::invalid_argument("circuit qubit count out of range");
    }

    std::size_t n_qubits() const { return n_; }
    const std::vector<Gate>& gates() const { return gates_; }
    const std::vector<double>& params() const { return params_; }
    std::size_t size() const { return gates_.size(); }
    bool empty() const { return gates_.empty(); }

    /// Returns a copy with `g` appended; rotations get a fresh parameter slot
    /// holding `init_angle`.
    Circuit appended(Gate g, double init_angle = 0.0) const {
        Circuit c = *this;
        c.push(g, init_angle);
        return c;
    }

    /// In-place append for builders.
    void push(Gate g, double init_angle = 0.0) {
        validate_gate(g);
        if (g.rotation()) {
            g.param_slot = params_.size();
            params_.push_back(init_angle);
        } else {
            g.param_slot.reset();
        }
        gates_.push_back(g);
    }

    Circuit with_params(std::vector<double> params) const {
        if (params.size() != params_.size()) throw std::invalid_argument("parameter vector length mismatch");
        Circuit c = *this;
        c.params_ = std::move(params);
        return c;
    }

    void validate_gate(const Gate& g) const {
        if (g.qubits[0] >= n_ || (!g.rotation() && g.qubits[1] >= n_))
            throw std::out_of_range("gate qubit index out of range for a " + std::to_string(n_) + "-qubit circuit");
        if (!g.rotation() && g.qubits[0] == g.qubits[1]) throw std::invalid_argument("two-qubit gate needs distinct qubits");
    }

private:
    std::size_t n_;
    std::vector<Gate> gates_;
    std::vector<double> params_;
};

/// ASAP moment schedule: a gate sits one slot after the latest earlier gate
/// sharing a qubit, or at slot 0.
inline std::vector<std::size_t> schedule_moments(const Circuit& c) {
    std::vector<std::size_t> next_free(c.n_qubits(), 0);
    std::vector<std::size_t> depths;
    depths.reserve(c.size());
    for (const auto& g : c.gates()) {
        std::size_t d = 0;
        for (auto q : g.targets()) d = std::max(d, next_free[q]);
        for (auto q : g.targets()) next_free[q] = d + 1;
        depths.push_back(d);
    }
    return depths;
}

inline std::size_t circuit_depth(const Circuit& c) {
    const auto d = schedule_moments(c);
    return d.empty() ? 0 : *std::max_element(d.begin(), d.end()) + 1;
}

inline GateCounts gate_counts(const Circuit& c) {
    GateCounts out;
    for (const auto& g : c.gates()) (g.rotation() ? out.one_qubit : out.two_qubit) += 1;
    out.depth = circuit_depth(c);
    return out;
}

enum class LheaVariant { OneParam, ThreeParam };

/// Layered hardware-efficient ansatz. Every layer applies a two-qubit block on
/// each neighbouring pair with periodic wrap-around (a single pair for N = 2):
///   one-param:   RY RY - CZ - RY RY
///   three-param: RZ RY RZ (each qubit) - CNOT - RZ RY RZ (each qubit)
/// All rotations get independent parameters, initialised to zero.
inline Circuit build_lhea(std::size_t n_qubits, std::size_t layers, LheaVariant variant) {
    if (n_qubits < 2) throw std::invalid_argument("build_lhea: need at least 2 qubits");
    if (layers < 1) throw std::invalid_argument("build_lhea: need at least 1 layer");
    Circuit c(n_qubits);
    const std::size_t pairs = n_qubits == 2 ? 1 : n_qubits;
    auto euler = [&](std::size_t q) {
        c.push(Gate::rz(q));
        c.push(Gate::ry(q));
        c.push(Gate::rz(q));
    };
    for (std::size_t l = 0; l < layers; ++l) {
        for (std::size_t p = 0; p < pairs; ++p) {
            const std::size_t a = p, b = (p + 1) % n_qubits;
            if (variant == LheaVariant::OneParam) {
                c.push(Gate::ry(a));
                c.push(Gate::ry(b));
                c.push(Gate::cz(a, b));
                c.push(Gate::ry(a));
                c.push(Gate::ry(b));
            } else {
                euler(a);
                euler(b);
                c.push(Gate::cnot(a, b));
                euler(a);
                euler(b);
            }
        }
    }
    return c;
}

inline GateMatrix gate_matrix(const Gate& g, double angle) {
    switch (g.kind) {
        case GateKind::CNOT: return GateMatrix::cnot();
        case GateKind::CZ: return GateMatrix::cz();
        default: return rotation_matrix(rotation_axis(g.kind), angle);
    }
}

namespace detail {

/// Applies the circuit with parameter vector `params` to `m` in place.
inline void apply_circuit_in_place(CMatrix& m, const Circuit& c, std::span<const double> params) {
    static const CMatrix cnot = GateMatrix::cnot().matrix();
    static const CMatrix cz = GateMatrix::cz().matrix();
    CMatrix rot(2, 2);
    const cplx i{0.0, 1.0};
    for (const auto& g : c.gates()) {
        switch (g.kind) {
            case GateKind::CNOT: conjugate_in_place(m, c.n_qubits(), cnot, g.targets()); break;
            case GateKind::CZ: conjugate_in_place(m, c.n_qubits(), cz, g.targets()); break;
            default: {
                const double angle = params[*g.param_slot];
                const double co = std::cos(angle / 2), s = std::sin(angle / 2);
                switch (g.kind) {
                    case GateKind::RX: rot << co, -i * s, -i * s, co; break;
                    case GateKind::RY: rot << co, -s, s, co; break;
                    default: rot << cplx{co, -s}, 0.0, 0.0, cplx{co, s}; break;
                }
                conjugate_in_place(m, c.n_qubits(), rot, g.targets());
            }
        }
    }
}

}  // namespace detail

/// rho' = U(theta) rho U(theta)^dagger.
inline DensityMatrix circuit_apply(const Circuit& c, const DensityMatrix& rho, std::span<const double> params) {
    if (c.n_qubits() != rho.n_qubits()) throw std::invalid_argument("circuit and state qubit counts differ");
    if (params.size() != c.params().size()) throw std::invalid_argument("parameter vector length mismatch");
    CMatrix m = rho.matrix();
    detail::apply_circuit_in_place(m, c, params);
    return DensityMatrix::unchecked(rho.n_qubits(), std::move(m));
}

inline DensityMatrix circuit_apply(const Circuit& c, const DensityMatrix& rho) { return circuit_apply(c, rho, c.params()); }

/// Dense 2^N unitary of the circuit, built gate by gate on state vectors.
inline CMatrix circuit_unitary(const Circuit& c, std::span<const double> params) {
    const auto dim = basis_dim(c.n_qubits());
    CMatrix u = CMatrix::Identity(dim, dim);
    for (std::size_t col = 0; col < dim; ++col) {
        CVector v = u.col(col);
        for (const auto& g : c.gates()) {
            const double angle = g.param_slot ? params[*g.param_slot] : 0.0;
            detail::apply_to_vector(v, c.n_qubits(), gate_matrix(g, angle).matrix(), g.targets());
        }
        u.col(col) = v;
    }
    return u;
}

// Circuit JSON: {"n_qubits": n, "gates": [{"kind": "RX", "qubits": [0], "angle": 0.1}, ...]}

inline nlohmann::json to_json(const Circuit& c) {
    nlohmann::json gates = nlohmann::json::array();
    for (const auto& g : c.gates()) {
        nlohmann::json jg{{"kind", to_string(g.kind)}};
        if (g.rotation()) {
            jg["qubits"] = {g.qubits[0]};
            jg["angle"] = c.params()[*g.param_slot];
        } else {
            jg["qubits"] = {g.qubits[0], g.qubits[1]};
        }
        gates.push_back(std::move(jg));
    }
    return {{"n_qubits", c.n_qubits()}, {"gates", std::move(gates)}};
}

inline Circuit circuit_from_json(const nlohmann::json& j) {
    Circuit c(j.at("n_qubits").get<std::size_t>());
    for (const auto& jg : j.at("gates")) {
        const auto kind = gate_kind_from_string(jg.at("kind").get<std::string>());
        const auto& qs = jg.at("qubits");
        if (is_rotation(kind)) {
            if (qs.size() != 1) throw std::invalid_argument("rotation gate needs exactly one qubit");
            const auto q = qs[0].get<std::size_t>();
            c.push(Gate{kind, {q, q}, std::nullopt}, jg.value("angle", 0.0));
        } else {
            if (qs.size() != 2) throw std::invalid_argument("two-qubit gate needs exactly two qubits");
            c.push(Gate{kind, {qs[0].get<std::size_t>(), qs[1].get<std::size_t>()}, std::nullopt});
        }
    }
    return c;
}

}  // namespace rlvqsd
