#pragma once

// Binary depth-based encoding of a circuit for the agent, and the integer /
// one-hot action alphabet.
//
// Each depth slab is an (n+3) x n binary matrix: rows 0..n-1 hold CNOT
// connectivity (row = control, column = target); rows n, n+1, n+2 mark X, Y
// and Z rotations on the column's qubit.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rlvqsd/circuit.hpp"

namespace rlvqsd {

struct DepthOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class RlStateTensor {
public:
    RlStateTensor(std::size_t d_max, std::size_t n) : d_max_(d_max), n_(n), bits_(d_max * (n + 3) * n, 0) {
        if (n == 0) throw std::invalid_argument("RlStateTensor: zero qubits");
    }

    std::size_t d_max() const { return d_max_; }
    std::size_t n() const { return n_; }
    std::size_t rows() const { return n_ + 3; }
    std::size_t size() const { return bits_.size(); }

    std::size_t index(std::size_t slab, std::size_t row, std::size_t col) const {
        if (slab >= d_max_ || row >= rows() || col >= n_) throw std::out_of_range("RlStateTensor index out of range");
        return (slab * rows() + row) * n_ + col;
    }
    std::uint8_t at(std::size_t slab, std::size_t row, std::size_t col) const { return bits_[index(slab, row, col)]; }
    void set(std::size_t slab, std::size_t row, std::size_t col) { bits_[index(slab, row, col)] = 1; }

    const std::vector<std::uint8_t>& bits() const { return bits_; }
    bool operator==(const RlStateTensor&) const = default;

private:
    std::size_t d_max_;
    std::size_t n_;
    std::vector<std::uint8_t> bits_;
};

inline std::size_t rotation_row(std::size_t n, GateKind k) {
    switch (k) {
        case GateKind::RX: return n;
        case GateKind::RY: return n + 1;
        case GateKind::RZ: return n + 2;
        default: throw std::invalid_argument("not a rotation");
    }
}

/// Throws DepthOverflow if the scheduled depth exceeds d_max, and
/// std::invalid_argument for gates outside the agent's alphabet.
inline RlStateTensor encode_state(const Circuit& c, std::size_t d_max) {
    const std::size_t n = c.n_qubits();
    RlStateTensor t(d_max, n);
    const auto depths = schedule_moments(c);
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto& g = c.gates()[i];
        if (depths[i] >= d_max)
            throw DepthOverflow("circuit depth " + std::to_string(depths[i] + 1) + " exceeds d_max " + std::to_string(d_max));
        if (g.kind == GateKind::CNOT)
            t.set(depths[i], g.qubits[0], g.qubits[1]);
        else if (g.rotation())
            t.set(depths[i], rotation_row(n, g.kind), g.qubits[0]);
        else
            throw std::invalid_argument("encode_state: gate kind " + std::string(to_string(g.kind)) + " has no encoding");
    }
    return t;
}

/// Slab-major, row-major 0/1 vector.
inline std::vector<double> flatten(const RlStateTensor& t) { return {t.bits().begin(), t.bits().end()}; }

/// Inverse of the slab layout: every set bit as a (gate, depth) pair.
inline std::vector<std::pair<Gate, std::size_t>> decode_state(const RlStateTensor& t) {
    std::vector<std::pair<Gate, std::size_t>> out;
    const std::size_t n = t.n();
    for (std::size_t s = 0; s < t.d_max(); ++s)
        for (std::size_t r = 0; r < t.rows(); ++r)
            for (std::size_t q = 0; q < n; ++q) {
                if (!t.at(s, r, q)) continue;
                if (r < n)
                    out.emplace_back(Gate::cnot(r, q), s);
                else
                    out.emplace_back(Gate::rotation(static_cast<Axis>(r - n), q), s);
            }
    return out;
}

/// 3n rotations followed by the n(n-1) ordered CNOT pairs.
inline std::size_t action_space_size(std::size_t n) { return 3 * n + n * (n - 1); }

/// Rotations first (qubit-major, axis-minor), then CNOT pairs (control,
/// target) in lexicographic order.
inline Gate action_to_gate(std::size_t a, std::size_t n) {
    if (n == 0 || a >= action_space_size(n)) throw std::out_of_range("action index out of range");
    if (a < 3 * n) return Gate::rotation(static_cast<Axis>(a % 3), a / 3);
    const std::size_t k = a - 3 * n;
    const std::size_t control = k / (n - 1);
    const std::size_t r = k % (n - 1);
    return Gate::cnot(control, r < control ? r : r + 1);
}

inline std::size_t gate_to_action(const Gate& g, std::size_t n) {
    if (g.rotation()) {
        if (g.qubits[0] >= n) throw std::out_of_range("gate qubit out of range");
        return 3 * g.qubits[0] + static_cast<std::size_t>(rotation_axis(g.kind));
    }
    if (g.kind != GateKind::CNOT) throw std::invalid_argument("gate is not in the action alphabet");
    const auto [c, t] = g.qubits;
    if (c >= n || t >= n || c == t) throw std::out_of_range("invalid CNOT qubits");
    return 3 * n + c * (n - 1) + (t < c ? t : t - 1);
}

inline std::vector<double> action_one_hot(std::size_t a, std::size_t n) {
    if (a >= action_space_size(n)) throw std::out_of_range("action index out of range");
    std::vector<double> v(action_space_size(n), 0.0);
    v[a] = 1.0;
    return v;
}

inline nlohmann::json to_json(const RlStateTensor& t) {
    nlohmann::json slabs = nlohmann::json::array();
    for (std::size_t s = 0; s < t.d_max(); ++s) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t r = 0; r < t.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t q = 0; q < t.n(); ++q) row.push_back(t.at(s, r, q));
            rows.push_back(std::move(row));
        }
        slabs.push_back(std::move(rows));
    }
    return slabs;
}

}  // namespace rlvqsd
