#pragma once

// Test-only reference implementations built from explicit Kronecker products.
// Nothing here shares code with the index-arithmetic kernels under test.

#include <cstddef>
#include <random>
#include <vector>

#include "rlvqsd/circuit.hpp"
#include "rlvqsd/qsim.hpp"

namespace oracle {

using rlvqsd::CMatrix;
using rlvqsd::cplx;

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline CMatrix identity(std::size_t dim) { return CMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)); }

inline CMatrix pauli(char p) {
    CMatrix m(2, 2);
    const cplx i{0.0, 1.0};
    switch (p) {
        case 'X': m << 0.0, 1.0, 1.0, 0.0; break;
        case 'Y': m << 0.0, -i, i, 0.0; break;
        case 'Z': m << 1.0, 0.0, 0.0, -1.0; break;
        default: m = identity(2);
    }
    return m;
}

/// Single-qubit operator on qubit q of n (qubit 0 leftmost factor).
inline CMatrix embed1(const CMatrix& g, std::size_t n, std::size_t q) {
    CMatrix out = CMatrix::Identity(1, 1);
    for (std::size_t k = 0; k < n; ++k) out = kron(out, k == q ? g : identity(2));
    return out;
}

/// Two-qubit operator via projector decomposition on the first qubit:
/// G = sum_{ab} |a><b|_q1 (x) G_ab acting on q2, where G_ab are 2x2 blocks.
inline CMatrix embed2(const CMatrix& g, std::size_t n, std::size_t q1, std::size_t q2) {
    const auto dim = std::size_t{1} << n;
    CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            CMatrix proj = CMatrix::Zero(2, 2);
            proj(a, b) = 1.0;
            const CMatrix block = g.block(2 * a, 2 * b, 2, 2);
            out += embed1(proj, n, q1) * embed1(block, n, q2);
        }
    return out;
}

/// Dense rotation exp(-i angle P / 2) computed as cos I - i sin P.
inline CMatrix rotation(char axis, double angle) {
    return std::cos(angle / 2) * identity(2) - cplx{0.0, 1.0} * std::sin(angle / 2) * pauli(axis);
}

inline CMatrix cnot() {
    CMatrix m = CMatrix::Zero(4, 4);
    m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
    return m;
}

/// Full 2^n unitary of a circuit as a product of Kronecker-embedded gates.
inline CMatrix circuit_unitary(const rlvqsd::Circuit& c, const std::vector<double>& params) {
    const std::size_t n = c.n_qubits();
    CMatrix u = identity(std::size_t{1} << n);
    for (const auto& g : c.gates()) {
        CMatrix full;
        switch (g.kind) {
            case rlvqsd::GateKind::RX: full = embed1(rotation('X', params[*g.param_slot]), n, g.qubits[0]); break;
            case rlvqsd::GateKind::RY: full = embed1(rotation('Y', params[*g.param_slot]), n, g.qubits[0]); break;
            case rlvqsd::GateKind::RZ: full = embed1(rotation('Z', params[*g.param_slot]), n, g.qubits[0]); break;
            case rlvqsd::GateKind::CNOT: full = embed2(cnot(), n, g.qubits[0], g.qubits[1]); break;
            case rlvqsd::GateKind::CZ: {
                CMatrix cz = identity(4);
                cz(3, 3) = -1.0;
                full = embed2(cz, n, g.qubits[0], g.qubits[1]);
                break;
            }
        }
        u = full * u;
    }
    return u;
}

inline double purity(const CMatrix& m) { return (m * m).trace().real(); }

inline double dephased_purity(const CMatrix& m) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) acc += m(i, i).real() * m(i, i).real();
    return acc;
}

/// Ginibre density matrix generated independently of the library routine.
inline CMatrix random_density(std::size_t n, std::mt19937_64& rng) {
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
    std::normal_distribution<double> normal;
    CMatrix g(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = cplx{normal(rng), normal(rng)};
    CMatrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return 0.5 * (rho + rho.adjoint());
}

/// Random circuit over the agent alphabet with random angles.
inline rlvqsd::Circuit random_circuit(std::size_t n, std::size_t n_gates, std::mt19937_64& rng, bool allow_cz = false) {
    rlvqsd::Circuit c(n);
    std::uniform_int_distribution<int> kind(0, allow_cz ? 4 : 3);
    std::uniform_int_distribution<std::size_t> qubit(0, n - 1);
    std::uniform_real_distribution<double> angle(-3.5, 3.5);
    for (std::size_t i = 0; i < n_gates; ++i) {
        const int k = (n == 1) ? kind(rng) % 3 : kind(rng);
        const auto q = qubit(rng);
        if (k < 3) {
            c.push(rlvqsd::Gate::rotation(static_cast<rlvqsd::Axis>(k), q), angle(rng));
        } else {
            auto t = qubit(rng);
            while (t == q) t = qubit(rng);
            c.push(k == 3 ? rlvqsd::Gate::cnot(q, t) : rlvqsd::Gate::cz(q, t));
        }
    }
    return c;
}

}  // namespace oracle
