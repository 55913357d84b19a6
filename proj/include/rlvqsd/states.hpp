#pragma once

// Target states: Hilbert-Schmidt (square Ginibre) random density matrices and
// reduced ground states of the periodic Heisenberg ring.

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlvqsd/qsim.hpp"

namespace rlvqsd {

/// rho = G G^dagger / Tr(G G^dagger) with i.i.d. standard complex Gaussian G.
template <class Rng>
DensityMatrix ginibre_density_matrix(std::size_t n_qubits, Rng& rng) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) throw std::invalid_argument("ginibre_density_matrix: qubit count out of range");
    const auto dim = basis_dim(n_qubits);
    std::normal_distribution<double> normal(0.0, 1.0);
    CMatrix g(dim, dim);
    for (std::size_t c = 0; c < dim; ++c)
        for (std::size_t r = 0; r < dim; ++r) {
            const double re = normal(rng);
            const double im = normal(rng);
            g(r, c) = cplx{re, im};
        }
    CMatrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityMatrix::from_matrix(std::move(rho));
}

struct HeisenbergSpec {
    std::size_t total_spins = 6;

    void validate() const {
        if (total_spins < 2 || total_spins % 2 != 0) throw std::invalid_argument("Heisenberg ring needs an even number of spins >= 2");
    }
    std::size_t kept() const { return total_spins / 2; }
};

/// Largest ring handled by dense diagonalization.
inline constexpr std::size_t kMaxHeisenbergSpins = 8;

namespace detail {

// Single-site Pauli acting on spin `q` of an n-spin register, applied to a
// basis index: returns (image index, amplitude).
inline std::pair<std::size_t, cplx> pauli_on_basis(char p, std::size_t n, std::size_t q, std::size_t idx) {
    const std::size_t m = qubit_mask(n, q);
    const bool one = idx & m;
    switch (p) {
        case 'X': return {idx ^ m, 1.0};
        case 'Y': return {idx ^ m, one ? cplx{0.0, -1.0} : cplx{0.0, 1.0}};
        default: return {idx, one ? -1.0 : 1.0};
    }
}

}  // namespace detail

/// H = sum_j S^(j) . S^(j+1) with S = (X, Y, Z)/sqrt(3) and S^(2N+1) = S^(1).
inline CMatrix heisenberg_hamiltonian(const HeisenbergSpec& spec) {
    spec.validate();
    const std::size_t n = spec.total_spins;
    if (n > kMaxHeisenbergSpins) throw std::invalid_argument("Heisenberg ring too large for dense diagonalization");
    const auto dim = basis_dim(n);
    CMatrix h = CMatrix::Zero(dim, dim);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t k = (j + 1) % n;
        for (char p : {'X', 'Y', 'Z'})
            for (std::size_t col = 0; col < dim; ++col) {
                const auto [mid, a1] = detail::pauli_on_basis(p, n, k, col);
                const auto [row, a2] = detail::pauli_on_basis(p, n, j, mid);
                h(row, col) += a1 * a2 / 3.0;
            }
    }
    return h;
}

/// Ground state of the ring with the last N spins traced out.
inline DensityMatrix reduced_ground_state(const HeisenbergSpec& spec, bool keep_first_half = true) {
    const auto eig = eig_hermitian(heisenberg_hamiltonian(spec));
    // Descending order: the last column belongs to the lowest energy.
    const CVector psi = eig.vectors.col(eig.vectors.cols() - 1);
    const auto full = DensityMatrix::pure(psi);
    std::vector<std::size_t> keep;
    const std::size_t half = spec.kept();
    for (std::size_t q = 0; q < half; ++q) keep.push_back(keep_first_half ? q : half + q);
    return partial_trace(full, keep);
}

}  // namespace rlvqsd
