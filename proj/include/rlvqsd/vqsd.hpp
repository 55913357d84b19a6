#pragma once

// Variational state diagonalization: cost, eigenvalue readout, eigenvector
// preparation and the eigenvalue error metric.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlvqsd/circuit.hpp"
#include "rlvqsd/qsim.hpp"

namespace rlvqsd {

struct InferredEigenvalue {
    std::size_t bitstring = 0;  // basis index, qubit 0 = most significant bit
    double value = 0.0;
};

struct DiagonalizationResult {
    std::vector<InferredEigenvalue> eigenvalues;  // descending
    double final_cost = 0.0;
    Circuit circuit;

    std::vector<double> values() const {
        std::vector<double> v;
        v.reserve(eigenvalues.size());
        for (const auto& e : eigenvalues) v.push_back(e.value);
        return v;
    }
};

inline std::string bitstring_label(std::size_t index, std::size_t n_qubits) {
    std::string s(n_qubits, '0');
    for (std::size_t q = 0; q < n_qubits; ++q)
        if (index & qubit_mask(n_qubits, q)) s[q] = '1';
    return s;
}

inline std::size_t parse_bitstring(std::string_view s) {
    std::size_t v = 0;
    for (char ch : s) {
        if (ch != '0' && ch != '1') throw std::invalid_argument("bitstring must contain only 0 and 1");
        v = (v << 1) | static_cast<std::size_t>(ch == '1');
    }
    return v;
}

/// Evaluates C(theta) = Tr(rho^2) - Tr(D(rho')^2) for many parameter vectors
/// of one circuit structure, reusing the input purity and a scratch matrix.
class CostFunction {
public:
    CostFunction(DensityMatrix rho, Circuit circuit)
        : rho_(std::move(rho)), circuit_(std::move(circuit)), purity_(purity(rho_)) {
        if (rho_.n_qubits() != circuit_.n_qubits()) throw std::invalid_argument("circuit and state qubit counts differ");
    }

    double operator()(std::span<const double> params) const {
        if (params.size() != circuit_.params().size()) throw std::invalid_argument("parameter vector length mismatch");
        scratch_ = rho_.matrix();
        detail::apply_circuit_in_place(scratch_, circuit_, params);
        return purity_ - detail::diagonal_square_sum(scratch_);
    }

    double input_purity() const { return purity_; }
    const Circuit& circuit() const { return circuit_; }
    const DensityMatrix& state() const { return rho_; }

private:
    DensityMatrix rho_;
    Circuit circuit_;
    double purity_;
    mutable CMatrix scratch_;
};

inline double cost(const DensityMatrix& rho, const Circuit& c, std::span<const double> params) {
    return CostFunction(rho, c)(params);
}

inline double cost(const DensityMatrix& rho, const Circuit& c) { return cost(rho, c, c.params()); }

/// lambda'_b = <b|rho'|b>, sorted descending (ties by ascending bitstring).
/// Roundoff negatives are clamped to zero.
inline DiagonalizationResult eigenvalue_readout(const DensityMatrix& rho, const Circuit& c) {
    const DensityMatrix out = circuit_apply(c, rho);
    DiagonalizationResult r{{}, purity(rho) - detail::diagonal_square_sum(out.matrix()), c};
    r.eigenvalues.reserve(out.dim());
    for (std::size_t b = 0; b < out.dim(); ++b) r.eigenvalues.push_back({b, std::max(0.0, out(b, b).real())});
    std::stable_sort(r.eigenvalues.begin(), r.eigenvalues.end(),
                     [](const InferredEigenvalue& a, const InferredEigenvalue& b) { return a.value > b.value; });
    return r;
}

/// |v'_b> = U(theta)^dagger X^{b_1} ... X^{b_n} |0...0>.
inline CVector eigenvector_prepare(const Circuit& c, std::string_view bitstring) {
    if (bitstring.size() != c.n_qubits()) throw std::invalid_argument("bitstring length must equal the qubit count");
    const std::size_t index = parse_bitstring(bitstring);
    const CMatrix u = circuit_unitary(c, c.params());
    return u.adjoint().col(static_cast<Eigen::Index>(index));
}

/// Sum of squared differences over the m largest eigenvalue pairs.
inline double eigenvalue_error(std::span<const double> true_vals, std::span<const double> inferred_vals, std::size_t m) {
    if (true_vals.size() < m || inferred_vals.size() < m) throw std::invalid_argument("eigenvalue_error: fewer than m eigenvalues");
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double d = true_vals[i] - inferred_vals[i];
        acc += d * d;
    }
    return acc;
}

inline double eigenvalue_error(std::span<const double> true_vals, std::span<const double> inferred_vals) {
    return eigenvalue_error(true_vals, inferred_vals, true_vals.size());
}

/// Descending true spectrum of a state.
inline std::vector<double> true_eigenvalues(const DensityMatrix& rho) {
    const auto eig = eig_hermitian(rho.matrix());
    return {eig.values.data(), eig.values.data() + eig.values.size()};
}

inline nlohmann::json to_json(const DiagonalizationResult& r) {
    nlohmann::json ev = nlohmann::json::array();
    const std::size_t n = r.circuit.n_qubits();
    for (const auto& e : r.eigenvalues) ev.push_back({{"bitstring", bitstring_label(e.bitstring, n)}, {"value", e.value}});
    return {{"eigenvalues", std::move(ev)}, {"final_cost", r.final_cost}, {"circuit", to_json(r.circuit)}};
}

}  // namespace rlvqsd
