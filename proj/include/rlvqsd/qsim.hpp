#pragma once

// Exact dense simulation of N-qubit mixed states.
//
// Basis convention: qubit 0 is the most significant bit of a basis index, so
// for N = 2 the index of |q0 q1> is 2*q0 + q1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace rlvqsd {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr std::size_t kMaxQubits = 8;

enum class Axis { X, Y, Z };

inline std::size_t basis_dim(std::size_t n_qubits) { return std::size_t{1} << n_qubits; }

/// Bit of qubit `q` inside a basis index of an `n`-qubit register.
inline std::size_t qubit_mask(std::size_t n, std::size_t q) { return std::size_t{1} << (n - 1 - q); }

/// Small unitary acting on one or two qubits.
class GateMatrix {
public:
    GateMatrix() = default;
    explicit GateMatrix(CMatrix m) : m_(std::move(m)) {
        if (!(m_.rows() == 2 || m_.rows() == 4) || m_.rows() != m_.cols())
            throw std::invalid_argument("gate matrix must be 2x2 or 4x4");
        if (!(m_ * m_.adjoint()).isIdentity(1e-12))
            throw std::invalid_argument("gate matrix is not unitary");
    }

    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    std::size_t arity() const { return dim() == 2 ? 1 : 2; }
    const CMatrix& matrix() const { return m_; }

    static GateMatrix identity(std::size_t dim) { return GateMatrix(CMatrix::Identity(dim, dim)); }

    static GateMatrix cnot() {
        CMatrix m = CMatrix::Zero(4, 4);
        m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
        return GateMatrix(std::move(m));
    }

    static GateMatrix cz() {
        CMatrix m = CMatrix::Identity(4, 4);
        m(3, 3) = -1.0;
        return GateMatrix(std::move(m));
    }

private:
    CMatrix m_ = CMatrix::Identity(2, 2);
};

/// exp(-i angle P / 2) for the Pauli matrix P of `axis`.
inline GateMatrix rotation_matrix(Axis axis, double angle) {
    if (!std::isfinite(angle)) throw std::invalid_argument("rotation angle must be finite");
    const double c = std::cos(angle / 2), s = std::sin(angle / 2);
    const cplx i{0.0, 1.0};
    CMatrix m(2, 2);
    switch (axis) {
        case Axis::X: m << c, -i * s, -i * s, c; break;
        case Axis::Y: m << c, -s, s, c; break;
        case Axis::Z: m << std::exp(-i * (angle / 2)), 0.0, 0.0, std::exp(i * (angle / 2)); break;
    }
    return GateMatrix(std::move(m));
}

namespace detail {

// Offsets of the 2^k sub-basis states spanned by `qubits` (first listed qubit
// is the most significant bit of the sub-index).
inline std::vector<std::size_t> sub_offsets(std::size_t n, std::span<const std::size_t> qubits) {
    std::vector<std::size_t> offs(std::size_t{1} << qubits.size(), 0);
    for (std::size_t s = 0; s < offs.size(); ++s)
        for (std::size_t k = 0; k < qubits.size(); ++k)
            if (s & (std::size_t{1} << (qubits.size() - 1 - k))) offs[s] |= qubit_mask(n, qubits[k]);
    return offs;
}

inline void check_qubits(std::size_t n, std::span<const std::size_t> qubits, std::size_t gate_dim) {
    if (gate_dim != (std::size_t{1} << qubits.size()))
        throw std::invalid_argument("gate dimension does not match the number of target qubits");
    for (std::size_t k = 0; k < qubits.size(); ++k) {
        if (qubits[k] >= n) throw std::out_of_range("qubit index " + std::to_string(qubits[k]) + " out of range");
        for (std::size_t j = 0; j < k; ++j)
            if (qubits[j] == qubits[k]) throw std::invalid_argument("repeated qubit index");
    }
}

/// In-place m <- G m G^dagger with G embedded on `qubits`.
inline void conjugate_in_place(CMatrix& m, std::size_t n, const CMatrix& g, std::span<const std::size_t> qubits) {
    const std::size_t dim = basis_dim(n);
    const auto offs = sub_offsets(n, qubits);
    const std::size_t k = offs.size();
    std::size_t covered = 0;
    for (auto o : offs) covered |= o;

    cplx in[4], out[4];
    // Left multiplication acts on rows within every column.
    for (std::size_t c = 0; c < dim; ++c) {
        for (std::size_t base = 0; base < dim; ++base) {
            if (base & covered) continue;
            for (std::size_t s = 0; s < k; ++s) in[s] = m(base | offs[s], c);
            for (std::size_t s = 0; s < k; ++s) {
                cplx acc = 0.0;
                for (std::size_t t = 0; t < k; ++t) acc += g(s, t) * in[t];
                out[s] = acc;
            }
            for (std::size_t s = 0; s < k; ++s) m(base | offs[s], c) = out[s];
        }
    }
    // Right multiplication by G^dagger acts on columns within every row.
    for (std::size_t base = 0; base < dim; ++base) {
        if (base & covered) continue;
        for (std::size_t r = 0; r < dim; ++r) {
            for (std::size_t s = 0; s < k; ++s) in[s] = m(r, base | offs[s]);
            for (std::size_t s = 0; s < k; ++s) {
                cplx acc = 0.0;
                for (std::size_t t = 0; t < k; ++t) acc += in[t] * std::conj(g(s, t));
                out[s] = acc;
            }
            for (std::size_t s = 0; s < k; ++s) m(r, base | offs[s]) = out[s];
        }
    }
}

/// In-place v <- G v with G embedded on `qubits`.
inline void apply_to_vector(CVector& v, std::size_t n, const CMatrix& g, std::span<const std::size_t> qubits) {
    const std::size_t dim = basis_dim(n);
    const auto offs = sub_offsets(n, qubits);
    const std::size_t k = offs.size();
    std::size_t covered = 0;
    for (auto o : offs) covered |= o;
    cplx in[4];
    for (std::size_t base = 0; base < dim; ++base) {
        if (base & covered) continue;
        for (std::size_t s = 0; s < k; ++s) in[s] = v(base | offs[s]);
        for (std::size_t s = 0; s < k; ++s) {
            cplx acc = 0.0;
            for (std::size_t t = 0; t < k; ++t) acc += g(s, t) * in[t];
            v(base | offs[s]) = acc;
        }
    }
}

inline double diagonal_square_sum(const CMatrix& m) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) acc += std::norm(m(i, i));
    return acc;
}

inline double purity_of(const CMatrix& m) {
    // Tr(m^2) = sum |m_ij|^2 for Hermitian m.
    return m.cwiseAbs2().sum();
}

inline std::size_t qubits_for_dim(Eigen::Index dim) {
    if (dim <= 0) throw std::invalid_argument("empty matrix");
    std::size_t n = 0;
    while ((Eigen::Index{1} << n) < dim) ++n;
    if ((Eigen::Index{1} << n) != dim) throw std::invalid_argument("matrix dimension is not a power of two");
    return n;
}

}  // namespace detail

struct EigenDecomposition {
    RVector values;   // descending
    CMatrix vectors;  // column i pairs with values(i)
};

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
inline EigenDecomposition eig_hermitian(const CMatrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("eig_hermitian: matrix is not square");
    if (m.size() > 0 && (m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument("eig_hermitian: matrix is not Hermitian");
    const CMatrix sym = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eig_hermitian: eigensolver failed");
    const auto n = m.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return solver.eigenvalues()(a) > solver.eigenvalues()(b); });
    EigenDecomposition out{RVector(n), CMatrix(n, n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values(i) = solver.eigenvalues()(order[static_cast<std::size_t>(i)]);
        out.vectors.col(i) = solver.eigenvectors().col(order[static_cast<std::size_t>(i)]);
    }
    return out;
}

/// Hermitian, positive semidefinite, unit-trace matrix on 2^n_qubits levels.
class DensityMatrix {
public:
    static constexpr double kTolerance = 1e-10;

    /// Validates every invariant; throws std::invalid_argument on violation.
    static DensityMatrix from_matrix(CMatrix m) {
        const std::size_t n = detail::qubits_for_dim(m.rows());
        if (m.rows() != m.cols()) throw std::invalid_argument("density matrix must be square");
        if (n == 0 || n > kMaxQubits) throw std::invalid_argument("density matrix qubit count out of range");
        DensityMatrix d(n, std::move(m));
        d.validate();
        return d;
    }

    /// Skips validation outside debug builds; callers guarantee the invariants.
    static DensityMatrix unchecked(std::size_t n_qubits, CMatrix m) {
        DensityMatrix d(n_qubits, std::move(m));
#ifndef NDEBUG
        d.validate();
#endif
        return d;
    }

    static DensityMatrix basis_state(std::size_t n_qubits, std::size_t index) {
        const auto dim = basis_dim(n_qubits);
        if (index >= dim) throw std::out_of_range("basis index out of range");
        CMatrix m = CMatrix::Zero(dim, dim);
        m(index, index) = 1.0;
        return DensityMatrix(n_qubits, std::move(m));
    }

    static DensityMatrix pure(const CVector& psi) {
        const double nrm = psi.norm();
        if (nrm < 1e-300) throw std::invalid_argument("zero state vector");
        const CVector u = psi / nrm;
        return from_matrix(u * u.adjoint());
    }

    static DensityMatrix maximally_mixed(std::size_t n_qubits) {
        const auto dim = basis_dim(n_qubits);
        return DensityMatrix(n_qubits, CMatrix::Identity(dim, dim) / static_cast<double>(dim));
    }

    std::size_t n_qubits() const { return n_; }
    std::size_t dim() const { return basis_dim(n_); }
    const CMatrix& matrix() const { return m_; }
    cplx operator()(std::size_t r, std::size_t c) const { return m_(r, c); }

    void validate() const {
        if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > kTolerance)
            throw std::invalid_argument("density matrix is not Hermitian");
        if (std::abs(m_.trace() - cplx{1.0, 0.0}) > kTolerance)
            throw std::invalid_argument("density matrix trace differs from 1");
        if (eig_hermitian(m_).values.minCoeff() < -kTolerance)
            throw std::invalid_argument("density matrix is not positive semidefinite");
    }

private:
    DensityMatrix(std::size_t n, CMatrix m) : n_(n), m_(std::move(m)) {}

    std::size_t n_ = 1;
    CMatrix m_;
};

/// Returns G rho G^dagger with `gate` acting on `qubits` (first qubit = most
/// significant sub-index, e.g. control of a CNOT).
inline DensityMatrix apply_gate(const DensityMatrix& rho, const GateMatrix& gate, std::span<const std::size_t> qubits) {
    detail::check_qubits(rho.n_qubits(), qubits, gate.dim());
    CMatrix m = rho.matrix();
    detail::conjugate_in_place(m, rho.n_qubits(), gate.matrix(), qubits);
    return DensityMatrix::unchecked(rho.n_qubits(), std::move(m));
}

inline DensityMatrix apply_gate(const DensityMatrix& rho, const GateMatrix& gate, std::initializer_list<std::size_t> qubits) {
    return apply_gate(rho, gate, std::span<const std::size_t>(qubits.begin(), qubits.size()));
}

inline double purity(const DensityMatrix& rho) { return detail::purity_of(rho.matrix()); }

/// Full dephasing channel: zeroes every off-diagonal entry.
inline DensityMatrix dephase(const DensityMatrix& rho) {
    CMatrix m = CMatrix::Zero(rho.dim(), rho.dim());
    for (std::size_t i = 0; i < rho.dim(); ++i) m(i, i) = rho(i, i);
    return DensityMatrix::unchecked(rho.n_qubits(), std::move(m));
}

/// Traces out every qubit not listed in `keep`. Kept qubits retain their
/// relative order.
inline DensityMatrix partial_trace(const DensityMatrix& rho, std::vector<std::size_t> keep) {
    const std::size_t n = rho.n_qubits();
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    if (keep.empty() || keep.size() >= n) throw std::invalid_argument("partial_trace: keep must be a nonempty strict subset");
    if (keep.back() >= n) throw std::out_of_range("partial_trace: qubit index out of range");

    std::vector<std::size_t> traced;
    for (std::size_t q = 0; q < n; ++q)
        if (!std::binary_search(keep.begin(), keep.end(), q)) traced.push_back(q);
    const auto keep_offs = detail::sub_offsets(n, keep);
    const auto env_offs = detail::sub_offsets(n, traced);

    const std::size_t kd = keep_offs.size();
    CMatrix out = CMatrix::Zero(kd, kd);
    for (std::size_t i = 0; i < kd; ++i)
        for (std::size_t j = 0; j < kd; ++j) {
            cplx acc = 0.0;
            for (auto e : env_offs) acc += rho(keep_offs[i] | e, keep_offs[j] | e);
            out(i, j) = acc;
        }
    return DensityMatrix::unchecked(keep.size(), std::move(out));
}

// JSON form: {"n_qubits": n, "rows": [[[re, im], ...], ...]} in row-major order.

inline nlohmann::json to_json(const DensityMatrix& rho) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < rho.dim(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < rho.dim(); ++c) row.push_back({rho(r, c).real(), rho(r, c).imag()});
        rows.push_back(std::move(row));
    }
    return {{"n_qubits", rho.n_qubits()}, {"rows", std::move(rows)}};
}

inline DensityMatrix density_matrix_from_json(const nlohmann::json& j) {
    const auto n = j.at("n_qubits").get<std::size_t>();
    if (n == 0 || n > kMaxQubits) throw std::invalid_argument("n_qubits out of range");
    const auto dim = basis_dim(n);
    const auto& rows = j.at("rows");
    if (rows.size() != dim) throw std::invalid_argument("row count does not match n_qubits");
    CMatrix m(dim, dim);
    for (std::size_t r = 0; r < dim; ++r) {
        if (rows[r].size() != dim) throw std::invalid_argument("row length does not match n_qubits");
        for (std::size_t c = 0; c < dim; ++c) m(r, c) = cplx{rows[r][c].at(0).get<double>(), rows[r][c].at(1).get<double>()};
    }
    return DensityMatrix::from_matrix(std::move(m));
}

}  // namespace rlvqsd
