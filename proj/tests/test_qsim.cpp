#include <catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include "rlvqsd/qsim.hpp"
#include "rlvqsd/states.hpp"
#include "support/oracle.hpp"

using namespace rlvqsd;
using Catch::Matchers::WithinAbs;

namespace {

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("rotation at zero angle is the identity") {
    for (auto axis : {Axis::X, Axis::Y, Axis::Z}) CHECK(max_abs(rotation_matrix(axis, 0.0).matrix() - CMatrix::Identity(2, 2)) == 0.0);
}

TEST_CASE("rotations match the dense exponential") {
    for (double a : {-2.3, 0.4, 1.7, 3.1}) {
        CHECK(max_abs(rotation_matrix(Axis::X, a).matrix() - oracle::rotation('X', a)) < 1e-15);
        CHECK(max_abs(rotation_matrix(Axis::Y, a).matrix() - oracle::rotation('Y', a)) < 1e-15);
        CHECK(max_abs(rotation_matrix(Axis::Z, a).matrix() - oracle::rotation('Z', a)) < 1e-15);
    }
}

TEST_CASE("non-finite rotation angle is rejected") {
    CHECK_THROWS_AS(rotation_matrix(Axis::X, std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
    CHECK_THROWS_AS(rotation_matrix(Axis::Y, std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST_CASE("RX(pi) flips |0><0| to |1><1|") {
    const auto out = apply_gate(DensityMatrix::basis_state(1, 0), rotation_matrix(Axis::X, std::numbers::pi), {0});
    CHECK(max_abs(out.matrix() - DensityMatrix::basis_state(1, 1).matrix()) < 1e-15);
}

TEST_CASE("RY(pi/2) maps |0><0| to |+><+|") {
    const auto out = apply_gate(DensityMatrix::basis_state(1, 0), rotation_matrix(Axis::Y, std::numbers::pi / 2), {0});
    CMatrix plus(2, 2);
    plus << 0.5, 0.5, 0.5, 0.5;
    CHECK(max_abs(out.matrix() - plus) < 1e-15);
}

TEST_CASE("identity gate leaves the state unchanged") {
    std::mt19937_64 rng(3);
    const auto rho = ginibre_density_matrix(2, rng);
    CHECK(max_abs(apply_gate(rho, GateMatrix::identity(2), {1}).matrix() - rho.matrix()) == 0.0);
    CHECK(max_abs(apply_gate(rho, GateMatrix::identity(4), {0, 1}).matrix() - rho.matrix()) == 0.0);
}

TEST_CASE("CNOT truth table on basis states") {
    // |10> -> |11>, |11> -> |10>, control-0 states untouched.
    CHECK(max_abs(apply_gate(DensityMatrix::basis_state(2, 2), GateMatrix::cnot(), {0, 1}).matrix() -
                  DensityMatrix::basis_state(2, 3).matrix()) == 0.0);
    CHECK(max_abs(apply_gate(DensityMatrix::basis_state(2, 3), GateMatrix::cnot(), {0, 1}).matrix() -
                  DensityMatrix::basis_state(2, 2).matrix()) == 0.0);
    CHECK(max_abs(apply_gate(DensityMatrix::basis_state(2, 1), GateMatrix::cnot(), {0, 1}).matrix() -
                  DensityMatrix::basis_state(2, 1).matrix()) == 0.0);
    // Reversed roles: control 1, target 0 maps |01> -> |11>.
    CHECK(max_abs(apply_gate(DensityMatrix::basis_state(2, 1), GateMatrix::cnot(), {1, 0}).matrix() -
                  DensityMatrix::basis_state(2, 3).matrix()) == 0.0);
}

TEST_CASE("gate application matches Kronecker embedding") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> angle(-3.0, 3.0);
    for (std::size_t n = 1; n <= 4; ++n) {
        const CMatrix rho = oracle::random_density(n, rng);
        const auto dm = DensityMatrix::from_matrix(rho);
        for (std::size_t q = 0; q < n; ++q) {
            const double a = angle(rng);
            const CMatrix g = oracle::embed1(oracle::rotation('Y', a), n, q);
            CHECK(max_abs(apply_gate(dm, rotation_matrix(Axis::Y, a), {q}).matrix() - g * rho * g.adjoint()) < 1e-13);
        }
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t t = 0; t < n; ++t) {
                if (c == t) continue;
                const CMatrix g = oracle::embed2(oracle::cnot(), n, c, t);
                CHECK(max_abs(apply_gate(dm, GateMatrix::cnot(), {c, t}).matrix() - g * rho * g.adjoint()) < 1e-14);
            }
    }
}

TEST_CASE("gates preserve purity") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> angle(-3.0, 3.0);
    std::uniform_int_distribution<int> pick(0, 3);
    for (int trial = 0; trial < 100; ++trial) {
        const auto rho = ginibre_density_matrix(3, rng);
        const double before = oracle::purity(rho.matrix());
        const int k = pick(rng);
        const auto out = k < 3 ? apply_gate(rho, rotation_matrix(static_cast<Axis>(k), angle(rng)), {static_cast<std::size_t>(trial % 3)})
                               : apply_gate(rho, GateMatrix::cnot(), {static_cast<std::size_t>(trial % 3), static_cast<std::size_t>((trial + 1) % 3)});
        CHECK_THAT(oracle::purity(out.matrix()), WithinAbs(before, 1e-12));
    }
}

TEST_CASE("apply_gate rejects bad qubit lists") {
    const auto rho = DensityMatrix::basis_state(2, 0);
    CHECK_THROWS(apply_gate(rho, GateMatrix::cnot(), {0, 0}));
    CHECK_THROWS(apply_gate(rho, GateMatrix::cnot(), {0, 2}));
    CHECK_THROWS(apply_gate(rho, rotation_matrix(Axis::X, 1.0), {0, 1}));
}

TEST_CASE("purity examples") {
    CHECK(purity(DensityMatrix::basis_state(3, 0)) == 1.0);
    CHECK_THAT(purity(DensityMatrix::maximally_mixed(2)), WithinAbs(0.25, 1e-15));
    std::mt19937_64 rng(17);
    for (int i = 0; i < 20; ++i) {
        const auto rho = ginibre_density_matrix(2, rng);
        const auto eig = eig_hermitian(rho.matrix());
        CHECK_THAT(purity(rho), WithinAbs(eig.values.squaredNorm(), 1e-12));
    }
}

TEST_CASE("dephase examples") {
    const auto diag = DensityMatrix::basis_state(2, 2);
    CHECK(max_abs(dephase(diag).matrix() - diag.matrix()) == 0.0);

    CVector plus(2);
    plus << 1.0, 1.0;
    const auto p = DensityMatrix::pure(plus);
    CHECK_THAT(purity(p), WithinAbs(1.0, 1e-15));
    const auto d = dephase(p);
    CHECK_THAT(d(0, 0).real(), WithinAbs(0.5, 1e-15));
    CHECK(std::abs(d(0, 1)) == 0.0);
    CHECK_THAT(purity(d), WithinAbs(0.5, 1e-15));

    std::mt19937_64 rng(19);
    for (int i = 0; i < 100; ++i) {
        const auto rho = ginibre_density_matrix(2, rng);
        CHECK(purity(dephase(rho)) <= purity(rho) + 1e-15);
    }
}

TEST_CASE("partial trace examples") {
    std::mt19937_64 rng(23);
    const CMatrix a = oracle::random_density(1, rng);
    const CMatrix b = oracle::random_density(2, rng);
    const auto prod = DensityMatrix::from_matrix(oracle::kron(a, b));
    CHECK(max_abs(partial_trace(prod, {0}).matrix() - a) < 1e-14);
    CHECK(max_abs(partial_trace(prod, {1, 2}).matrix() - b) < 1e-14);

    CVector bell = CVector::Zero(4);
    bell(0) = bell(3) = 1.0;
    const auto red = partial_trace(DensityMatrix::pure(bell), {0});
    CHECK(max_abs(red.matrix() - CMatrix::Identity(2, 2) / 2.0) < 1e-15);

    for (int i = 0; i < 20; ++i) {
        const auto rho = ginibre_density_matrix(3, rng);
        CHECK_THAT(partial_trace(rho, {0, 2}).matrix().trace().real(), WithinAbs(1.0, 1e-12));
    }
    CHECK_THROWS(partial_trace(prod, {}));
    CHECK_THROWS(partial_trace(prod, {0, 1, 2}));
    CHECK_THROWS(partial_trace(prod, {5}));
}

TEST_CASE("eig_hermitian examples") {
    CMatrix d = CMatrix::Zero(3, 3);
    d(0, 0) = 3.0;
    d(1, 1) = 1.0;
    d(2, 2) = 2.0;
    const auto e = eig_hermitian(d);
    CHECK(e.values(0) == Catch::Approx(3.0));
    CHECK(e.values(1) == Catch::Approx(2.0));
    CHECK(e.values(2) == Catch::Approx(1.0));

    const auto x = eig_hermitian(oracle::pauli('X'));
    CHECK_THAT(x.values(0), WithinAbs(1.0, 1e-14));
    CHECK_THAT(x.values(1), WithinAbs(-1.0, 1e-14));
    CHECK_THAT(std::abs(x.vectors(0, 0)), WithinAbs(std::sqrt(0.5), 1e-14));
    CHECK_THAT(std::abs(x.vectors(1, 0)), WithinAbs(std::sqrt(0.5), 1e-14));
    CHECK(std::abs(x.vectors(0, 0) - x.vectors(1, 0)) < 1e-14);
    CHECK(std::abs(x.vectors(0, 1) + x.vectors(1, 1)) < 1e-14);

    std::mt19937_64 rng(29);
    std::normal_distribution<double> normal;
    for (int i = 0; i < 20; ++i) {
        CMatrix m(6, 6);
        for (Eigen::Index r = 0; r < 6; ++r)
            for (Eigen::Index c = 0; c < 6; ++c) m(r, c) = cplx{normal(rng), normal(rng)};
        m = (m + m.adjoint()).eval();
        const auto eig = eig_hermitian(m);
        const CMatrix rec = eig.vectors * eig.values.cast<cplx>().asDiagonal() * eig.vectors.adjoint();
        CHECK(max_abs(rec - m) < 1e-8);
        for (Eigen::Index k = 1; k < 6; ++k) CHECK(eig.values(k - 1) >= eig.values(k));
    }
    CHECK_THROWS(eig_hermitian(CMatrix::Random(3, 3)));
}

TEST_CASE("density matrix validation") {
    CMatrix bad = CMatrix::Identity(2, 2);
    CHECK_THROWS_AS(DensityMatrix::from_matrix(bad), std::invalid_argument);  // trace 2
    CMatrix neg(2, 2);
    neg << 1.5, 0.0, 0.0, -0.5;
    CHECK_THROWS_AS(DensityMatrix::from_matrix(neg), std::invalid_argument);
    CMatrix nonherm(2, 2);
    nonherm << 0.5, 0.1, 0.0, 0.5;
    CHECK_THROWS_AS(DensityMatrix::from_matrix(nonherm), std::invalid_argument);
    CHECK_THROWS(DensityMatrix::from_matrix(CMatrix::Identity(3, 3) / 3.0));
    CHECK_THROWS(DensityMatrix::basis_state(2, 4));
}

TEST_CASE("density matrix JSON round trip") {
    std::mt19937_64 rng(31);
    const auto rho = ginibre_density_matrix(2, rng);
    const auto back = density_matrix_from_json(nlohmann::json::parse(to_json(rho).dump()));
    CHECK(back.n_qubits() == 2);
    CHECK(max_abs(back.matrix() - rho.matrix()) == 0.0);
    CHECK_THROWS(density_matrix_from_json(nlohmann::json{{"n_qubits", 2}, {"rows", nlohmann::json::array()}}));
}
