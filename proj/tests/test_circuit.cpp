#include <catch_amalgamated.hpp>

#include <random>

#include "rlvqsd/circuit.hpp"
#include "rlvqsd/states.hpp"
#include "support/oracle.hpp"

using namespace rlvqsd;

namespace {

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("appending gates manages the parameter vector") {
    Circuit c(2);
    c = c.appended(Gate::rx(0));
    CHECK(c.size() == 1);
    CHECK(c.params() == std::vector<double>{0.0});
    c = c.appended(Gate::cnot(0, 1));
    CHECK(c.size() == 2);
    CHECK(c.params() == std::vector<double>{0.0});
    CHECK_FALSE(c.gates()[1].param_slot.has_value());

    std::mt19937_64 rng(1);
    const auto r = oracle::random_circuit(3, 20, rng);
    std::size_t rotations = 0;
    for (const auto& g : r.gates()) rotations += g.rotation();
    CHECK(r.params().size() == rotations);
}

TEST_CASE("appended leaves the original untouched") {
    const Circuit a = Circuit(2).appended(Gate::ry(1), 0.3);
    const Circuit b = a.appended(Gate::rz(0), 0.7);
    CHECK(a.size() == 1);
    CHECK(b.size() == 2);
    CHECK(b.params() == std::vector<double>{0.3, 0.7});
}

TEST_CASE("invalid gates are rejected") {
    Circuit c(2);
    CHECK_THROWS_AS(c.push(Gate::rx(2)), std::out_of_range);
    CHECK_THROWS_AS(c.push(Gate::cnot(0, 0)), std::invalid_argument);
    CHECK_THROWS_AS(c.push(Gate::cnot(0, 5)), std::out_of_range);
    CHECK_THROWS(Circuit(0));
    CHECK_THROWS(c.with_params({1.0}));
}

TEST_CASE("ASAP schedule") {
    CHECK(circuit_depth(Circuit(3)) == 0);

    Circuit c(2);
    c.push(Gate::cnot(0, 1));
    c.push(Gate::rx(0));
    c.push(Gate::rz(1));
    CHECK(schedule_moments(c) == std::vector<std::size_t>{0, 1, 1});
    CHECK(circuit_depth(c) == 2);

    Circuit d(2);
    d.push(Gate::rx(0));
    d.push(Gate::ry(1));
    CHECK(schedule_moments(d) == std::vector<std::size_t>{0, 0});
    CHECK(circuit_depth(d) == 1);

    Circuit e(3);
    e.push(Gate::rx(0));
    e.push(Gate::rx(0));
    e.push(Gate::cnot(1, 2));
    e.push(Gate::cnot(0, 2));
    CHECK(schedule_moments(e) == std::vector<std::size_t>{0, 1, 0, 2});
}

TEST_CASE("gate counts") {
    const auto empty = gate_counts(Circuit(2));
    CHECK(empty.one_qubit == 0);
    CHECK(empty.two_qubit == 0);
    CHECK(empty.depth == 0);

    Circuit c(2);
    for (int i = 0; i < 5; ++i) c.push(Gate::ry(0)), c.push(Gate::rx(1));
    c.push(Gate::cnot(0, 1));
    c.push(Gate::cnot(1, 0));
    const auto k = gate_counts(c);
    CHECK(k.one_qubit == 10);
    CHECK(k.two_qubit == 2);
    CHECK(k.total() == 12);

    Circuit h(3);
    for (int i = 0; i < 10; ++i) h.push(Gate::ry(static_cast<std::size_t>(i % 3)));
    for (int i = 0; i < 8; ++i) h.push(Gate::cnot(static_cast<std::size_t>(i % 3), static_cast<std::size_t>((i + 1) % 3)));
    CHECK(gate_counts(h).one_qubit == 10);
    CHECK(gate_counts(h).two_qubit == 8);
}

TEST_CASE("three-param LHEA structure") {
    struct Row {
        std::size_t n, layers, one, two, depth;
    };
    const Row rows[] = {{2, 1, 12, 1, 7}, {2, 2, 24, 2, 14}, {2, 6, 72, 6, 42}, {3, 1, 36, 3, 21}, {3, 2, 72, 6, 42}, {3, 4, 144, 12, 84}};
    for (const auto& r : rows) {
        const auto k = gate_counts(build_lhea(r.n, r.layers, LheaVariant::ThreeParam));
        INFO("n=" << r.n << " layers=" << r.layers);
        CHECK(k.one_qubit == r.one);
        CHECK(k.two_qubit == r.two);
        CHECK(k.depth == r.depth);
    }
    const auto c = build_lhea(2, 3, LheaVariant::ThreeParam);
    CHECK(c.params().size() == 36);
    for (double p : c.params()) CHECK(p == 0.0);
}

TEST_CASE("one-param LHEA uses RY and CZ") {
    const auto c = build_lhea(3, 2, LheaVariant::OneParam);
    const auto k = gate_counts(c);
    CHECK(k.one_qubit == 24);
    CHECK(k.two_qubit == 6);
    for (const auto& g : c.gates()) CHECK((g.kind == GateKind::RY || g.kind == GateKind::CZ));
    CHECK_THROWS(build_lhea(1, 1, LheaVariant::OneParam));
    CHECK_THROWS(build_lhea(2, 0, LheaVariant::ThreeParam));
}

TEST_CASE("circuit application") {
    std::mt19937_64 rng(7);
    const auto rho = ginibre_density_matrix(2, rng);
    CHECK(max_abs(circuit_apply(Circuit(2), rho).matrix() - rho.matrix()) == 0.0);

    // Zero angles: only the entangling gates act.
    Circuit c(2);
    c.push(Gate::rx(0));
    c.push(Gate::cnot(0, 1));
    c.push(Gate::rz(1));
    c.push(Gate::cnot(1, 0));
    Circuit cnots(2);
    cnots.push(Gate::cnot(0, 1));
    cnots.push(Gate::cnot(1, 0));
    CHECK(max_abs(circuit_apply(c, rho).matrix() - circuit_apply(cnots, rho).matrix()) < 1e-15);
}

TEST_CASE("circuit application matches dense unitary product") {
    std::mt19937_64 rng(13);
    for (std::size_t n = 1; n <= 3; ++n)
        for (int trial = 0; trial < 30; ++trial) {
            const auto c = oracle::random_circuit(n, 15, rng, n >= 2);
            const CMatrix rho = oracle::random_density(n, rng);
            const CMatrix u = oracle::circuit_unitary(c, c.params());
            const auto out = circuit_apply(c, DensityMatrix::from_matrix(rho));
            CHECK(max_abs(out.matrix() - u * rho * u.adjoint()) < 1e-12);
            CHECK(max_abs(circuit_unitary(c, c.params()) - u) < 1e-12);
        }
}

TEST_CASE("circuit JSON round trip") {
    std::mt19937_64 rng(17);
    const auto c = oracle::random_circuit(3, 12, rng, true);
    const auto back = circuit_from_json(nlohmann::json::parse(to_json(c).dump()));
    REQUIRE(back.size() == c.size());
    CHECK(back.params() == c.params());
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(back.gates()[i].same_op(c.gates()[i]));
    CHECK_THROWS(circuit_from_json(nlohmann::json{{"n_qubits", 2}, {"gates", {{{"kind", "RQ"}, {"qubits", {0}}}}}}));
    CHECK_THROWS(circuit_from_json(nlohmann::json{{"n_qubits", 2}, {"gates", {{{"kind", "CNOT"}, {"qubits", {0, 3}}}}}}));
}
