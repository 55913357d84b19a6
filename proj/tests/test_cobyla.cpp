#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "rlvqsd/cobyla.hpp"
#include "rlvqsd/vqsd.hpp"

using namespace rlvqsd;

namespace {

double sphere(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

}  // namespace

TEST_CASE("convex quadratic converges") {
    const std::vector<double> x0{1.0, 1.0};
    const auto r = minimize(sphere, x0, OptimizerBudget{});
    CHECK(r.f < 1e-6);
    CHECK(r.evals <= 400);
}

TEST_CASE("shifted anisotropic quadratic") {
    auto f = [](std::span<const double> x) {
        return 3.0 * (x[0] - 0.5) * (x[0] - 0.5) + (x[1] + 1.2) * (x[1] + 1.2) + 0.5 * (x[2] - 2.0) * (x[2] - 2.0);
    };
    const std::vector<double> x0{0.0, 0.0, 0.0};
    const auto r = minimize(f, x0, OptimizerBudget{1000, 1.0, 1e-8});
    CHECK(r.f < 1e-10);
    CHECK(std::abs(r.theta[0] - 0.5) < 1e-4);
    CHECK(std::abs(r.theta[1] + 1.2) < 1e-4);
    CHECK(std::abs(r.theta[2] - 2.0) < 1e-4);
}

// Linear-model methods crawl along the Rosenbrock valley; the reference
// Fortran implementation ends near 3e-3 from this start with the same budget.
TEST_CASE("Rosenbrock makes progress") {
    auto f = [](std::span<const double> x) { return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2); };
    const std::vector<double> x0{-1.2, 1.0};
    const auto r = minimize(f, x0, OptimizerBudget{5000, 0.5, 1e-8});
    CHECK(r.f < 1e-2);
    CHECK(r.evals == 5000);
}

TEST_CASE("empty parameter vector") {
    int calls = 0;
    auto f = [&](std::span<const double> x) {
        ++calls;
        CHECK(x.empty());
        return 0.75;
    };
    const auto r = minimize(f, std::span<const double>{}, OptimizerBudget{});
    CHECK(r.theta.empty());
    CHECK(r.f == 0.75);
    CHECK(r.evals == 1);
    CHECK(calls == 1);
}

TEST_CASE("budget is respected exactly") {
    int calls = 0;
    auto f = [&](std::span<const double> x) {
        ++calls;
        return std::cos(3.0 * x[0]) + std::sin(2.0 * x[1]) + 0.1 * sphere(x);
    };
    const std::vector<double> x0{0.3, -0.4};
    for (std::size_t budget : {1u, 2u, 3u, 7u, 25u}) {
        calls = 0;
        const auto r = minimize(f, x0, OptimizerBudget{budget, 1.0, 1e-6});
        CHECK(r.evals <= budget);
        CHECK(static_cast<std::size_t>(calls) == r.evals);
    }
}

TEST_CASE("result is the best evaluated point") {
    std::vector<std::pair<std::vector<double>, double>> seen;
    auto f = [&](std::span<const double> x) {
        const double v = std::sin(x[0]) * std::cos(x[1]) + 0.05 * sphere(x);
        seen.emplace_back(std::vector<double>(x.begin(), x.end()), v);
        return v;
    };
    const std::vector<double> x0{0.1, 0.2};
    const auto r = minimize(f, x0, OptimizerBudget{60, 1.0, 1e-6});
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [x, v] : seen) best = std::min(best, v);
    CHECK(r.f == best);
    CHECK(f(r.theta) == r.f);
}

TEST_CASE("deterministic") {
    auto f = [](std::span<const double> x) { return std::sin(x[0] + 1.0) + std::cos(x[1] * x[0]) + 0.3 * x[2] * x[2]; };
    const std::vector<double> x0{0.0, 0.0, 0.0};
    const auto a = minimize(f, x0, OptimizerBudget{});
    const auto b = minimize(f, x0, OptimizerBudget{});
    CHECK(a.theta == b.theta);
    CHECK(a.f == b.f);
    CHECK(a.evals == b.evals);
}

TEST_CASE("non-finite objective is reported") {
    auto f = [](std::span<const double> x) { return x[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : x[0] * x[0]; };
    const std::vector<double> x0{0.0};
    CHECK_THROWS_AS(minimize(f, x0, OptimizerBudget{}), NonFiniteObjective);
}

TEST_CASE("invalid budgets") {
    const std::vector<double> x0{0.0};
    CHECK_THROWS(minimize(sphere, x0, OptimizerBudget{0, 1.0, 1e-6}));
    CHECK_THROWS(minimize(sphere, x0, OptimizerBudget{10, 1e-7, 1e-6}));
    CHECK_THROWS(minimize(sphere, x0, OptimizerBudget{10, 1.0, 0.0}));
}

TEST_CASE("single-qubit cost landscape") {
    CVector plus(2);
    plus << 1.0, 1.0;
    const auto rho = DensityMatrix::pure(plus);
    Circuit c(1);
    c.push(Gate::ry(0));
    CostFunction f(rho, c);
    // Closed form: C(t) = 0.5 cos^2(t).
    for (double t = -3.0; t <= 3.0; t += 0.25) {
        const std::vector<double> p{t};
        CHECK(std::abs(f(p) - 0.5 * std::cos(t) * std::cos(t)) < 1e-14);
    }
    const auto r = minimize(f, c.params(), OptimizerBudget{});
    CHECK(r.f < 1e-8);
    CHECK(std::abs(std::abs(r.theta[0]) - std::numbers::pi / 2) < 1e-3);
}

TEST_CASE("restarts keep the best run and sum evaluations") {
    auto f = [](std::span<const double> x) { return std::cos(x[0]) + 0.01 * x[0] * x[0]; };
    const std::vector<double> x0{0.0};
    std::mt19937_64 rng(3);
    const auto single = minimize(f, x0, OptimizerBudget{50, 1.0, 1e-6});
    std::mt19937_64 rng2(3);
    const auto multi = minimize_with_restarts(f, x0, OptimizerBudget{50, 1.0, 1e-6}, 3, rng2);
    CHECK(multi.f <= single.f);
    CHECK(multi.evals > single.evals);
    CHECK(multi.evals <= 200);
    std::mt19937_64 rng3(3);
    CHECK(minimize_with_restarts(f, x0, OptimizerBudget{50, 1.0, 1e-6}, 3, rng3).f == multi.f);
    (void)rng;
}
