#pragma once

// Derivative-free minimization by linear approximation on a simplex with a
// shrinking trust region (Powell's COBYLA, specialised to the unconstrained
// case). The simplex is stored as a base vertex plus n displacement columns
// together with the inverse of the displacement matrix.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rlvqsd {

struct OptimizerBudget {
    std::size_t max_evals = 400;
    double initial_step = 1.0;
    double final_tolerance = 1e-6;

    void validate() const {
        if (max_evals < 1) throw std::invalid_argument("optimizer budget needs at least one evaluation");
        if (!(final_tolerance > 0.0) || !(initial_step > final_tolerance))
            throw std::invalid_argument("optimizer needs initial_step > final_tolerance > 0");
    }
};

struct MinimizeResult {
    std::vector<double> theta;
    double f = std::numeric_limits<double>::infinity();
    std::size_t evals = 0;
};

struct NonFiniteObjective : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

class Evaluator {
public:
    template <class F>
    Evaluator(F& f, std::size_t max_evals) : call_([&f](std::span<const double> x) { return static_cast<double>(f(x)); }), max_(max_evals) {}

    bool exhausted() const { return result_.evals >= max_; }

    double operator()(const Eigen::VectorXd& x) {
        const double v = call_(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
        ++result_.evals;
        if (!std::isfinite(v))
            throw NonFiniteObjective("objective returned a non-finite value at evaluation " + std::to_string(result_.evals));
        if (v < result_.f) {
            result_.f = v;
            result_.theta.assign(x.data(), x.data() + x.size());
        }
        return v;
    }

    MinimizeResult& result() { return result_; }

private:
    std::function<double(std::span<const double>)> call_;
    std::size_t max_;
    MinimizeResult result_;
};

// Replaces displacement column j by dx and updates the inverse rows.
inline void replace_vertex(Eigen::MatrixXd& sim, Eigen::MatrixXd& simi, Eigen::Index j, const Eigen::VectorXd& dx) {
    sim.col(j) = dx;
    simi.row(j) /= simi.row(j).dot(dx);
    for (Eigen::Index k = 0; k < simi.rows(); ++k) {
        if (k == j) continue;
        simi.row(k) -= simi.row(k).dot(dx) * simi.row(j);
    }
}

}  // namespace detail

/// Minimizes `objective` from `theta0` within `budget.max_evals` calls and
/// returns the best point evaluated. Deterministic.
template <class Objective>
MinimizeResult minimize(Objective&& objective, std::span<const double> theta0, const OptimizerBudget& budget) {
    budget.validate();
    constexpr double alpha = 0.25, beta = 2.1, gamma = 0.5, delta = 1.1;

    const auto n = static_cast<Eigen::Index>(theta0.size());
    detail::Evaluator eval(objective, budget.max_evals);
    Eigen::VectorXd base = Eigen::Map<const Eigen::VectorXd>(theta0.data(), n);
    double fbase = eval(base);
    if (n == 0) return eval.result();

    double rho = budget.initial_step;
    const double rho_end = budget.final_tolerance;

    Eigen::MatrixXd sim = rho * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd fval(n);

    // Initial simplex; a better vertex immediately becomes the base.
    for (Eigen::Index j = 0; j < n; ++j) {
        if (eval.exhausted()) return eval.result();
        Eigen::VectorXd x = base;
        x(j) += rho;
        const double f = eval(x);
        if (f < fbase) {
            base = x;
            fval(j) = fbase;
            fbase = f;
            for (Eigen::Index k = 0; k <= j; ++k) sim(j, k) = -rho;
        } else {
            fval(j) = f;
        }
    }
    Eigen::MatrixXd simi = sim.inverse();

    Eigen::VectorXd vsig(n), veta(n), sigbar(n);
    bool trust_pending = false;
    for (;;) {
        // Move the best vertex to the base position.
        Eigen::Index best = -1;
        double fmin = fbase;
        for (Eigen::Index j = 0; j < n; ++j)
            if (fval(j) < fmin) {
                best = j;
                fmin = fval(j);
            }
        if (best >= 0) {
            std::swap(fval(best), fbase);
            const Eigen::VectorXd d = sim.col(best);
            base += d;
            sim.colwise() -= d;
            sim.col(best) = -d;
            simi.row(best) = -simi.colwise().sum();
        }

        // Rounding errors have damaged the inverse; stop with the best point.
        if ((simi * sim - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > 0.1) break;

        // Linear model gradient from the simplex values.
        const Eigen::VectorXd grad = simi.transpose() * (fval.array() - fbase).matrix();

        const double parsig = alpha * rho, pareta = beta * rho;
        bool acceptable = true;
        for (Eigen::Index j = 0; j < n; ++j) {
            vsig(j) = 1.0 / simi.row(j).norm();
            veta(j) = sim.col(j).norm();
            if (vsig(j) < parsig || veta(j) > pareta) acceptable = false;
        }

        if (!trust_pending && !acceptable) {
            // Geometry step: replace the vertex that spoils the simplex shape.
            Eigen::Index jdrop = -1;
            double worst = pareta;
            for (Eigen::Index j = 0; j < n; ++j)
                if (veta(j) > worst) {
                    jdrop = j;
                    worst = veta(j);
                }
            if (jdrop < 0) {
                worst = parsig;
                for (Eigen::Index j = 0; j < n; ++j)
                    if (vsig(j) < worst) {
                        jdrop = j;
                        worst = vsig(j);
                    }
            }
            Eigen::VectorXd dx = (gamma * rho * vsig(jdrop)) * simi.row(jdrop).transpose();
            if (grad.dot(dx) > 0.0) dx = -dx;
            detail::replace_vertex(sim, simi, jdrop, dx);
            if (eval.exhausted()) break;
            fval(jdrop) = eval(base + dx);
            continue;
        }

        // Trust-region step: minimise the linear model on the ball of radius rho.
        const double gnorm = grad.norm();
        const Eigen::VectorXd dx = gnorm > 0.0 ? Eigen::VectorXd(-(rho / gnorm) * grad) : Eigen::VectorXd::Zero(n);
        bool keep_rho = false;
        trust_pending = true;
        if (dx.squaredNorm() >= 0.25 * rho * rho) {
            const double predicted = -grad.dot(dx);
            if (eval.exhausted()) break;
            const double f = eval(base + dx);
            const double actual = fbase - f;

            double ratio = actual <= 0.0 ? 1.0 : 0.0;
            Eigen::Index jdrop = -1;
            for (Eigen::Index j = 0; j < n; ++j) {
                const double t = std::abs(simi.row(j).dot(dx));
                if (t > ratio) {
                    jdrop = j;
                    ratio = t;
                }
                sigbar(j) = t * vsig(j);
            }
            double edgmax = delta * rho;
            Eigen::Index far = -1;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (sigbar(j) >= parsig || sigbar(j) >= vsig(j)) {
                    const double t = actual > 0.0 ? (dx - sim.col(j)).norm() : veta(j);
                    if (t > edgmax) {
                        far = j;
                        edgmax = t;
                    }
                }
            }
            if (far >= 0) jdrop = far;
            if (jdrop >= 0) {
                detail::replace_vertex(sim, simi, jdrop, dx);
                fval(jdrop) = f;
                keep_rho = actual > 0.0 && actual >= 0.1 * predicted;
            }
        }
        if (keep_rho) continue;

        if (!acceptable) {
            trust_pending = false;
            continue;
        }
        if (rho > rho_end) {
            rho *= 0.5;
            if (rho <= 1.5 * rho_end) rho = rho_end;
            continue;
        }
        break;
    }
    return eval.result();
}

/// Runs `minimize` from `theta0`, then `restarts` more times from uniformly
/// random angles in [-pi, pi), each with the full budget. Returns the best run
/// with `evals` summed over all runs.
template <class Objective, class Rng>
MinimizeResult minimize_with_restarts(Objective&& objective, std::span<const double> theta0, const OptimizerBudget& budget,
                                      std::size_t restarts, Rng& rng) {
    MinimizeResult best = minimize(objective, theta0, budget);
    std::size_t total = best.evals;
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::vector<double> start(theta0.size());
    for (std::size_t r = 0; r < restarts && !theta0.empty(); ++r) {
        for (auto& a : start) a = angle(rng);
        auto run = minimize(objective, start, budget);
        total += run.evals;
        if (run.f < best.f) best = std::move(run);
    }
    best.evals = total;
    return best;
}

}  // namespace rlvqsd
