#include "rdlab/newton.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rdlab/kernels.hpp"

namespace rdlab::newton {

namespace {

void validate_state(const discretize::RDProblem& p, std::span<const double> u) {
    if (u.size() != p.grid.m_interior)
        throw std::invalid_argument("newton: state length does not match the grid");
    if (!kernels::all_finite(u))
        throw std::invalid_argument("newton: state has non-finite entries");
}

}  // namespace

std::vector<double> residual(const discretize::RDProblem& p, std::span<const double> u) {
    validate_state(p, u);
    auto built = discretize::build_operator(p);
    std::vector<double> g(u.size());
    kernels::tridiag_matvec(built.first.sub, built.first.diag, built.first.super, u, g);
    if (p.reaction.kind != discretize::ReactionKind::None) {
        const std::vector<double> r = discretize::reaction_eval(p.reaction, u);
        kernels::scaled_add2(g, 1.0, r, built.second.values, g);
    } else {
        kernels::scaled_add(g, 1.0, built.second.values, g);
    }
    return g;
}

linalg::TridiagonalMatrix jacobian(const discretize::RDProblem& p, std::span<const double> u) {
    validate_state(p, u);
    auto built = discretize::build_operator(p);
    linalg::TridiagonalMatrix j = std::move(built.first);
    if (p.reaction.kind != discretize::ReactionKind::None) {
        const std::vector<double> rp = discretize::reaction_derivative(p.reaction, u);
        for (std::size_t i = 0; i < j.size(); ++i) j.diag[i] += rp[i];
    }
    return j;
}

std::pair<std::vector<double>, NewtonTrace> newton_solve(const discretize::RDProblem& p,
                                                         std::span<const double> u0, double tol,
                                                         int max_iter) {
    validate_state(p, u0);
    if (!(tol > 0.0)) throw std::invalid_argument("newton: tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("newton: max_iter must be >= 1");

    // The operator does not change between iterations; only the reaction
    // diagonal does. Build once and patch the diagonal per iteration.
    auto built = discretize::build_operator(p);
    const linalg::TridiagonalMatrix& d = built.first;
    const std::vector<double>& b = built.second.values;
    const bool reacting = p.reaction.kind != discretize::ReactionKind::None;

    NewtonTrace trace;
    std::vector<double> u(u0.begin(), u0.end());
    trace.iterates.push_back(u);

    linalg::TridiagonalMatrix j = d;
    std::vector<double> g(u.size());
    for (int k = 1; k <= max_iter; ++k) {
        if (!kernels::all_finite(u))
            throw Diverged("newton_solve: iterate went non-finite at iteration " +
                           std::to_string(k - 1));
        if (kernels::inf_norm(u) > kDivergenceNorm)
            throw Diverged("newton_solve: iterate left the 1e8 ball at iteration " +
                           std::to_string(k - 1));

        kernels::tridiag_matvec(d.sub, d.diag, d.super, u, g);
        if (reacting) {
            const std::vector<double> r = discretize::reaction_eval(p.reaction, u);
            kernels::scaled_add2(g, 1.0, r, b, g);
            const std::vector<double> rp = discretize::reaction_derivative(p.reaction, u);
            for (std::size_t i = 0; i < u.size(); ++i) j.diag[i] = d.diag[i] + rp[i];
        } else {
            kernels::scaled_add(g, 1.0, b, g);
        }

        std::vector<double> update;
        try {
            update = linalg::thomas_solve(j, g);
        } catch (const ZeroPivot& e) {
            throw SingularJacobian(std::string("newton_solve: ") + e.what());
        }

        kernels::scaled_add(u, -1.0, update, u);
        const double err = kernels::inf_norm(update);
        trace.iterates.push_back(u);
        trace.errors.push_back(err);
        trace.iterations_used = k;
        if (err < tol) {
            trace.converged = true;
            break;
        }
    }

    for (std::size_t i = 0; i + 1 < trace.errors.size(); ++i)
        trace.order_estimates.push_back(std::log(trace.errors[i + 1]) /
                                        std::log(trace.errors[i]));
    return {std::move(u), std::move(trace)};
}

ConvergenceOrder order_of_convergence(std::span<const double> errors) {
    if (errors.size() < 2)
        throw std::invalid_argument("order_of_convergence: need at least 2 errors");
    for (const double e : errors)
        if (!(e > 0.0)) throw NonPositiveError("order_of_convergence: errors must be positive");

    ConvergenceOrder out;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        const double raw = std::log(errors[i + 1]) / std::log(errors[i]);
        out.raw.push_back(raw);
        if (errors[i] < 1.0 && std::isfinite(raw))
            out.rounded.emplace_back(static_cast<int>(std::lround(raw)));
        else
            out.rounded.emplace_back(std::nullopt);
    }
    return out;
}

SteadyStateClass classify_steady_state(std::span<const double> u, double noise_floor) {
    if (!kernels::all_finite(u))
        throw std::invalid_argument("classify_steady_state: state has non-finite entries");
    if (!(noise_floor >= 0.0))
        throw std::invalid_argument("classify_steady_state: noise floor must be >= 0");

    SteadyStateClass result;
    int previous_sign = 0;
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
        const double diff = u[i + 1] - u[i];
        if (std::fabs(diff) <= noise_floor) continue;
        const int sign = diff > 0.0 ? 1 : -1;
        if (previous_sign != 0 && sign != previous_sign) ++result.extremum_count;
        previous_sign = sign;
    }
    return result;
}

std::vector<SteadyStateClass> basin_scan(const discretize::RDProblem& p,
                                         std::span<const discretize::InitialConditionSpec> family) {
    if (family.empty()) throw std::invalid_argument("basin_scan: empty family");
    std::vector<SteadyStateClass> out;
    out.reserve(family.size());
    for (const auto& spec : family) {
        SteadyStateClass entry;
        try {
            const std::vector<double> u0 = discretize::initial_condition(p, spec);
            auto solved = newton_solve(p, u0);
            if (solved.second.converged)
                entry = classify_steady_state(solved.first);
            else
                entry.diverged = true;
        } catch (const std::exception&) {
            entry.diverged = true;
        }
        out.push_back(entry);
    }
    return out;
}

}  // namespace rdlab::newton
