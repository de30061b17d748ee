#include "rdlab/steppers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "rdlab/kernels.hpp"

namespace rdlab::steppers {

namespace {

constexpr double kBlowUpNorm = 1e12;
constexpr double kUnderflowFraction = 1e-14;

// ode23s-family constants: gamma makes the pair L-stable, e32 weights the
// third stage of the embedded error estimator.
const double kGamma = 1.0 / (2.0 + std::sqrt(2.0));
const double kE32 = 6.0 + std::sqrt(2.0);

struct System {
    linalg::TridiagonalMatrix d;
    std::vector<double> b;
    const discretize::RDProblem* p = nullptr;
};

System make_system(const discretize::RDProblem& p) {
    auto built = discretize::build_operator(p);
    return System{std::move(built.first), std::move(built.second.values), &p};
}

bool has_reaction(const System& s) {
    return s.p->reaction.kind != discretize::ReactionKind::None;
}

/// Right-hand side D u + R(u) + B of the semidiscrete system.
std::vector<double> flow(const System& s, std::span<const double> u) {
    std::vector<double> out(u.size());
    kernels::tridiag_matvec(s.d.sub, s.d.diag, s.d.super, u, out);
    if (has_reaction(s)) {
        const std::vector<double> r = discretize::reaction_eval(s.p->reaction, u);
        kernels::scaled_add2(out, 1.0, r, s.b, out);
    } else {
        kernels::scaled_add(out, 1.0, s.b, out);
    }
    return out;
}

/// I + coeff * D as a tridiagonal matrix.
linalg::TridiagonalMatrix shifted_identity(const linalg::TridiagonalMatrix& d, double coeff) {
    linalg::TridiagonalMatrix a;
    const std::size_t m = d.size();
    a.diag.resize(m);
    a.sub.resize(d.sub.size());
    a.super.resize(d.super.size());
    for (std::size_t i = 0; i < m; ++i) a.diag[i] = 1.0 + coeff * d.diag[i];
    for (std::size_t i = 0; i + 1 < m; ++i) {
        a.sub[i] = coeff * d.sub[i];
        a.super[i] = coeff * d.super[i];
    }
    return a;
}

bool state_ok(std::span<const double> u) {
    return kernels::all_finite(u) && kernels::inf_norm(u) <= kBlowUpNorm;
}

void check_compatible(const StepperKind& kind, const discretize::RDProblem& p) {
    if (kind.linear_only() && p.reaction.kind != discretize::ReactionKind::None)
        throw IncompatibleStepper(
            "stepper: linear-only scheme cannot integrate a reaction term");
}

void validate_state(const discretize::RDProblem& p, std::span<const double> u) {
    if (u.size() != p.grid.m_interior)
        throw std::invalid_argument("stepper: state length does not match the grid");
    if (!kernels::all_finite(u))
        throw std::invalid_argument("stepper: state has non-finite entries");
}

std::pair<std::vector<double>, double> rosenbrock_impl(const System& s,
                                                       std::span<const double> u, double h) {
    const std::size_t m = u.size();
    // W = I - h*gamma*J with J = D + diag(R'(u)).
    linalg::TridiagonalMatrix w = shifted_identity(s.d, -h * kGamma);
    if (has_reaction(s)) {
        const std::vector<double> rp = discretize::reaction_derivative(s.p->reaction, u);
        for (std::size_t i = 0; i < m; ++i) w.diag[i] -= h * kGamma * rp[i];
    }

    const std::vector<double> f0 = flow(s, u);
    const std::vector<double> k1 = linalg::thomas_solve(w, f0);

    std::vector<double> mid(m);
    kernels::scaled_add(u, 0.5 * h, k1, mid);
    const std::vector<double> f1 = flow(s, mid);

    std::vector<double> rhs(m);
    for (std::size_t i = 0; i < m; ++i) rhs[i] = f1[i] - k1[i];
    std::vector<double> k2 = linalg::thomas_solve(w, rhs);
    kernels::scaled_add(k2, 1.0, k1, k2);

    std::vector<double> y1(m);
    kernels::scaled_add(u, h, k2, y1);
    const std::vector<double> f2 = flow(s, y1);

    for (std::size_t i = 0; i < m; ++i)
        rhs[i] = f2[i] - kE32 * (k2[i] - f1[i]) - 2.0 * (k1[i] - f0[i]);
    const std::vector<double> k3 = linalg::thomas_solve(w, rhs);

    double err = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        err = std::max(err, std::fabs(k1[i] - 2.0 * k2[i] + k3[i]));
    err *= h / 6.0;
    return {std::move(y1), err};
}

std::vector<double> step_impl(const System& s, const StepperKind& kind,
                              std::span<const double> u, double dt) {
    const std::size_t m = u.size();
    switch (kind.scheme) {
        case Scheme::ForwardEuler: {
            const std::vector<double> f = flow(s, u);
            std::vector<double> next(m);
            kernels::scaled_add(u, dt, f, next);
            return next;
        }
        case Scheme::BackwardEulerLinear: {
            // (I - dt D) u_next = u + dt B
            std::vector<double> rhs(m);
            kernels::scaled_add(u, dt, s.b, rhs);
            return linalg::thomas_solve(shifted_identity(s.d, -dt), rhs);
        }
        case Scheme::CrankNicolsonLinear: {
            // (I - dt/2 D) u_next = (I + dt/2 D) u + dt B
            std::vector<double> du(m);
            kernels::tridiag_matvec(s.d.sub, s.d.diag, s.d.super, u, du);
            std::vector<double> rhs(m);
            kernels::scaled_add(u, 0.5 * dt, du, rhs);
            kernels::scaled_add(rhs, dt, s.b, rhs);
            return linalg::thomas_solve(shifted_identity(s.d, -0.5 * dt), rhs);
        }
        case Scheme::CrankNicolsonSemiImplicit: {
            // (I - dt/2 D) u_next = u + dt/2 D u + dt (R(u) + B)
            std::vector<double> du(m);
            kernels::tridiag_matvec(s.d.sub, s.d.diag, s.d.super, u, du);
            std::vector<double> rhs(m);
            kernels::scaled_add(u, 0.5 * dt, du, rhs);
            const std::vector<double> r = discretize::reaction_eval(s.p->reaction, u);
            kernels::scaled_add2(rhs, dt, r, s.b, rhs);
            return linalg::thomas_solve(shifted_identity(s.d, -0.5 * dt), rhs);
        }
        case Scheme::CrankNicolsonImprovedEuler: {
            // Explicit predictor, then trapezoidal corrector.
            const std::vector<double> f0 = flow(s, u);
            std::vector<double> pred(m);
            kernels::scaled_add(u, dt, f0, pred);
            const std::vector<double> f1 = flow(s, pred);
            std::vector<double> next(m);
            kernels::scaled_add2(u, 0.5 * dt, f0, f1, next);
            return next;
        }
        case Scheme::Rosenbrock:
            return rosenbrock_impl(s, u, dt).first;
    }
    throw std::invalid_argument("stepper: unknown scheme");
}

/// Pointwise factor g with R(u) = g(u) * u, used to fold the reaction into
/// the two-level matrix exactly at the linearization state.
std::vector<double> reaction_factor(const discretize::ReactionSpec& r,
                                    std::span<const double> u) {
    std::vector<double> g(u.size(), 0.0);
    switch (r.kind) {
        case discretize::ReactionKind::None:
            break;
        case discretize::ReactionKind::Logistic:
            for (std::size_t i = 0; i < u.size(); ++i) g[i] = r.rate * (1.0 - u[i]);
            break;
        case discretize::ReactionKind::FitzHughNagumo:
            for (std::size_t i = 0; i < u.size(); ++i)
                g[i] = r.rate * (u[i] - r.threshold) * (1.0 - u[i]);
            break;
    }
    return g;
}

linalg::DenseMatrix matmul(const linalg::DenseMatrix& a, const linalg::DenseMatrix& b) {
    const std::size_t m = a.size();
    linalg::DenseMatrix out(m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < m; ++k) {
            const double aik = a.at(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < m; ++j) out.at(i, j) += aik * b.at(k, j);
        }
    return out;
}

std::vector<double> matvec(const linalg::DenseMatrix& a, std::span<const double> x) {
    const std::size_t m = a.size();
    std::vector<double> out(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) acc += a.at(i, j) * x[j];
        out[i] = acc;
    }
    return out;
}

/// Columns of A^{-1} P for tridiagonal A and P, via one solve per column.
linalg::DenseMatrix solve_columns(const linalg::TridiagonalMatrix& a,
                                  const linalg::DenseMatrix& p) {
    const std::size_t m = p.size();
    linalg::DenseMatrix out(m);
    std::vector<double> col(m);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < m; ++i) col[i] = p.at(i, j);
        const std::vector<double> sol = linalg::thomas_solve(a, col);
        for (std::size_t i = 0; i < m; ++i) out.at(i, j) = sol[i];
    }
    return out;
}

}  // namespace

StepperKind StepperKind::forward_euler() noexcept { return {Scheme::ForwardEuler, false, 0, 0}; }
StepperKind StepperKind::backward_euler_linear() noexcept {
    return {Scheme::BackwardEulerLinear, false, 0, 0};
}
StepperKind StepperKind::crank_nicolson_linear() noexcept {
    return {Scheme::CrankNicolsonLinear, false, 0, 0};
}
StepperKind StepperKind::crank_nicolson_semi_implicit() noexcept {
    return {Scheme::CrankNicolsonSemiImplicit, false, 0, 0};
}
StepperKind StepperKind::crank_nicolson_improved_euler() noexcept {
    return {Scheme::CrankNicolsonImprovedEuler, false, 0, 0};
}

StepperKind StepperKind::rosenbrock(bool adaptive, double rtol, double atol) {
    if (!(rtol > 0.0) || !(atol > 0.0) || !std::isfinite(rtol) || !std::isfinite(atol))
        throw std::invalid_argument("stepper: tolerances must be positive");
    return {Scheme::Rosenbrock, adaptive, rtol, atol};
}

bool StepperKind::linear_only() const noexcept {
    return scheme == Scheme::BackwardEulerLinear || scheme == Scheme::CrankNicolsonLinear;
}

std::vector<double> step(const StepperKind& kind, const discretize::RDProblem& p,
                         std::span<const double> u, double dt) {
    validate_state(p, u);
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("stepper: dt must be positive and finite");
    check_compatible(kind, p);
    const System s = make_system(p);
    std::vector<double> next = step_impl(s, kind, u, dt);
    if (!state_ok(next)) throw BlowUp("step: update left the 1e12 ball or went non-finite");
    return next;
}

Trajectory evolve(const StepperKind& kind, const discretize::RDProblem& p,
                  std::span<const double> u0, double dt, double t_end) {
    if (kind.scheme == Scheme::Rosenbrock && kind.adaptive)
        return adaptive_evolve(p, u0, kind.rtol, kind.atol, t_end);

    validate_state(p, u0);
    if (!std::isfinite(t_end) || t_end < 0.0)
        throw std::invalid_argument("evolve: t_end must be finite and >= 0");
    check_compatible(kind, p);

    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.emplace_back(u0.begin(), u0.end());
    if (t_end == 0.0) return traj;

    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("evolve: dt must be positive and finite");
    const double ratio = t_end / dt;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::fabs(ratio - rounded) > 1e-9)
        throw std::invalid_argument("evolve: dt must divide t_end");
    const auto steps = static_cast<std::size_t>(rounded);

    const System s = make_system(p);
    std::vector<double> u(u0.begin(), u0.end());
    for (std::size_t i = 1; i <= steps; ++i) {
        u = step_impl(s, kind, u, dt);
        const bool ok = state_ok(u);
        traj.times.push_back(static_cast<double>(i) * dt);
        traj.states.push_back(u);
        traj.step_sizes.push_back(dt);
        if (!ok) {
            // Build the message before std::move(traj): evaluation order of the
            // two constructor arguments is unspecified.
            std::string what = "evolve: instability at t = " + std::to_string(traj.times.back());
            throw BlowUp(what, std::move(traj));
        }
    }
    return traj;
}

std::pair<std::vector<double>, double> rosenbrock_step(const discretize::RDProblem& p,
                                                       std::span<const double> u, double dt) {
    validate_state(p, u);
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("stepper: dt must be positive and finite");
    const System s = make_system(p);
    auto result = rosenbrock_impl(s, u, dt);
    if (!state_ok(result.first))
        throw BlowUp("rosenbrock_step: update left the 1e12 ball or went non-finite");
    return result;
}

Trajectory adaptive_evolve(const discretize::RDProblem& p, std::span<const double> u0,
                           double rtol, double atol, double t_end) {
    validate_state(p, u0);
    if (!(rtol > 0.0) || !(atol > 0.0) || !std::isfinite(rtol) || !std::isfinite(atol))
        throw std::invalid_argument("adaptive_evolve: tolerances must be positive");
    if (!std::isfinite(t_end) || t_end < 0.0)
        throw std::invalid_argument("adaptive_evolve: t_end must be finite and >= 0");

    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.emplace_back(u0.begin(), u0.end());
    if (t_end == 0.0) return traj;

    const System s = make_system(p);
    std::vector<double> u(u0.begin(), u0.end());
    const double hmax = t_end / 10.0;
    double h = std::min(hmax, 1e-3 * t_end);
    double t = 0.0;

    while (t < t_end) {
        const double remaining = t_end - t;
        bool final_step = false;
        if (h >= remaining) {
            h = remaining;
            final_step = true;
        }
        if (h < kUnderflowFraction * t_end)
            throw StepUnderflow("adaptive_evolve: step size underflow at t = " +
                                    std::to_string(t),
                                std::move(traj));

        // A failed trial (singular W, non-finite result) is a rejection, not
        // a fatal blow-up: shrinking h always restores a solvable step.
        std::vector<double> trial;
        double err = std::numeric_limits<double>::infinity();
        bool trial_ok = false;
        try {
            auto attempt = rosenbrock_impl(s, u, h);
            trial = std::move(attempt.first);
            err = attempt.second;
            trial_ok = kernels::all_finite(trial) && std::isfinite(err);
        } catch (const ZeroPivot&) {
            trial_ok = false;
        }

        const double tol = atol + rtol * kernels::inf_norm(u);
        if (trial_ok && err <= tol) {
            u = std::move(trial);
            t = final_step ? t_end : t + h;
            traj.times.push_back(t);
            traj.states.push_back(u);
            traj.step_sizes.push_back(h);
            if (kernels::inf_norm(u) > kBlowUpNorm)
                throw BlowUp("adaptive_evolve: state escaped the 1e12 ball at t = " +
                                 std::to_string(t),
                             std::move(traj));
        }

        double factor;
        if (!trial_ok)
            factor = 0.2;
        else if (err == 0.0)
            factor = 5.0;
        else
            factor = std::clamp(0.9 * std::cbrt(tol / err), 0.2, 5.0);
        h = std::min(h * factor, hmax);
    }
    return traj;
}

TwoLevelForm two_level_form(const StepperKind& kind, const discretize::RDProblem& p,
                            std::span<const double> u_current, double dt) {
    if (kind.scheme == Scheme::Rosenbrock)
        throw Unsupported("two_level_form: the Rosenbrock integrator is not a two-level map");
    validate_state(p, u_current);
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("two_level_form: dt must be positive and finite");
    check_compatible(kind, p);

    const System s = make_system(p);
    const std::size_t m = u_current.size();
    TwoLevelForm form;

    switch (kind.scheme) {
        case Scheme::ForwardEuler: {
            // M = I + dt (D + diag(g)), N = dt B
            const std::vector<double> g = reaction_factor(s.p->reaction, u_current);
            form.m = linalg::DenseMatrix::identity(m);
            for (std::size_t i = 0; i < m; ++i) {
                form.m.at(i, i) += dt * (s.d.diag[i] + g[i]);
                if (i > 0) form.m.at(i, i - 1) += dt * s.d.sub[i - 1];
                if (i + 1 < m) form.m.at(i, i + 1) += dt * s.d.super[i];
            }
            form.n.resize(m);
            for (std::size_t i = 0; i < m; ++i) form.n[i] = dt * s.b[i];
            break;
        }
        case Scheme::BackwardEulerLinear: {
            // M = (I - dt D)^{-1}, N = M (dt B), realized column by column.
            const linalg::TridiagonalMatrix a = shifted_identity(s.d, -dt);
            form.m = solve_columns(a, linalg::DenseMatrix::identity(m));
            std::vector<double> rhs(m);
            for (std::size_t i = 0; i < m; ++i) rhs[i] = dt * s.b[i];
            form.n = linalg::thomas_solve(a, rhs);
            break;
        }
        case Scheme::CrankNicolsonLinear:
        case Scheme::CrankNicolsonSemiImplicit: {
            // M = (I - dt/2 D)^{-1} (I + dt/2 D + dt diag(g)), N = (I - dt/2 D)^{-1} dt B
            const linalg::TridiagonalMatrix a = shifted_identity(s.d, -0.5 * dt);
            linalg::DenseMatrix rhs_m =
                linalg::DenseMatrix::from_tridiagonal(shifted_identity(s.d, 0.5 * dt));
            if (kind.scheme == Scheme::CrankNicolsonSemiImplicit) {
                const std::vector<double> g = reaction_factor(s.p->reaction, u_current);
                for (std::size_t i = 0; i < m; ++i) rhs_m.at(i, i) += dt * g[i];
            }
            form.m = solve_columns(a, rhs_m);
            std::vector<double> rhs(m);
            for (std::size_t i = 0; i < m; ++i) rhs[i] = dt * s.b[i];
            form.n = linalg::thomas_solve(a, rhs);
            break;
        }
        case Scheme::CrankNicolsonImprovedEuler: {
            // Predictor P = I + dt (D + diag(g0)), q = dt B; with g* at the
            // predicted state, M = I + dt/2 (D + diag(g0)) + T P and
            // N = T q + dt B where T = dt/2 (D + diag(g*)).
            const std::vector<double> g0 = reaction_factor(s.p->reaction, u_current);
            linalg::DenseMatrix pm = linalg::DenseMatrix::identity(m);
            for (std::size_t i = 0; i < m; ++i) {
                pm.at(i, i) += dt * (s.d.diag[i] + g0[i]);
                if (i > 0) pm.at(i, i - 1) += dt * s.d.sub[i - 1];
                if (i + 1 < m) pm.at(i, i + 1) += dt * s.d.super[i];
            }
            std::vector<double> q(m);
            for (std::size_t i = 0; i < m; ++i) q[i] = dt * s.b[i];
            std::vector<double> predicted = matvec(pm, u_current);
            kernels::scaled_add(predicted, 1.0, q, predicted);
            const std::vector<double> g1 = reaction_factor(s.p->reaction, predicted);

            linalg::DenseMatrix t_m(m);
            for (std::size_t i = 0; i < m; ++i) {
                t_m.at(i, i) = 0.5 * dt * (s.d.diag[i] + g1[i]);
                if (i > 0) t_m.at(i, i - 1) = 0.5 * dt * s.d.sub[i - 1];
                if (i + 1 < m) t_m.at(i, i + 1) = 0.5 * dt * s.d.super[i];
            }

            form.m = matmul(t_m, pm);
            for (std::size_t i = 0; i < m; ++i) {
                form.m.at(i, i) += 1.0 + 0.5 * dt * (s.d.diag[i] + g0[i]);
                if (i > 0) form.m.at(i, i - 1) += 0.5 * dt * s.d.sub[i - 1];
                if (i + 1 < m) form.m.at(i, i + 1) += 0.5 * dt * s.d.super[i];
            }
            form.n = matvec(t_m, q);
            kernels::scaled_add(form.n, 1.0, q, form.n);
            break;
        }
        case Scheme::Rosenbrock:
            break;  // unreachable, handled above
    }
    return form;
}

}  // namespace rdlab::steppers
