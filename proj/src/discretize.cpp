#include "rdlab/discretize.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "rdlab/kernels.hpp"

namespace rdlab::discretize {

namespace {

void validate_problem(const RDProblem& p) {
    if (p.grid.m_interior < 1 || p.grid.dx <= 0.0 || p.grid.length <= 0.0)
        throw std::invalid_argument("problem: grid not initialized");
    if (!std::isfinite(p.diffusion) || p.diffusion <= 0.0)
        throw std::invalid_argument("problem: diffusion must be positive");
    if (!std::isfinite(p.bc.left) || !std::isfinite(p.bc.right))
        throw std::invalid_argument("problem: boundary values must be finite");
    if (!std::isfinite(p.frame_speed) || p.frame_speed < 0.0)
        throw std::invalid_argument("problem: frame speed must be >= 0");
}

/// Deterministic standard-normal stream. std::normal_distribution's algorithm
/// is implementation-defined, so seeded configs would not replay across
/// toolchains; Box-Muller over the raw mt19937_64 stream is pinned instead.
std::vector<double> normal_stream(std::uint64_t seed, std::size_t n) {
    std::mt19937_64 eng(seed);
    auto unit = [&eng] { return static_cast<double>(eng() >> 11) * 0x1.0p-53; };
    std::vector<double> z(n);
    std::size_t i = 0;
    while (i < n) {
        double u1 = unit();
        while (u1 <= 0.0) u1 = unit();
        const double u2 = unit();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        z[i++] = radius * std::cos(angle);
        if (i < n) z[i++] = radius * std::sin(angle);
    }
    return z;
}

}  // namespace

Grid1D Grid1D::make(double length, double dx) {
    if (!std::isfinite(length) || !std::isfinite(dx) || length <= 0.0 || dx <= 0.0)
        throw InvalidGrid("grid: length and dx must be positive and finite");
    const double ratio = length / dx;
    const double cells = std::round(ratio);
    if (std::fabs(ratio - cells) > 1e-9)
        throw InvalidGrid("grid: dx must tile the domain exactly");
    if (cells < 2.0) throw InvalidGrid("grid: need at least one interior node");
    Grid1D g;
    g.length = length;
    g.dx = dx;
    g.m_interior = static_cast<std::size_t>(cells) - 1;
    g.x.resize(g.m_interior);
    for (std::size_t j = 0; j < g.m_interior; ++j) g.x[j] = static_cast<double>(j + 1) * dx;
    return g;
}

ReactionSpec ReactionSpec::none() noexcept { return {}; }

ReactionSpec ReactionSpec::logistic(double rate) {
    if (!std::isfinite(rate) || rate < 0.0)
        throw std::invalid_argument("reaction: rate must be finite and >= 0");
    ReactionSpec r;
    r.kind = ReactionKind::Logistic;
    r.rate = rate;
    return r;
}

ReactionSpec ReactionSpec::fitzhugh_nagumo(double rate, double threshold) {
    if (!std::isfinite(rate) || rate < 0.0)
        throw std::invalid_argument("reaction: rate must be finite and >= 0");
    if (!std::isfinite(threshold) || threshold <= 0.0 || threshold >= 1.0)
        throw std::invalid_argument("reaction: threshold must lie strictly inside (0,1)");
    ReactionSpec r;
    r.kind = ReactionKind::FitzHughNagumo;
    r.rate = rate;
    r.threshold = threshold;
    return r;
}

std::vector<double> ReactionSpec::equilibria() const {
    switch (kind) {
        case ReactionKind::None:
            return {};
        case ReactionKind::Logistic:
            return {0.0, 1.0};
        case ReactionKind::FitzHughNagumo:
            return {0.0, threshold, 1.0};
    }
    return {};
}

InitialConditionSpec InitialConditionSpec::polynomial_fit(int degree, double interior_value) {
    if (degree < 1) throw std::invalid_argument("initial condition: degree must be >= 1");
    if (!std::isfinite(interior_value))
        throw std::invalid_argument("initial condition: anchor height must be finite");
    InitialConditionSpec s;
    s.kind = InitialConditionKind::PolynomialFit;
    s.degree = degree;
    s.interior_value = interior_value;
    return s;
}

InitialConditionSpec InitialConditionSpec::sine_mode(int mode) {
    if (mode < 1) throw std::invalid_argument("initial condition: mode must be >= 1");
    InitialConditionSpec s;
    s.kind = InitialConditionKind::SineMode;
    s.mode = mode;
    return s;
}

InitialConditionSpec InitialConditionSpec::explicit_values(std::vector<double> values) {
    if (!kernels::all_finite(values))
        throw std::invalid_argument("initial condition: explicit values must be finite");
    InitialConditionSpec s;
    s.kind = InitialConditionKind::ExplicitValues;
    s.values = std::move(values);
    return s;
}

InitialConditionSpec InitialConditionSpec::perturbed(InitialConditionSpec base,
                                                     std::uint64_t seed, double amplitude) {
    if (!std::isfinite(amplitude) || amplitude < 0.0)
        throw std::invalid_argument("initial condition: amplitude must be >= 0");
    if (base.kind == InitialConditionKind::Perturbed && !base.base)
        throw std::invalid_argument("initial condition: perturbed base is incomplete");
    InitialConditionSpec s;
    s.kind = InitialConditionKind::Perturbed;
    s.base = std::make_shared<const InitialConditionSpec>(std::move(base));
    s.seed = seed;
    s.amplitude = amplitude;
    return s;
}

std::pair<linalg::TridiagonalMatrix, BoundaryVector> build_operator(const RDProblem& p) {
    validate_problem(p);
    const std::size_t m = p.grid.m_interior;
    if (m < 1) throw InvalidGrid("build_operator: grid has no interior nodes");
    const double w = p.diffusion / (p.grid.dx * p.grid.dx);

    linalg::TridiagonalMatrix d;
    d.diag.assign(m, -2.0 * w);
    d.sub.assign(m - 1, w);
    d.super.assign(m - 1, w);

    BoundaryVector b;
    b.values.assign(m, 0.0);
    b.values.front() += w * p.bc.left;
    b.values.back() += w * p.bc.right;

    if (p.frame_speed > 0.0) {
        // Transport term c*u_z of the moving-frame equation, backward
        // difference: c/dx on the diagonal, -c/dx on the sub-diagonal, and
        // the left boundary sample folded into B's first entry.
        const double adv = p.frame_speed / p.grid.dx;
        for (auto& v : d.diag) v += adv;
        for (auto& v : d.sub) v -= adv;
        b.values.front() -= adv * p.bc.left;
    }
    return {std::move(d), std::move(b)};
}

std::vector<double> reaction_eval(const ReactionSpec& r, std::span<const double> u) {
    std::vector<double> out(u.size(), 0.0);
    switch (r.kind) {
        case ReactionKind::None:
            break;
        case ReactionKind::Logistic:
            kernels::logistic_eval(r.rate, u, out);
            break;
        case ReactionKind::FitzHughNagumo:
            kernels::bistable_eval(r.rate, r.threshold, u, out);
            break;
    }
    return out;
}

std::vector<double> reaction_derivative(const ReactionSpec& r, std::span<const double> u) {
    std::vector<double> out(u.size(), 0.0);
    switch (r.kind) {
        case ReactionKind::None:
            break;
        case ReactionKind::Logistic:
            kernels::logistic_deriv(r.rate, u, out);
            break;
        case ReactionKind::FitzHughNagumo:
            kernels::bistable_deriv(r.rate, r.threshold, u, out);
            break;
    }
    return out;
}

std::vector<double> initial_condition(const RDProblem& p, const InitialConditionSpec& spec) {
    validate_problem(p);
    const Grid1D& g = p.grid;
    switch (spec.kind) {
        case InitialConditionKind::PolynomialFit: {
            if (spec.degree < 1)
                throw std::invalid_argument("initial condition: degree must be >= 1");
            const std::size_t interior_anchors = static_cast<std::size_t>(spec.degree) - 1;
            if (static_cast<std::size_t>(spec.degree) + 1 > interior_anchors + 2)
                throw DegreeTooHigh("initial condition: degree exceeds available anchors");
            const std::size_t count = static_cast<std::size_t>(spec.degree) + 1;
            std::vector<double> node(count), coef(count);
            node.front() = 0.0;
            coef.front() = p.bc.left;
            for (std::size_t i = 1; i < count - 1; ++i) {
                node[i] = static_cast<double>(i) * g.length / spec.degree;
                coef[i] = spec.interior_value;
            }
            node.back() = g.length;
            coef.back() = p.bc.right;
            // Newton divided differences, then nested evaluation at the nodes.
            for (std::size_t j = 1; j < count; ++j)
                for (std::size_t i = count; i-- > j;)
                    coef[i] = (coef[i] - coef[i - 1]) / (node[i] - node[i - j]);
            std::vector<double> out(g.m_interior);
            for (std::size_t m = 0; m < g.m_interior; ++m) {
                double acc = coef[count - 1];
                for (std::size_t k = count - 1; k-- > 0;)
                    acc = acc * (g.x[m] - node[k]) + coef[k];
                out[m] = acc;
            }
            return out;
        }
        case InitialConditionKind::SineMode: {
            if (spec.mode < 1)
                throw std::invalid_argument("initial condition: mode must be >= 1");
            std::vector<double> out(g.m_interior);
            for (std::size_t m = 0; m < g.m_interior; ++m)
                out[m] = std::sin(spec.mode * std::numbers::pi * g.x[m] / g.length);
            return out;
        }
        case InitialConditionKind::ExplicitValues: {
            if (spec.values.size() != g.m_interior)
                throw std::invalid_argument(
                    "initial condition: explicit values need one entry per interior node (" +
                    std::to_string(g.m_interior) + ")");
            return spec.values;
        }
        case InitialConditionKind::Perturbed: {
            if (!spec.base)
                throw std::invalid_argument("initial condition: perturbed spec has no base");
            if (!std::isfinite(spec.amplitude) || spec.amplitude < 0.0)
                throw std::invalid_argument("initial condition: amplitude must be >= 0");
            std::vector<double> out = initial_condition(p, *spec.base);
            if (spec.amplitude > 0.0) {
                const std::vector<double> z = normal_stream(spec.seed, g.m_interior);
                for (std::size_t m = 0; m < g.m_interior; ++m) out[m] += spec.amplitude * z[m];
            }
            return out;
        }
    }
    throw std::invalid_argument("initial condition: unknown kind");
}

std::vector<double> linear_boundary_profile(const RDProblem& p) {
    validate_problem(p);
    std::vector<double> out(p.grid.m_interior);
    const double slope = (p.bc.right - p.bc.left) / p.grid.length;
    for (std::size_t m = 0; m < p.grid.m_interior; ++m)
        out[m] = p.bc.left + slope * p.grid.x[m];
    return out;
}

std::vector<std::vector<double>> limiting_steady_states(const RDProblem& p) {
    std::vector<std::vector<double>> out;
    out.push_back(linear_boundary_profile(p));
    for (const double level : p.reaction.equilibria())
        out.emplace_back(p.grid.m_interior, level);
    return out;
}

}  // namespace rdlab::discretize
