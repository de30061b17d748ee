#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "rdlab/discretize.hpp"
#include "rdlab/errors.hpp"
#include "rdlab/kernels.hpp"
#include "rdlab/linalg.hpp"
#include "rdlab/newton.hpp"

namespace dz = rdlab::discretize;
namespace nt = rdlab::newton;
namespace kn = rdlab::kernels;

namespace {

dz::RDProblem make_problem(double length, double dx, double left, double right,
                           double diffusion = 1.0,
                           dz::ReactionSpec reaction = dz::ReactionSpec::none()) {
    dz::RDProblem p;
    p.grid = dz::Grid1D::make(length, dx);
    p.bc = {left, right};
    p.diffusion = diffusion;
    p.reaction = reaction;
    return p;
}

dz::RDProblem default_fisher() {
    return make_problem(10.0, 0.05, 0.0, 1.0, 1.0, dz::ReactionSpec::logistic(1.0));
}

std::vector<double> default_initial(const dz::RDProblem& p) {
    return dz::initial_condition(p, dz::InitialConditionSpec::polynomial_fit(2, 1.0 / 3.0));
}

}  // namespace

TEST_CASE("residual hand case on a three-node grid") {
    const auto p = make_problem(2.0, 0.5, 0.0, 1.0, 1.0, dz::ReactionSpec::logistic(1.0));
    const std::vector<double> u(3, 0.5);
    const auto g = nt::residual(p, u);
    REQUIRE(g.size() == 3);
    CHECK(g[0] == doctest::Approx(-1.75).epsilon(1e-14));
    CHECK(g[1] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(g[2] == doctest::Approx(2.25).epsilon(1e-14));
}

TEST_CASE("known steady states have vanishing residuals") {
    SUBCASE("linear boundary profile under pure diffusion") {
        const auto p = make_problem(10.0, 0.05, 0.0, 1.0);
        CHECK(kn::inf_norm(nt::residual(p, dz::linear_boundary_profile(p))) <= 1e-12);
    }
    SUBCASE("zero state with zero boundaries is exactly stationary") {
        const auto p = make_problem(10.0, 0.05, 0.0, 0.0, 1.0, dz::ReactionSpec::logistic(1.0));
        const std::vector<double> zero(p.grid.m_interior, 0.0);
        CHECK(kn::inf_norm(nt::residual(p, zero)) == 0.0);
    }
}

TEST_CASE("the Jacobian is the operator plus the reaction slope") {
    SUBCASE("no reaction leaves the operator untouched") {
        const auto p = make_problem(10.0, 0.05, 0.0, 1.0, 2.0);
        const auto [d, b] = dz::build_operator(p);
        std::vector<double> u(p.grid.m_interior, 0.7);
        const auto j = nt::jacobian(p, u);
        CHECK(j.diag == d.diag);
        CHECK(j.sub == d.sub);
        CHECK(j.super == d.super);
    }
    SUBCASE("logistic slope vanishes at one half") {
        const auto p = default_fisher();
        const auto [d, b] = dz::build_operator(p);
        const std::vector<double> u(p.grid.m_interior, 0.5);
        const auto j = nt::jacobian(p, u);
        CHECK(j.diag == d.diag);
    }
    SUBCASE("columns match a centered difference of the residual") {
        const auto p = default_fisher();
        std::mt19937_64 eng(808);
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        std::vector<double> u(p.grid.m_interior);
        for (double& x : u) x = dist(eng);
        const auto j = nt::jacobian(p, u);
        const double h = 1e-5;
        std::uniform_int_distribution<std::size_t> pick(0, u.size() - 1);
        for (int trial = 0; trial < 8; ++trial) {
            const std::size_t col = pick(eng);
            auto up = u, um = u;
            up[col] += h;
            um[col] -= h;
            const auto gp = nt::residual(p, up);
            const auto gm = nt::residual(p, um);
            for (std::size_t row = 0; row < u.size(); ++row) {
                double want = 0.0;
                if (row == col) want = j.diag[row];
                else if (row + 1 == col) want = j.super[row];
                else if (row == col + 1) want = j.sub[row - 1];
                CHECK(std::fabs((gp[row] - gm[row]) / (2.0 * h) - want) <= 1e-6);
            }
        }
    }
}

TEST_CASE("a linear problem is solved in a single update") {
    const auto p = make_problem(10.0, 0.05, 0.0, 1.0);
    const auto [d, b] = dz::build_operator(p);
    std::vector<double> neg_b(b.values.size());
    for (std::size_t i = 0; i < neg_b.size(); ++i) neg_b[i] = -b.values[i];
    const auto u_star = rdlab::linalg::thomas_solve(d, neg_b);

    std::mt19937_64 eng(17);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> u0(p.grid.m_interior);
    for (double& x : u0) x = dist(eng);

    const auto [sol, trace] = nt::newton_solve(p, u0);
    REQUIRE(trace.iterates.size() >= 2);
    CHECK(kn::inf_norm_diff(trace.iterates[1], u_star) <= 1e-10);
    REQUIRE(trace.errors.size() >= 2);
    CHECK(trace.errors[1] <= 1e-12);
}

TEST_CASE("quadratic convergence on the default reaction problem") {
    const auto p = default_fisher();
    const auto [sol, trace] = nt::newton_solve(p, default_initial(p));

    CHECK(trace.converged);
    CHECK(trace.iterations_used == 10);
    REQUIRE(trace.errors.size() == 10);

    // update norms frozen from a converged run of this build; the tail is
    // checked against independently tabulated values below
    const std::vector<double> frozen{
        1.542128983194e+00, 8.153717455633e-01, 1.127203063774e+00, 5.478891552272e-01,
        2.285337673060e-01, 3.574994464358e-02, 1.149858838634e-03, 1.049864374601e-06,
        1.302297046485e-12, 2.081005663351e-15};
    for (std::size_t i = 0; i + 1 < frozen.size(); ++i)
        CHECK(trace.errors[i] == doctest::Approx(frozen[i]).epsilon(1e-9));
    CHECK(trace.errors[9] == doctest::Approx(frozen[9]).epsilon(1e-6));
    CHECK(trace.errors[9] < nt::kDefaultTolerance);

    // independently tabulated update norms for this configuration
    const std::vector<double> reference{1.5421,     0.81537,    1.1272,     0.54789,   0.22853,
                                        3.5750e-02, 1.1499e-03, 1.0499e-06, 1.3032e-12};
    for (std::size_t i = 0; i < reference.size(); ++i)
        CHECK(trace.errors[i] == doctest::Approx(reference[i]).epsilon(1e-3));

    // the resolvable tail of the order estimates settles at 2
    const auto order = nt::order_of_convergence(trace.errors);
    REQUIRE(order.raw.size() == 9);
    CHECK(order.raw[5] == doctest::Approx(2.0317).epsilon(1e-3));
    CHECK(order.raw[6] == doctest::Approx(2.0341).epsilon(1e-3));
    CHECK(order.raw[7] == doctest::Approx(1.9878).epsilon(1e-3));
    for (std::size_t i : {std::size_t{5}, std::size_t{6}, std::size_t{7}}) {
        REQUIRE(order.rounded[i].has_value());
        CHECK(*order.rounded[i] == 2);
    }

    CHECK(kn::inf_norm(nt::residual(p, sol)) <= 1e-12);
}

TEST_CASE("order_of_convergence") {
    SUBCASE("clean quadratic sequence") {
        const auto o = nt::order_of_convergence(std::vector<double>{0.1, 0.01, 0.0001});
        REQUIRE(o.raw.size() == 2);
        CHECK(o.raw[0] == doctest::Approx(2.0));
        CHECK(o.raw[1] == doctest::Approx(2.0));
        CHECK(*o.rounded[0] == 2);
        CHECK(*o.rounded[1] == 2);
    }
    SUBCASE("no rounding is offered when the base error is one or larger") {
        const auto o = nt::order_of_convergence(std::vector<double>{1.5421, 0.81537});
        REQUIRE(o.raw.size() == 1);
        CHECK_FALSE(o.rounded[0].has_value());
    }
    SUBCASE("a single error carries no ratio to estimate from") {
        CHECK_THROWS_AS((void)nt::order_of_convergence(std::vector<double>{0.5}),
                        const std::invalid_argument&);
    }
    SUBCASE("nonpositive errors are rejected") {
        CHECK_THROWS_AS((void)nt::order_of_convergence(std::vector<double>{0.1, 0.0}),
                        const rdlab::NonPositiveError&);
        CHECK_THROWS_AS((void)nt::order_of_convergence(std::vector<double>{-1.0, 0.5}),
                        const rdlab::NonPositiveError&);
    }
}

TEST_CASE("steady-state classification counts interior extrema") {
    const auto p = make_problem(10.0, 0.05, 0.0, 1.0);
    SUBCASE("monotone ramp") {
        const auto c = nt::classify_steady_state(dz::linear_boundary_profile(p));
        CHECK(c.extremum_count == 0);
        CHECK_FALSE(c.diverged);
    }
    SUBCASE("single and double humps") {
        const auto one =
            nt::classify_steady_state(dz::initial_condition(p, dz::InitialConditionSpec::sine_mode(1)));
        CHECK(one.extremum_count == 1);
        const auto two =
            nt::classify_steady_state(dz::initial_condition(p, dz::InitialConditionSpec::sine_mode(2)));
        CHECK(two.extremum_count == 2);
    }
    SUBCASE("sub-noise wiggles are ignored") {
        // A flat profile plus alternating 1e-12 dust: every first difference
        // flips sign, but all of them sit below the default noise floor.
        std::vector<double> flat(21, 0.5);
        for (std::size_t i = 0; i < flat.size(); ++i) flat[i] += (i % 2 ? 1e-12 : -1e-12);
        CHECK(nt::classify_steady_state(flat).extremum_count == 0);
        CHECK(nt::classify_steady_state(flat, 0.0).extremum_count > 10);
    }
}

TEST_CASE("divergence guard") {
    const auto p = default_fisher();
    const std::vector<double> far(p.grid.m_interior, 1e9);
    CHECK_THROWS_AS((void)nt::newton_solve(p, far), const rdlab::Diverged&);
}

TEST_CASE("a huge constant start is pulled back by the quadratic reaction") {
    // G ~ -rho u^2 and J ~ -2 rho u for large u, so each update halves the
    // state; the iteration re-enters the basin and converges well inside the
    // iteration budget.
    const auto p = default_fisher();
    const std::vector<double> big(p.grid.m_interior, 1e6);
    const auto [sol, trace] = nt::newton_solve(p, big);
    CHECK(trace.converged);
    CHECK(trace.iterations_used < nt::kDefaultMaxIterations);
    CHECK(kn::inf_norm(nt::residual(p, sol)) <= 1e-10);
}

TEST_CASE("starting on the root converges immediately") {
    const auto p = make_problem(10.0, 0.05, 0.0, 0.0, 1.0, dz::ReactionSpec::logistic(1.0));
    const std::vector<double> zero(p.grid.m_interior, 0.0);
    const auto [sol, trace] = nt::newton_solve(p, zero);
    CHECK(trace.converged);
    CHECK(trace.iterations_used == 1);
    CHECK(kn::inf_norm(sol) == 0.0);
}

TEST_CASE("basin scans match direct solves member by member") {
    const auto p = make_problem(10.0, 0.05, 0.0, 0.0, 1.0, dz::ReactionSpec::logistic(1.0));
    const std::vector<dz::InitialConditionSpec> family{
        dz::InitialConditionSpec::sine_mode(1),
        dz::InitialConditionSpec::sine_mode(2),
        dz::InitialConditionSpec::explicit_values(std::vector<double>(199, 1e9)),
    };
    const auto classes = nt::basin_scan(p, family);
    REQUIRE(classes.size() == 3);
    for (std::size_t i : {std::size_t{0}, std::size_t{1}}) {
        const auto u0 = dz::initial_condition(p, family[i]);
        const auto [sol, trace] = nt::newton_solve(p, u0);
        CHECK(trace.converged);
        CHECK_FALSE(classes[i].diverged);
        CHECK(classes[i].extremum_count == nt::classify_steady_state(sol).extremum_count);
    }
    // the single-hump start stays in the single-hump basin
    CHECK(classes[0].extremum_count == 1);
    CHECK(classes[2].diverged);
}
