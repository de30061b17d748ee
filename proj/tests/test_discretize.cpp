#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "rdlab/discretize.hpp"
#include "rdlab/errors.hpp"
#include "rdlab/kernels.hpp"

namespace dz = rdlab::discretize;

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

std::vector<double> apply_operator(const dz::RDProblem& p, const std::vector<double>& u) {
    const auto [d, b] = dz::build_operator(p);
    std::vector<double> y(u.size());
    rdlab::kernels::tridiag_matvec(d.sub, d.diag, d.super, u, y);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += b.values[i];
    return y;
}

}  // namespace

TEST_CASE("Grid1D::make produces interior nodes") {
    SUBCASE("default-sized grid") {
        const auto g = dz::Grid1D::make(10.0, 0.05);
        CHECK(g.m_interior == 199);
        REQUIRE(g.x.size() == 199);
        CHECK(g.x.front() == doctest::Approx(0.05).epsilon(1e-14));
        CHECK(g.x.back() == doctest::Approx(9.95).epsilon(1e-14));
        CHECK(g.dx == 0.05);
        CHECK(g.length == 10.0);
    }
    SUBCASE("coarse grid") {
        const auto g = dz::Grid1D::make(2.0, 0.5);
        CHECK(g.m_interior == 3);
        REQUIRE(g.x.size() == 3);
        CHECK(g.x[0] == doctest::Approx(0.5));
        CHECK(g.x[1] == doctest::Approx(1.0));
        CHECK(g.x[2] == doctest::Approx(1.5));
    }
    SUBCASE("rejects spacings that do not tile the domain") {
        CHECK_THROWS_AS((void)dz::Grid1D::make(1.0, 0.3), const rdlab::InvalidGrid&);
    }
    SUBCASE("rejects grids without interior nodes") {
        CHECK_THROWS_AS((void)dz::Grid1D::make(0.05, 0.05), const rdlab::InvalidGrid&);
    }
    SUBCASE("rejects nonpositive dimensions") {
        CHECK_THROWS_AS((void)dz::Grid1D::make(-1.0, 0.1), const rdlab::InvalidGrid&);
        CHECK_THROWS_AS((void)dz::Grid1D::make(1.0, 0.0), const rdlab::InvalidGrid&);
    }
}

TEST_CASE("build_operator hand cases") {
    SUBCASE("three interior nodes, unit boundary on the right") {
        const auto p = make_problem(2.0, 0.5, 0.0, 1.0);
        const auto [d, b] = dz::build_operator(p);
        REQUIRE(d.size() == 3);
        for (double v : d.diag) CHECK(v == doctest::Approx(-8.0));
        for (double v : d.sub) CHECK(v == doctest::Approx(4.0));
        for (double v : d.super) CHECK(v == doctest::Approx(4.0));
        REQUIRE(b.values.size() == 3);
        CHECK(b.values[0] == doctest::Approx(0.0));
        CHECK(b.values[1] == doctest::Approx(0.0));
        CHECK(b.values[2] == doctest::Approx(4.0));
    }
    SUBCASE("default-sized operator") {
        const auto p = make_problem(10.0, 0.05, 0.0, 1.0);
        const auto [d, b] = dz::build_operator(p);
        REQUIRE(d.size() == 199);
        CHECK(d.diag[0] == doctest::Approx(-800.0));
        CHECK(d.diag[100] == doctest::Approx(-800.0));
        CHECK(d.sub[50] == doctest::Approx(400.0));
        CHECK(d.super[120] == doctest::Approx(400.0));
        CHECK(b.values[0] == doctest::Approx(0.0));
        CHECK(b.values[198] == doctest::Approx(400.0));
        for (std::size_t i = 1; i < 198; ++i) CHECK(b.values[i] == 0.0);
    }
    SUBCASE("moving frame adds the backward-difference transport stencil") {
        auto p = make_problem(2.0, 0.5, 2.0, 1.0);
        p.frame_speed = 1.0;
        const auto [d, b] = dz::build_operator(p);
        for (double v : d.diag) CHECK(v == doctest::Approx(-6.0));
        for (double v : d.sub) CHECK(v == doctest::Approx(2.0));
        for (double v : d.super) CHECK(v == doctest::Approx(4.0));
        CHECK(b.values[0] == doctest::Approx(4.0));
        CHECK(b.values[1] == doctest::Approx(0.0));
        CHECK(b.values[2] == doctest::Approx(4.0));
    }
}

TEST_CASE("operator structure invariants") {
    SUBCASE("the linear boundary profile is annihilated") {
        for (double diffusion : {1.0, 3.0}) {
            const auto p = make_problem(10.0, 0.05, 0.0, 1.0, diffusion);
            const auto res = apply_operator(p, dz::linear_boundary_profile(p));
            CHECK(rdlab::kernels::inf_norm(res) <= 1e-12);
        }
    }
    SUBCASE("row sums vanish in the interior and equal the lost stencil weight at the ends") {
        const auto p = make_problem(10.0, 0.05, 1.0, 1.0);
        const auto [d, b] = dz::build_operator(p);
        const double s = p.diffusion / (p.grid.dx * p.grid.dx);
        CHECK(d.diag.front() + d.super.front() == -s);
        CHECK(d.sub.back() + d.diag.back() == -s);
        for (std::size_t i = 1; i + 1 < d.size(); ++i)
            CHECK(d.sub[i - 1] + d.diag[i] + d.super[i] == 0.0);
    }
    SUBCASE("the lab-frame operator is symmetric") {
        const auto p = make_problem(10.0, 0.05, 0.0, 1.0, 2.5);
        const auto [d, b] = dz::build_operator(p);
        CHECK(d.sub == d.super);
    }
    SUBCASE("invalid problems are rejected") {
        auto p = make_problem(2.0, 0.5, 0.0, 1.0);
        p.diffusion = 0.0;
        CHECK_THROWS_AS((void)dz::build_operator(p), const std::invalid_argument&);
        p.diffusion = 1.0;
        p.frame_speed = -0.5;
        CHECK_THROWS_AS((void)dz::build_operator(p), const std::invalid_argument&);
    }
}

TEST_CASE("reaction terms evaluate their formulas") {
    SUBCASE("logistic vanishes at its equilibria and peaks in between") {
        const auto r1 = dz::ReactionSpec::logistic(1.0);
        const std::vector<double> u{0.0, 1.0, 0.5};
        const auto f = dz::reaction_eval(r1, u);
        CHECK(f[0] == 0.0);
        CHECK(f[1] == 0.0);
        CHECK(f[2] == doctest::Approx(0.25));
        const auto r2 = dz::ReactionSpec::logistic(2.0);
        CHECK(dz::reaction_eval(r2, std::vector<double>{0.5})[0] == doctest::Approx(0.5));
    }
    SUBCASE("the cubic term vanishes at all three equilibria") {
        const auto r = dz::ReactionSpec::fitzhugh_nagumo(1.0, 0.25);
        const auto f = dz::reaction_eval(r, std::vector<double>{0.0, 0.25, 1.0});
        for (double v : f) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("none is identically zero") {
        const auto f = dz::reaction_eval(dz::ReactionSpec::none(), std::vector<double>{-3.0, 7.0});
        CHECK(f[0] == 0.0);
        CHECK(f[1] == 0.0);
    }
}

TEST_CASE("reaction derivatives match a centered difference") {
    std::mt19937_64 eng(555);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    const double h = 1e-5;
    for (const auto& r : {dz::ReactionSpec::logistic(1.7), dz::ReactionSpec::fitzhugh_nagumo(2.3, 0.4)}) {
        for (int trial = 0; trial < 20; ++trial) {
            const std::vector<double> u{dist(eng)};
            const auto up = dz::reaction_eval(r, std::vector<double>{u[0] + h});
            const auto um = dz::reaction_eval(r, std::vector<double>{u[0] - h});
            const double fd = (up[0] - um[0]) / (2.0 * h);
            CHECK(dz::reaction_derivative(r, u)[0] == doctest::Approx(fd).epsilon(1e-6));
        }
    }
    SUBCASE("logistic derivative hand values") {
        const auto r = dz::ReactionSpec::logistic(1.0);
        CHECK(dz::reaction_derivative(r, std::vector<double>{0.5})[0] == doctest::Approx(0.0));
        CHECK(dz::reaction_derivative(r, std::vector<double>{0.0})[0] == doctest::Approx(1.0));
    }
}

TEST_CASE("polynomial initial profiles hit their closed forms") {
    SUBCASE("parabola through zero boundaries with a unit midpoint anchor") {
        const auto p = make_problem(10.0, 0.05, 0.0, 0.0);
        const auto u0 = dz::initial_condition(p, dz::InitialConditionSpec::polynomial_fit(2, 1.0));
        for (std::size_t m = 0; m < p.grid.m_interior; ++m) {
            const double x = p.grid.x[m];
            CHECK(u0[m] == doctest::Approx(x * (10.0 - x) / 25.0).epsilon(1e-10));
        }
    }
    SUBCASE("default profile") {
        const auto p = make_problem(10.0, 0.05, 0.0, 1.0);
        const auto u0 =
            dz::initial_condition(p, dz::InitialConditionSpec::polynomial_fit(2, 1.0 / 3.0));
        for (std::size_t m = 0; m < p.grid.m_interior; ++m) {
            const double x = p.grid.x[m];
            CHECK(u0[m] == doctest::Approx(x * x / 150.0 + x / 30.0).epsilon(1e-10));
        }
    }
    SUBCASE("degree one reduces to the linear boundary profile") {
        const auto p = make_problem(10.0, 0.05, 0.25, 0.75);
        const auto u0 = dz::initial_condition(p, dz::InitialConditionSpec::polynomial_fit(1, 9.9));
        const auto lin = dz::linear_boundary_profile(p);
        CHECK(rdlab::kernels::inf_norm_diff(u0, lin) <= 1e-12);
    }
}

TEST_CASE("sine-mode profiles peak where they should") {
    const auto p = make_problem(10.0, 0.05, 0.0, 1.0);
    const auto one = dz::initial_condition(p, dz::InitialConditionSpec::sine_mode(1));
    CHECK(one[99] == doctest::Approx(1.0).epsilon(1e-12));  // x = 5
    const auto two = dz::initial_condition(p, dz::InitialConditionSpec::sine_mode(2));
    CHECK(two[49] == doctest::Approx(1.0).epsilon(1e-12));  // x = 2.5
}

TEST_CASE("perturbed profiles are seeded and reproducible") {
    const auto p = make_problem(10.0, 0.05, 0.0, 1.0);
    const auto base = dz::InitialConditionSpec::polynomial_fit(2, 1.0 / 3.0);
    const auto plain = dz::initial_condition(p, base);

    const auto quiet = dz::initial_condition(p, dz::InitialConditionSpec::perturbed(base, 42, 0.0));
    CHECK(quiet == plain);

    const auto a = dz::initial_condition(p, dz::InitialConditionSpec::perturbed(base, 42, 1e-3));
    const auto b = dz::initial_condition(p, dz::InitialConditionSpec::perturbed(base, 42, 1e-3));
    CHECK(a == b);

    const auto c = dz::initial_condition(p, dz::InitialConditionSpec::perturbed(base, 43, 1e-3));
    CHECK(a != c);
    CHECK(rdlab::kernels::inf_norm_diff(a, plain) > 0.0);
    CHECK(rdlab::kernels::inf_norm_diff(a, plain) < 1e-2);  // noise scale ~ amplitude
}

TEST_CASE("explicit profiles are passed through verbatim") {
    const auto p = make_problem(2.0, 0.5, 0.0, 1.0);
    const std::vector<double> vals{0.1, 0.2, 0.3};
    const auto u0 = dz::initial_condition(p, dz::InitialConditionSpec::explicit_values(vals));
    CHECK(u0 == vals);
    CHECK_THROWS_AS(
        (void)dz::initial_condition(
            p, dz::InitialConditionSpec::explicit_values(std::vector<double>{0.1, 0.2})),
        const std::invalid_argument&);
}

TEST_CASE("equilibria and limiting steady states") {
    CHECK(dz::ReactionSpec::none().equilibria().empty());
    CHECK(dz::ReactionSpec::logistic(1.0).equilibria() == std::vector<double>{0.0, 1.0});
    CHECK(dz::ReactionSpec::fitzhugh_nagumo(1.0, 0.25).equilibria() ==
          std::vector<double>{0.0, 0.25, 1.0});

    const auto pure = make_problem(10.0, 0.05, 0.0, 1.0);
    const auto states0 = dz::limiting_steady_states(pure);
    REQUIRE(states0.size() == 1);
    CHECK(states0[0] == dz::linear_boundary_profile(pure));

    const auto fisher =
        make_problem(10.0, 0.05, 0.0, 1.0, 1.0, dz::ReactionSpec::logistic(1.0));
    const auto states1 = dz::limiting_steady_states(fisher);
    REQUIRE(states1.size() == 3);
    CHECK(states1[1] == std::vector<double>(199, 0.0));
    CHECK(states1[2] == std::vector<double>(199, 1.0));

    const auto bistable =
        make_problem(10.0, 0.05, 0.0, 1.0, 1.0, dz::ReactionSpec::fitzhugh_nagumo(1.0, 0.25));
    const auto states2 = dz::limiting_steady_states(bistable);
    REQUIRE(states2.size() == 4);
    CHECK(states2[2] == std::vector<double>(199, 0.25));
}

TEST_CASE("spec factories validate their parameters") {
    CHECK_THROWS_AS((void)dz::ReactionSpec::logistic(-1.0), const std::invalid_argument&);
    CHECK_THROWS_AS((void)dz::ReactionSpec::fitzhugh_nagumo(1.0, 0.0),
                    const std::invalid_argument&);
    CHECK_THROWS_AS((void)dz::ReactionSpec::fitzhugh_nagumo(1.0, 1.0),
                    const std::invalid_argument&);
    CHECK_THROWS_AS((void)dz::InitialConditionSpec::polynomial_fit(0, 1.0),
                    const std::invalid_argument&);
    CHECK_THROWS_AS((void)dz::InitialConditionSpec::sine_mode(0), const std::invalid_argument&);
    CHECK_THROWS_AS((void)dz::InitialConditionSpec::perturbed(
                        dz::InitialConditionSpec::sine_mode(1), 0, -1.0),
                    const std::invalid_argument&);
}
