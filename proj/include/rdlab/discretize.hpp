#pragma once
/// Spatial discretization of 1-D reaction-diffusion problems on [0, L] with
/// Dirichlet boundary values: uniform grids, the tridiagonal second-difference
/// operator with its boundary lift vector, pointwise reaction terms, and
/// initial / limiting profiles sampled at the interior nodes.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "rdlab/errors.hpp"
#include "rdlab/linalg.hpp"

namespace rdlab::discretize {

/// Uniform grid over [0, length] storing only the interior nodes.
struct Grid1D {
    double length = 0.0;
    double dx = 0.0;
    std::size_t m_interior = 0;
    std::vector<double> x;  ///< interior coordinates m*dx, m = 1..m_interior

    /// Builds a grid. dx must tile the domain exactly (length/dx within 1e-9
    /// of an integer) and leave at least one interior node; anything else
    /// throws InvalidGrid rather than silently adjusting the spacing.
    static Grid1D make(double length, double dx);
};

/// Fixed solution values at the two endpoints.
struct DirichletBC {
    double left = 0.0;
    double right = 1.0;
};

enum class ReactionKind { None, Logistic, FitzHughNagumo };

/// Pointwise reaction term R(u).
///
/// Logistic:        rate * u * (1 - u)
/// FitzHughNagumo:  rate * u * (u - threshold) * (1 - u), threshold in (0,1)
/// None:            identically zero (pure diffusion)
struct ReactionSpec {
    ReactionKind kind = ReactionKind::None;
    double rate = 0.0;
    double threshold = 0.0;  // FitzHughNagumo only

    static ReactionSpec none() noexcept;
    static ReactionSpec logistic(double rate);
    static ReactionSpec fitzhugh_nagumo(double rate, double threshold);

    /// Constant equilibria of R, ascending; empty for None.
    [[nodiscard]] std::vector<double> equilibria() const;
};

enum class InitialConditionKind { PolynomialFit, SineMode, ExplicitValues, Perturbed };

/// Recipe for the initial profile, sampled at interior nodes on demand.
///
/// PolynomialFit: the degree-d polynomial through (0, left), (L, right) and
/// d-1 equally spaced interior anchors all at height interior_value.
/// SineMode: sin(mode*pi*x/L). ExplicitValues: caller-supplied samples.
/// Perturbed: base profile plus amplitude * seeded standard-normal noise.
struct InitialConditionSpec {
    InitialConditionKind kind = InitialConditionKind::PolynomialFit;
    int degree = 2;
    double interior_value = 1.0 / 3.0;
    int mode = 1;
    std::vector<double> values;
    std::shared_ptr<const InitialConditionSpec> base;
    std::uint64_t seed = 0;
    double amplitude = 0.0;

    static InitialConditionSpec polynomial_fit(int degree, double interior_value);
    static InitialConditionSpec sine_mode(int mode);
    static InitialConditionSpec explicit_values(std::vector<double> values);
    static InitialConditionSpec perturbed(InitialConditionSpec base, std::uint64_t seed,
                                          double amplitude);
};

/// Continuous problem description: u_t = diffusion * u_xx + R(u) on (0, L)
/// with Dirichlet values, optionally viewed in a coordinate frame moving
/// right at frame_speed (which adds a transport term to the operator).
struct RDProblem {
    Grid1D grid;
    DirichletBC bc;
    double diffusion = 1.0;
    ReactionSpec reaction;
    double frame_speed = 0.0;
    InitialConditionSpec ic;
};

/// Constant boundary contribution B to the semidiscrete flow
/// dU/dt = D U + R(U) + B. Nonzero only in the first and last entries.
struct BoundaryVector {
    std::vector<double> values;
};

/// Centered second-difference operator D scaled by diffusion/dx^2, plus the
/// boundary vector B lifting the Dirichlet values into the interior system.
/// A positive frame_speed adds the backward-difference transport stencil
/// (+c/dx on the diagonal, -c/dx on the sub-diagonal) and the matching
/// -c/dx * left contribution to B's first entry.
[[nodiscard]] std::pair<linalg::TridiagonalMatrix, BoundaryVector> build_operator(
    const RDProblem& p);

/// Componentwise R(u).
[[nodiscard]] std::vector<double> reaction_eval(const ReactionSpec& r, std::span<const double> u);

/// Componentwise dR/du, the diagonal of the reaction Jacobian.
[[nodiscard]] std::vector<double> reaction_derivative(const ReactionSpec& r,
                                                      std::span<const double> u);

/// Samples the given recipe at the interior nodes of p.grid.
[[nodiscard]] std::vector<double> initial_condition(const RDProblem& p,
                                                    const InitialConditionSpec& spec);

/// Interior samples of the straight line joining the two boundary values,
/// the profile every pure-diffusion run relaxes to.
[[nodiscard]] std::vector<double> linear_boundary_profile(const RDProblem& p);

/// Candidate long-time profiles: the linear boundary profile first, then one
/// constant profile per reaction equilibrium.
[[nodiscard]] std::vector<std::vector<double>> limiting_steady_states(const RDProblem& p);

}  // namespace rdlab::discretize
