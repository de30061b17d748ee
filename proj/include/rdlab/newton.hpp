#pragma once
/// Vector Newton iteration for the discrete steady-state problem
/// 0 = D U + R(U) + B, with per-iteration tracing, order-of-convergence
/// estimation, and steady-state shape classification for basin scans.

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rdlab/discretize.hpp"
#include "rdlab/errors.hpp"
#include "rdlab/linalg.hpp"

namespace rdlab::newton {

/// Stopping tolerance on the update max-norm: ten machine epsilons.
inline constexpr double kDefaultTolerance = 2.2204460492503131e-15;
inline constexpr int kDefaultMaxIterations = 50;
/// Iterates whose max-norm exceeds this are declared divergent.
inline constexpr double kDivergenceNorm = 1e8;

/// Full record of a Newton run. iterates.front() is the starting point;
/// errors[k] = |update at iteration k+1|_inf; order_estimates[i] =
/// log(errors[i+1]) / log(errors[i]), raw and unrounded.
struct NewtonTrace {
    std::vector<std::vector<double>> iterates;
    std::vector<double> errors;
    std::vector<double> order_estimates;
    bool converged = false;
    int iterations_used = 0;
};

/// Shape summary of a limit profile: number of interior extrema, or a
/// divergence flag (in which case the count is meaningless and left 0).
struct SteadyStateClass {
    int extremum_count = 0;
    bool diverged = false;
};

/// Per-step convergence orders. rounded[i] is present only where the base
/// error is below 1, since log-ratio orders of errors >= 1 flip sign and
/// carry no convergence meaning.
struct ConvergenceOrder {
    std::vector<double> raw;
    std::vector<std::optional<int>> rounded;
};

/// Steady-state residual G(U) = D U + R(U) + B (operator and boundary vector
/// already carry the diffusion coefficient).
[[nodiscard]] std::vector<double> residual(const discretize::RDProblem& p,
                                           std::span<const double> u);

/// Jacobian of the residual, J = D + diag(R'(U)); tridiagonal.
[[nodiscard]] linalg::TridiagonalMatrix jacobian(const discretize::RDProblem& p,
                                                 std::span<const double> u);

/// Newton iteration U <- U - J(U)^{-1} G(U), each update obtained by a
/// tridiagonal solve. Stops when the update max-norm drops below tol or
/// after max_iter iterations. Throws Diverged when an iterate leaves the
/// 1e8 ball or goes non-finite, SingularJacobian on a zero pivot.
[[nodiscard]] std::pair<std::vector<double>, NewtonTrace> newton_solve(
    const discretize::RDProblem& p, std::span<const double> u0,
    double tol = kDefaultTolerance, int max_iter = kDefaultMaxIterations);

/// Per-step orders p_i = log(e_{i+1}) / log(e_i) for a positive error
/// sequence; throws NonPositiveError otherwise.
[[nodiscard]] ConvergenceOrder order_of_convergence(std::span<const double> errors);

/// Counts interior extrema as strict sign changes between consecutive first
/// differences, ignoring differences at or below noise_floor (discrete
/// differences of converged states carry rounding dust).
[[nodiscard]] SteadyStateClass classify_steady_state(std::span<const double> u,
                                                     double noise_floor = 1e-8);

/// Runs newton_solve from every recipe in the family and classifies each
/// limit. Per-entry failures (divergence, singular Jacobian, failure to
/// converge within the budget) are recorded as diverged; the scan itself
/// never throws for an entry.
[[nodiscard]] std::vector<SteadyStateClass> basin_scan(
    const discretize::RDProblem& p, std::span<const discretize::InitialConditionSpec> family);

}  // namespace rdlab::newton
