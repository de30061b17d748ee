#pragma once
/// Time integration of the semidiscrete system dU/dt = D U + R(U) + B:
/// five fixed-step schemes, a 2-stage Rosenbrock pair with embedded error
/// estimate, an adaptive driver built on it, and the dense two-level form
/// U_next = M U + N of each fixed-step scheme for stability analysis.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rdlab/discretize.hpp"
#include "rdlab/errors.hpp"
#include "rdlab/linalg.hpp"

namespace rdlab::steppers {

enum class Scheme {
    ForwardEuler,
    BackwardEulerLinear,
    CrankNicolsonLinear,
    CrankNicolsonSemiImplicit,
    CrankNicolsonImprovedEuler,
    Rosenbrock,
};

/// Time-stepping scheme selector. The two *Linear schemes treat the reaction
/// implicitly as zero and therefore reject problems with a reaction term.
/// Rosenbrock carries its own adaptivity flag and tolerances; the fixed-step
/// schemes ignore those fields.
struct StepperKind {
    Scheme scheme = Scheme::CrankNicolsonSemiImplicit;
    bool adaptive = false;
    double rtol = 1e-3;
    double atol = 1e-6;

    static StepperKind forward_euler() noexcept;
    static StepperKind backward_euler_linear() noexcept;
    static StepperKind crank_nicolson_linear() noexcept;
    static StepperKind crank_nicolson_semi_implicit() noexcept;
    static StepperKind crank_nicolson_improved_euler() noexcept;
    static StepperKind rosenbrock(bool adaptive, double rtol, double atol);

    /// True for schemes that only integrate the pure-diffusion problem.
    [[nodiscard]] bool linear_only() const noexcept;
};

/// Record of one integration run: times[i] pairs with states[i];
/// step_sizes[i] is the step taken from times[i] to times[i+1].
struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<double> step_sizes;
};

/// Dense one-step map U_next = m * U + n of a fixed-step scheme, assembled
/// at a given linearization state for the schemes whose map depends on it.
struct TwoLevelForm {
    linalg::DenseMatrix m;
    std::vector<double> n;
};

/// Numerical instability: an update left the 1e12 max-norm ball or produced
/// non-finite entries. Carries whatever trajectory had accumulated (empty
/// for a single step); the final recorded state may be the offending one.
class BlowUp : public Error {
  public:
    BlowUp(const std::string& what, Trajectory partial = {})
        : Error(what), partial_(std::make_shared<Trajectory>(std::move(partial))) {}
    [[nodiscard]] const Trajectory& partial() const noexcept { return *partial_; }

  private:
    std::shared_ptr<const Trajectory> partial_;
};

/// The adaptive controller drove the step size below 1e-14 * t_end without
/// finding an acceptable step. Carries the accepted trajectory so far.
class StepUnderflow : public Error {
  public:
    StepUnderflow(const std::string& what, Trajectory partial = {})
        : Error(what), partial_(std::make_shared<Trajectory>(std::move(partial))) {}
    [[nodiscard]] const Trajectory& partial() const noexcept { return *partial_; }

  private:
    std::shared_ptr<const Trajectory> partial_;
};

/// Advances the state by one step of the chosen scheme. Implicit schemes
/// solve their tridiagonal systems directly; no inverse is ever formed.
/// Throws IncompatibleStepper for a linear-only scheme with a reaction term,
/// BlowUp if the update exceeds 1e12 in max norm or goes non-finite.
[[nodiscard]] std::vector<double> step(const StepperKind& kind,
                                       const discretize::RDProblem& p,
                                       std::span<const double> u, double dt);

/// Integrates from t = 0 to t_end. Fixed-step kinds require dt to divide
/// t_end within 1e-9 and record every step; adaptive Rosenbrock ignores dt
/// and records its accepted steps. BlowUp rethrown with the partial record.
[[nodiscard]] Trajectory evolve(const StepperKind& kind, const discretize::RDProblem& p,
                                std::span<const double> u0, double dt, double t_end);

/// One step of the 2-stage Rosenbrock pair (gamma = 1/(2 + sqrt(2))) with
/// analytic Jacobian D + diag(R'(U)). Returns the second-order update and
/// the embedded third-order error estimate used for step control.
[[nodiscard]] std::pair<std::vector<double>, double> rosenbrock_step(
    const discretize::RDProblem& p, std::span<const double> u, double dt);

/// Adaptive Rosenbrock driver. Accepts a trial step when the error estimate
/// is at most atol + rtol * |U|_inf; the step-size update factor is clamped
/// to [0.2, 5] and the step itself to t_end / 10. The first trial step is
/// min(t_end / 10, 1e-3 * t_end). Records accepted steps only.
[[nodiscard]] Trajectory adaptive_evolve(const discretize::RDProblem& p,
                                         std::span<const double> u0, double rtol, double atol,
                                         double t_end);

/// Dense two-level form of a fixed-step scheme at the given state, exact in
/// the sense that step(kind, p, u_current, dt) == m * u_current + n to
/// rounding. Throws Unsupported for Rosenbrock, which has no such form.
[[nodiscard]] TwoLevelForm two_level_form(const StepperKind& kind,
                                          const discretize::RDProblem& p,
                                          std::span<const double> u_current, double dt);

}  // namespace rdlab::steppers
