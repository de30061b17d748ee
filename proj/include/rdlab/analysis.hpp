#pragma once
/// Stability and accuracy analysis: closed-form von Neumann growth factors,
/// method-matrix spectra with the von Neumann and non-negative-eigenvalue
/// checks, numerical-oscillation detection with threshold search, and the
/// step-halving accuracy table harness.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rdlab/discretize.hpp"
#include "rdlab/errors.hpp"
#include "rdlab/linalg.hpp"
#include "rdlab/steppers.hpp"

namespace rdlab::analysis {

/// Spectrum of a two-level method matrix plus the derived stability flags.
/// von_neumann_ok: spectral radius <= 1 + c_growth*dt (+1e-10 slack).
/// nonneg_ok: spectrum is real within 1e-10 and min real part >= -1e-10,
/// the oscillation-freedom condition.
struct SpectrumReport {
    linalg::ComplexSpectrum spectrum;
    double spectral_radius = 0.0;
    double min_real_part = 0.0;
    double r_ratio = 0.0;  ///< diffusion * dt / dx^2
    bool von_neumann_ok = false;
    bool nonneg_ok = false;
};

/// Observed convergence order between two consecutive halving errors.
struct AccuracyOrder {
    double raw = 0.0;
    int rounded = 0;
};

/// One row of the step-halving table. approx_error_pct compares this dt's
/// final state against the dt/2 run (percent, max norm). order compares this
/// row's error with the next row's and is absent on the last row. stable is
/// false when either run of the pair blew up; the other fields are then
/// meaningless (error NaN, sig_figs 0).
struct AccuracyRow {
    double dt = 0.0;
    double approx_error_pct = 0.0;
    int sig_figs = 0;
    std::optional<AccuracyOrder> order;
    bool stable = true;
};

struct AccuracyTable {
    std::vector<AccuracyRow> rows;
};

/// Per-component counts of derivative sign reversals along a trajectory;
/// oscillatory once any component reverses at least twice.
struct OscillationReport {
    std::vector<int> reversal_counts;
    bool oscillatory = false;
};

/// Percent relative difference |next - prev|_inf / |next|_inf * 100.
/// Throws ZeroReference when the reference state is identically zero.
[[nodiscard]] double approximate_relative_error(std::span<const double> u_next,
                                                std::span<const double> u_prev);

/// Significant figures guaranteed by a percent error: floor(log10(0.5/E)),
/// clamped at zero for errors of 5% or more.
[[nodiscard]] int significant_figures(double error_pct);

/// Observed order log2(coarse/fine) for one halving, with its integer round.
[[nodiscard]] AccuracyOrder order_of_accuracy(double coarse_error, double fine_error);

/// Runs the problem at every dt in the halving list plus one extra halving,
/// and compares final states pairwise at t_end. A run that blows up marks
/// its rows unstable instead of aborting the table.
[[nodiscard]] AccuracyTable accuracy_table(const discretize::RDProblem& p,
                                           const steppers::StepperKind& kind,
                                           std::span<const double> dt_list, double t_end);

/// Closed-form amplification factor of the given scheme for the Fourier mode
/// with phase angle theta, at mesh ratio r = diffusion*dt/dx^2. rho and
/// u_tilde feed the semi-implicit reaction term; dt only matters there too.
/// Throws Unsupported for schemes with no derived formula (improved-Euler,
/// Rosenbrock).
[[nodiscard]] double growth_factor(const steppers::StepperKind& kind, double r, double theta,
                                   double dt, double rho, double u_tilde);

/// Assembles the two-level matrix at the given state, computes its
/// eigenvalues and fills every report field; c_growth is the constant in the
/// von Neumann bound 1 + c_growth*dt.
[[nodiscard]] SpectrumReport spectrum_report(const discretize::RDProblem& p,
                                             const steppers::StepperKind& kind,
                                             std::span<const double> u_current, double dt,
                                             double c_growth);

/// The oscillation-freedom condition on an existing report: true iff the
/// spectrum is real within 1e-10 with min real part >= -1e-10.
[[nodiscard]] bool nonneg_eigenvalue_check(const SpectrumReport& report);

/// Counts, per component, the time indices where consecutive differences
/// change sign with both legs above 1e-12 in magnitude. Needs at least
/// three states (throws TooShort otherwise).
[[nodiscard]] OscillationReport detect_oscillations(const steppers::Trajectory& traj);

/// Smallest dt (to 1% relative width, by bisection) whose 200-step run at
/// grid spacing dx oscillates. The probe starts from the linear boundary
/// profile plus half a unit of the highest grid mode. Requires an oscillatory
/// dt_hi and a quiet dt_lo; throws BracketInvalid otherwise.
[[nodiscard]] double oscillation_threshold(const discretize::RDProblem& p,
                                           const steppers::StepperKind& kind, double dx,
                                           double dt_hi, double dt_lo);

}  // namespace rdlab::analysis
