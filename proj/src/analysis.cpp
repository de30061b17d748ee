#include "rdlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "rdlab/kernels.hpp"

namespace rdlab::analysis {

namespace {

constexpr double kRealnessTol = 1e-10;
constexpr double kReversalFloor = 1e-12;
constexpr std::size_t kProbeSteps = 200;

struct RunOutcome {
    std::vector<double> final_state;
    bool ok = false;
};

RunOutcome run_to_end(const discretize::RDProblem& p, const steppers::StepperKind& kind,
                      std::span<const double> u0, double dt, double t_end) {
    RunOutcome out;
    try {
        const steppers::Trajectory traj = steppers::evolve(kind, p, u0, dt, t_end);
        out.final_state = traj.states.back();
        out.ok = true;
    } catch (const steppers::BlowUp&) {
        out.ok = false;
    }
    return out;
}

}  // namespace

double approximate_relative_error(std::span<const double> u_next,
                                  std::span<const double> u_prev) {
    if (u_next.size() != u_prev.size())
        throw std::invalid_argument("approximate_relative_error: size mismatch");
    const double reference = kernels::inf_norm(u_next);
    if (reference == 0.0)
        throw ZeroReference("approximate_relative_error: reference state is zero");
    return kernels::inf_norm_diff(u_next, u_prev) / reference * 100.0;
}

int significant_figures(double error_pct) {
    if (!(error_pct > 0.0))
        throw NonPositiveError("significant_figures: error must be positive");
    const double n = std::floor(std::log10(0.5 / error_pct));
    if (n < 0.0) return 0;
    return static_cast<int>(n);
}

AccuracyOrder order_of_accuracy(double coarse_error, double fine_error) {
    if (!(coarse_error > 0.0) || !(fine_error > 0.0))
        throw NonPositiveError("order_of_accuracy: errors must be positive");
    AccuracyOrder order;
    order.raw = std::log2(coarse_error / fine_error);
    order.rounded = static_cast<int>(std::lround(order.raw));
    return order;
}

AccuracyTable accuracy_table(const discretize::RDProblem& p, const steppers::StepperKind& kind,
                             std::span<const double> dt_list, double t_end) {
    if (dt_list.empty()) throw std::invalid_argument("accuracy_table: empty dt list");
    for (const double dt : dt_list)
        if (!(dt > 0.0) || !std::isfinite(dt))
            throw std::invalid_argument("accuracy_table: dt values must be positive");
    for (std::size_t i = 0; i + 1 < dt_list.size(); ++i)
        if (std::fabs(dt_list[i + 1] - 0.5 * dt_list[i]) > 1e-12 * dt_list[i])
            throw std::invalid_argument("accuracy_table: dt list must halve at each step");
    if (!(t_end > 0.0) || !std::isfinite(t_end))
        throw std::invalid_argument("accuracy_table: t_end must be positive");

    const std::vector<double> u0 = discretize::initial_condition(p, p.ic);

    // One run per listed dt plus one extra halving so the last row still has
    // a comparison partner.
    const std::size_t n = dt_list.size();
    std::vector<RunOutcome> runs(n + 1);
    for (std::size_t k = 0; k < n; ++k) runs[k] = run_to_end(p, kind, u0, dt_list[k], t_end);
    runs[n] = run_to_end(p, kind, u0, 0.5 * dt_list[n - 1], t_end);

    std::vector<double> errors(n, std::numeric_limits<double>::quiet_NaN());
    AccuracyTable table;
    table.rows.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        AccuracyRow& row = table.rows[k];
        row.dt = dt_list[k];
        row.stable = runs[k].ok && runs[k + 1].ok;
        if (!row.stable) {
            row.approx_error_pct = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        errors[k] = approximate_relative_error(runs[k + 1].final_state, runs[k].final_state);
        row.approx_error_pct = errors[k];
        row.sig_figs = errors[k] > 0.0 ? significant_figures(errors[k]) : 16;
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (table.rows[k].stable && table.rows[k + 1].stable && errors[k] > 0.0 &&
            errors[k + 1] > 0.0)
            table.rows[k].order = order_of_accuracy(errors[k], errors[k + 1]);
    }
    return table;
}

double growth_factor(const steppers::StepperKind& kind, double r, double theta, double dt,
                     double rho, double u_tilde) {
    if (!(r >= 0.0) || !std::isfinite(r))
        throw std::invalid_argument("growth_factor: r must be >= 0");
    if (!(theta >= 0.0) || !(theta <= std::numbers::pi))
        throw std::invalid_argument("growth_factor: theta must lie in [0, pi]");
    if (!(u_tilde >= 0.0) || !(u_tilde <= 1.0))
        throw std::invalid_argument("growth_factor: u_tilde must lie in [0, 1]");

    const double sine = std::sin(0.5 * theta);
    const double s = sine * sine;
    switch (kind.scheme) {
        case steppers::Scheme::ForwardEuler:
            return 1.0 - 4.0 * r * s;
        case steppers::Scheme::BackwardEulerLinear:
            return 1.0 / (1.0 + 4.0 * r * s);
        case steppers::Scheme::CrankNicolsonLinear:
            return (1.0 - 2.0 * r * s) / (1.0 + 2.0 * r * s);
        case steppers::Scheme::CrankNicolsonSemiImplicit:
            if (!(dt >= 0.0) || !std::isfinite(dt))
                throw std::invalid_argument("growth_factor: dt must be >= 0");
            return (1.0 - 2.0 * r * s + dt * rho * (1.0 - u_tilde)) / (1.0 + 2.0 * r * s);
        case steppers::Scheme::CrankNicolsonImprovedEuler:
        case steppers::Scheme::Rosenbrock:
            break;
    }
    throw Unsupported("growth_factor: no closed form for this scheme");
}

SpectrumReport spectrum_report(const discretize::RDProblem& p,
                               const steppers::StepperKind& kind,
                               std::span<const double> u_current, double dt, double c_growth) {
    const steppers::TwoLevelForm form = steppers::two_level_form(kind, p, u_current, dt);

    SpectrumReport report;
    report.spectrum = linalg::eigenvalues(form.m);
    report.spectral_radius = linalg::spectral_radius(report.spectrum);
    report.r_ratio = p.diffusion * dt / (p.grid.dx * p.grid.dx);
    double min_re = std::numeric_limits<double>::infinity();
    for (const auto& ev : report.spectrum.eigenvalues) min_re = std::min(min_re, ev.real());
    report.min_real_part = min_re;
    report.von_neumann_ok = report.spectral_radius <= 1.0 + c_growth * dt + 1e-10;
    report.nonneg_ok = nonneg_eigenvalue_check(report);
    return report;
}

bool nonneg_eigenvalue_check(const SpectrumReport& report) {
    if (report.spectrum.eigenvalues.empty()) return false;
    double min_re = std::numeric_limits<double>::infinity();
    double max_im = 0.0;
    for (const auto& ev : report.spectrum.eigenvalues) {
        min_re = std::min(min_re, ev.real());
        max_im = std::max(max_im, std::fabs(ev.imag()));
    }
    return min_re >= -kRealnessTol && max_im <= kRealnessTol;
}

OscillationReport detect_oscillations(const steppers::Trajectory& traj) {
    if (traj.states.size() < 3)
        throw TooShort("detect_oscillations: need at least 3 states");
    const std::size_t m = traj.states.front().size();
    OscillationReport report;
    report.reversal_counts.assign(m, 0);
    for (std::size_t n = 2; n < traj.states.size(); ++n) {
        const auto& a = traj.states[n - 2];
        const auto& b = traj.states[n - 1];
        const auto& c = traj.states[n];
        for (std::size_t j = 0; j < m; ++j) {
            const double first = a[j] - b[j];
            const double second = b[j] - c[j];
            if (std::fabs(first) > kReversalFloor && std::fabs(second) > kReversalFloor &&
                first * second < 0.0)
                ++report.reversal_counts[j];
        }
    }
    for (const int count : report.reversal_counts)
        if (count >= 2) {
            report.oscillatory = true;
            break;
        }
    return report;
}

namespace {

/// 200 fixed steps from the linear profile plus half a unit of the highest
/// grid mode; a blow-up mid-probe counts as oscillatory if the partial
/// record is too short to test (instability implies reversals here).
bool probe_oscillates(const discretize::RDProblem& p, const steppers::StepperKind& kind,
                      double dt) {
    std::vector<double> u0 = discretize::linear_boundary_profile(p);
    const std::size_t m = p.grid.m_interior;
    for (std::size_t j = 0; j < m; ++j)
        u0[j] += 0.5 * std::sin(static_cast<double>(m) * std::numbers::pi * p.grid.x[j] /
                                p.grid.length);
    steppers::Trajectory traj;
    try {
        traj = steppers::evolve(kind, p, u0, dt, dt * static_cast<double>(kProbeSteps));
    } catch (const steppers::BlowUp& e) {
        traj = e.partial();
    }
    if (traj.states.size() < 3) return true;
    return detect_oscillations(traj).oscillatory;
}

}  // namespace

double oscillation_threshold(const discretize::RDProblem& p, const steppers::StepperKind& kind,
                             double dx, double dt_hi, double dt_lo) {
    if (!(dt_lo > 0.0) || !(dt_hi > dt_lo))
        throw std::invalid_argument("oscillation_threshold: need 0 < dt_lo < dt_hi");

    discretize::RDProblem probe = p;
    probe.grid = discretize::Grid1D::make(p.grid.length, dx);

    double hi = dt_hi;
    double lo = dt_lo;
    if (!probe_oscillates(probe, kind, hi) || probe_oscillates(probe, kind, lo))
        throw BracketInvalid(
            "oscillation_threshold: dt_hi must oscillate and dt_lo must not");

    while ((hi - lo) > 1e-2 * hi) {
        const double mid = 0.5 * (hi + lo);
        if (probe_oscillates(probe, kind, mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

}  // namespace rdlab::analysis
