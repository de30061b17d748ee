#pragma once

#include <cstddef>
#include <span>

/// Low-level array kernels shared by the solvers and analyses.
///
/// Every kernel has a scalar reference implementation and, on x86-64, an
/// AVX2 variant selected once at runtime. The two are required to agree
/// bit-for-bit: each variant evaluates the same expressions in the same
/// association order, and the build disables FMA contraction. Sequential
/// recurrences (tridiagonal elimination, QR sweeps) are deliberately not
/// kernels; they stay scalar in linalg.
namespace rdlab::kernels {

enum class IsaTarget { Scalar, Avx2 };

/// Instruction set the dispatched kernels resolve to. Decided once per
/// process from CPU capabilities; RDLAB_ISA=scalar in the environment
/// forces the reference path.
IsaTarget active_target() noexcept;

const char* target_name(IsaTarget target) noexcept;

/// y = A x for tridiagonal A given by its three bands.
/// sizes: sub, super = n-1; diag, x, y = n. Aliasing x with y is not allowed.
void tridiag_matvec(std::span<const double> sub, std::span<const double> diag,
                    std::span<const double> super, std::span<const double> x,
                    std::span<double> y);

/// out = x + s * v (sizes equal; out may alias x or v).
void scaled_add(std::span<const double> x, double s, std::span<const double> v,
                std::span<double> out);

/// out = x + s * (v + w) (sizes equal; out may alias any input).
void scaled_add2(std::span<const double> x, double s, std::span<const double> v,
                 std::span<const double> w, std::span<double> out);

/// max_i |x_i|. Returns 0 for an empty span. NaN entries are not detected
/// here; callers that must reject them use all_finite.
double inf_norm(std::span<const double> x);

/// max_i |x_i - y_i| (sizes equal).
double inf_norm_diff(std::span<const double> x, std::span<const double> y);

/// True when every entry is finite (no NaN, no infinity).
bool all_finite(std::span<const double> x);

/// out_i = rate * u_i * (1 - u_i)
void logistic_eval(double rate, std::span<const double> u, std::span<double> out);

/// out_i = rate * (1 - 2 u_i)
void logistic_deriv(double rate, std::span<const double> u, std::span<double> out);

/// out_i = rate * u_i * (u_i - threshold) * (1 - u_i)
void bistable_eval(double rate, double threshold, std::span<const double> u,
                   std::span<double> out);

/// out_i = rate * (-3 u_i^2 + 2 (1 + threshold) u_i - threshold)
void bistable_deriv(double rate, double threshold, std::span<const double> u,
                    std::span<double> out);

/// Scalar reference implementations; the dispatched entry points above
/// forward here when AVX2 is unavailable or disabled. Exposed so the
/// equivalence tests can compare paths directly.
namespace scalar {
void tridiag_matvec(std::span<const double> sub, std::span<const double> diag,
                    std::span<const double> super, std::span<const double> x,
                    std::span<double> y);
void scaled_add(std::span<const double> x, double s, std::span<const double> v,
                std::span<double> out);
void scaled_add2(std::span<const double> x, double s, std::span<const double> v,
                 std::span<const double> w, std::span<double> out);
double inf_norm(std::span<const double> x);
double inf_norm_diff(std::span<const double> x, std::span<const double> y);
bool all_finite(std::span<const double> x);
void logistic_eval(double rate, std::span<const double> u, std::span<double> out);
void logistic_deriv(double rate, std::span<const double> u, std::span<double> out);
void bistable_eval(double rate, double threshold, std::span<const double> u,
                   std::span<double> out);
void bistable_deriv(double rate, double threshold, std::span<const double> u,
                    std::span<double> out);
}  // namespace scalar

#ifdef RDLAB_HAVE_AVX2
namespace avx2 {
void tridiag_matvec(std::span<const double> sub, std::span<const double> diag,
                    std::span<const double> super, std::span<const double> x,
                    std::span<double> y);
void scaled_add(std::span<const double> x, double s, std::span<const double> v,
                std::span<double> out);
void scaled_add2(std::span<const double> x, double s, std::span<const double> v,
                 std::span<const double> w, std::span<double> out);
double inf_norm(std::span<const double> x);
double inf_norm_diff(std::span<const double> x, std::span<const double> y);
bool all_finite(std::span<const double> x);
void logistic_eval(double rate, std::span<const double> u, std::span<double> out);
void logistic_deriv(double rate, std::span<const double> u, std::span<double> out);
void bistable_eval(double rate, double threshold, std::span<const double> u,
                   std::span<double> out);
void bistable_deriv(double rate, double threshold, std::span<const double> u,
                    std::span<double> out);
}  // namespace avx2
#endif

}  // namespace rdlab::kernels
