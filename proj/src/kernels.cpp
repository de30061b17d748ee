#include "rdlab/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace rdlab::kernels {

namespace {

IsaTarget resolve_target() {
#ifdef RDLAB_HAVE_AVX2
    const char* forced = std::getenv("RDLAB_ISA");
    if (forced != nullptr && std::strcmp(forced, "scalar") == 0) return IsaTarget::Scalar;
#if defined(__GNUC__) || defined(__clang__)
    if (__builtin_cpu_supports("avx2")) return IsaTarget::Avx2;
#endif
#endif
    return IsaTarget::Scalar;
}

}  // namespace

IsaTarget active_target() noexcept {
    static const IsaTarget target = resolve_target();
    return target;
}

const char* target_name(IsaTarget target) noexcept {
    return target == IsaTarget::Avx2 ? "avx2" : "scalar";
}

#ifdef RDLAB_HAVE_AVX2
#define RDLAB_DISPATCH(fn, ...)                                   \
    do {                                                          \
        if (active_target() == IsaTarget::Avx2)                   \
            return avx2::fn(__VA_ARGS__);                         \
        return scalar::fn(__VA_ARGS__);                           \
    } while (0)
#else
#define RDLAB_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

void tridiag_matvec(std::span<const double> sub, std::span<const double> diag,
                    std::span<const double> super, std::span<const double> x,
                    std::span<double> y) {
    RDLAB_DISPATCH(tridiag_matvec, sub, diag, super, x, y);
}

void scaled_add(std::span<const double> x, double s, std::span<const double> v,
                std::span<double> out) {
    RDLAB_DISPATCH(scaled_add, x, s, v, out);
}

void scaled_add2(std::span<const double> x, double s, std::span<const double> v,
                 std::span<const double> w, std::span<double> out) {
    RDLAB_DISPATCH(scaled_add2, x, s, v, w, out);
}

double inf_norm(std::span<const double> x) { RDLAB_DISPATCH(inf_norm, x); }

double inf_norm_diff(std::span<const double> x, std::span<const double> y) {
    RDLAB_DISPATCH(inf_norm_diff, x, y);
}

bool all_finite(std::span<const double> x) { RDLAB_DISPATCH(all_finite, x); }

void logistic_eval(double rate, std::span<const double> u, std::span<double> out) {
    RDLAB_DISPATCH(logistic_eval, rate, u, out);
}

void logistic_deriv(double rate, std::span<const double> u, std::span<double> out) {
    RDLAB_DISPATCH(logistic_deriv, rate, u, out);
}

void bistable_eval(double rate, double threshold, std::span<const double> u,
                   std::span<double> out) {
    RDLAB_DISPATCH(bistable_eval, rate, threshold, u, out);
}

void bistable_deriv(double rate, double threshold, std::span<const double> u,
                    std::span<double> out) {
    RDLAB_DISPATCH(bistable_deriv, rate, threshold, u, out);
}

#undef RDLAB_DISPATCH

}  // namespace rdlab::kernels
