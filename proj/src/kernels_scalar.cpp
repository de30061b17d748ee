#include "rdlab/kernels.hpp"

#include <cassert>
#include <cmath>

namespace rdlab::kernels::scalar {

void tridiag_matvec(std::span<const double> sub, std::span<const double> diag,
                    std::span<const double> super, std::span<const double> x,
                    std::span<double> y) {
    const std::size_t n = diag.size();
    assert(x.size() == n && y.size() == n);
    assert(sub.size() + 1 == n || (n == 1 && sub.empty()));
    assert(super.size() == sub.size());
    if (n == 1) {
        y[0] = diag[0] * x[0];
        return;
    }
    y[0] = diag[0] * x[0] + super[0] * x[1];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        // Fixed association: (sub + diag) + super. The AVX2 variant mirrors it.
        y[i] = (sub[i - 1] * x[i - 1] + diag[i] * x[i]) + super[i] * x[i + 1];
    }
    y[n - 1] = sub[n - 2] * x[n - 2] + diag[n - 1] * x[n - 1];
}

void scaled_add(std::span<const double> x, double s, std::span<const double> v,
                std::span<double> out) {
    assert(x.size() == v.size() && x.size() == out.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + s * v[i];
}

void scaled_add2(std::span<const double> x, double s, std::span<const double> v,
                 std::span<const double> w, std::span<double> out) {
    assert(x.size() == v.size() && x.size() == w.size() && x.size() == out.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + s * (v[i] + w[i]);
}

double inf_norm(std::span<const double> x) {
    double m = 0.0;
    for (double e : x) {
        const double a = std::fabs(e);
        if (a > m) m = a;
    }
    return m;
}

double inf_norm_diff(std::span<const double> x, std::span<const double> y) {
    assert(x.size() == y.size());
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = std::fabs(x[i] - y[i]);
        if (a > m) m = a;
    }
    return m;
}

bool all_finite(std::span<const double> x) {
    for (double e : x) {
        if (!std::isfinite(e)) return false;
    }
    return true;
}

void logistic_eval(double rate, std::span<const double> u, std::span<double> out) {
    assert(u.size() == out.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = (rate * u[i]) * (1.0 - u[i]);
}

void logistic_deriv(double rate, std::span<const double> u, std::span<double> out) {
    assert(u.size() == out.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = rate * (1.0 - 2.0 * u[i]);
}

void bistable_eval(double rate, double threshold, std::span<const double> u,
                   std::span<double> out) {
    assert(u.size() == out.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        out[i] = ((rate * u[i]) * (u[i] - threshold)) * (1.0 - u[i]);
}

void bistable_deriv(double rate, double threshold, std::span<const double> u,
                    std::span<double> out) {
    assert(u.size() == out.size());
    const double b = 2.0 * (1.0 + threshold);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double sq = u[i] * u[i];
        out[i] = rate * ((-3.0 * sq + b * u[i]) - threshold);
    }
}

}  // namespace rdlab::kernels::scalar
