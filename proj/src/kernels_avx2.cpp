#include "rdlab/kernels.hpp"

#ifdef RDLAB_HAVE_AVX2

#include <immintrin.h>

#include <cassert>
#include <cmath>
#include <limits>

// Each kernel mirrors the scalar reference expression-for-expression so the
// two paths round identically; only the lane count differs. Tails run the
// scalar expressions directly.

namespace rdlab::kernels::avx2 {

namespace {

inline __m256d abs_pd(__m256d v) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    return _mm256_and_pd(v, mask);
}

inline double hmax_pd(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    __m128d m = _mm_max_pd(lo, hi);
    m = _mm_max_sd(m, _mm_unpackhi_pd(m, m));
    return _mm_cvtsd_f64(m);
}

}  // namespace

void tridiag_matvec(std::span<const double> sub, std::span<const double> diag,
                    std::span<const double> super, std::span<const double> x,
                    std::span<double> y) {
    const std::size_t n = diag.size();
    assert(x.size() == n && y.size() == n);
    if (n == 1) {
        y[0] = diag[0] * x[0];
        return;
    }
    y[0] = diag[0] * x[0] + super[0] * x[1];
    std::size_t i = 1;
    for (; i + 4 < n; i += 4) {
        const __m256d xl = _mm256_loadu_pd(&x[i - 1]);
        const __m256d xc = _mm256_loadu_pd(&x[i]);
        const __m256d xr = _mm256_loadu_pd(&x[i + 1]);
        const __m256d s = _mm256_loadu_pd(&sub[i - 1]);
        const __m256d d = _mm256_loadu_pd(&diag[i]);
        const __m256d p = _mm256_loadu_pd(&super[i]);
        const __m256d t = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(s, xl), _mm256_mul_pd(d, xc)),
                                        _mm256_mul_pd(p, xr));
        _mm256_storeu_pd(&y[i], t);
    }
    for (; i + 1 < n; ++i)
        y[i] = (sub[i - 1] * x[i - 1] + diag[i] * x[i]) + super[i] * x[i + 1];
    y[n - 1] = sub[n - 2] * x[n - 2] + diag[n - 1] * x[n - 1];
}

void scaled_add(std::span<const double> x, double s, std::span<const double> v,
                std::span<double> out) {
    assert(x.size() == v.size() && x.size() == out.size());
    const __m256d sv = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= x.size(); i += 4) {
        const __m256d xv = _mm256_loadu_pd(&x[i]);
        const __m256d vv = _mm256_loadu_pd(&v[i]);
        _mm256_storeu_pd(&out[i], _mm256_add_pd(xv, _mm256_mul_pd(sv, vv)));
    }
    for (; i < x.size(); ++i) out[i] = x[i] + s * v[i];
}

void scaled_add2(std::span<const double> x, double s, std::span<const double> v,
                 std::span<const double> w, std::span<double> out) {
    assert(x.size() == v.size() && x.size() == w.size() && x.size() == out.size());
    const __m256d sv = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= x.size(); i += 4) {
        const __m256d xv = _mm256_loadu_pd(&x[i]);
        const __m256d vv = _mm256_loadu_pd(&v[i]);
        const __m256d wv = _mm256_loadu_pd(&w[i]);
        _mm256_storeu_pd(&out[i], _mm256_add_pd(xv, _mm256_mul_pd(sv, _mm256_add_pd(vv, wv))));
    }
    for (; i < x.size(); ++i) out[i] = x[i] + s * (v[i] + w[i]);
}

double inf_norm(std::span<const double> x) {
    // max is exact, so the lane-wise reduction matches the scalar loop bitwise.
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= x.size(); i += 4) m = _mm256_max_pd(m, abs_pd(_mm256_loadu_pd(&x[i])));
    double r = hmax_pd(m);
    for (; i < x.size(); ++i) {
        const double a = std::fabs(x[i]);
        if (a > r) r = a;
    }
    return r;
}

double inf_norm_diff(std::span<const double> x, std::span<const double> y) {
    assert(x.size() == y.size());
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= x.size(); i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]));
        m = _mm256_max_pd(m, abs_pd(d));
    }
    double r = hmax_pd(m);
    for (; i < x.size(); ++i) {
        const double a = std::fabs(x[i] - y[i]);
        if (a > r) r = a;
    }
    return r;
}

bool all_finite(std::span<const double> x) {
    const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    std::size_t i = 0;
    for (; i + 4 <= x.size(); i += 4) {
        // |v| < inf is false for NaN and for +-inf, exactly the finite test.
        const __m256d ok = _mm256_cmp_pd(abs_pd(_mm256_loadu_pd(&x[i])), inf, _CMP_LT_OQ);
        if (_mm256_movemask_pd(ok) != 0xf) return false;
    }
    for (; i < x.size(); ++i)
        if (!std::isfinite(x[i])) return false;
    return true;
}

void logistic_eval(double rate, std::span<const double> u, std::span<double> out) {
    assert(u.size() == out.size());
    const __m256d rv = _mm256_set1_pd(rate);
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= u.size(); i += 4) {
        const __m256d uv = _mm256_loadu_pd(&u[i]);
        _mm256_storeu_pd(&out[i],
                         _mm256_mul_pd(_mm256_mul_pd(rv, uv), _mm256_sub_pd(one, uv)));
    }
    for (; i < u.size(); ++i) out[i] = (rate * u[i]) * (1.0 - u[i]);
}

void logistic_deriv(double rate, std::span<const double> u, std::span<double> out) {
    assert(u.size() == out.size());
    const __m256d rv = _mm256_set1_pd(rate);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d two = _mm256_set1_pd(2.0);
    std::size_t i = 0;
    for (; i + 4 <= u.size(); i += 4) {
        const __m256d uv = _mm256_loadu_pd(&u[i]);
        _mm256_storeu_pd(&out[i],
                         _mm256_mul_pd(rv, _mm256_sub_pd(one, _mm256_mul_pd(two, uv))));
    }
    for (; i < u.size(); ++i) out[i] = rate * (1.0 - 2.0 * u[i]);
}

void bistable_eval(double rate, double threshold, std::span<const double> u,
                   std::span<double> out) {
    assert(u.size() == out.size());
    const __m256d rv = _mm256_set1_pd(rate);
    const __m256d th = _mm256_set1_pd(threshold);
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= u.size(); i += 4) {
        const __m256d uv = _mm256_loadu_pd(&u[i]);
        const __m256d t = _mm256_mul_pd(_mm256_mul_pd(rv, uv), _mm256_sub_pd(uv, th));
        _mm256_storeu_pd(&out[i], _mm256_mul_pd(t, _mm256_sub_pd(one, uv)));
    }
    for (; i < u.size(); ++i) out[i] = ((rate * u[i]) * (u[i] - threshold)) * (1.0 - u[i]);
}

void bistable_deriv(double rate, double threshold, std::span<const double> u,
                    std::span<double> out) {
    assert(u.size() == out.size());
    const double b = 2.0 * (1.0 + threshold);
    const __m256d rv = _mm256_set1_pd(rate);
    const __m256d bv = _mm256_set1_pd(b);
    const __m256d th = _mm256_set1_pd(threshold);
    const __m256d m3 = _mm256_set1_pd(-3.0);
    std::size_t i = 0;
    for (; i + 4 <= u.size(); i += 4) {
        const __m256d uv = _mm256_loadu_pd(&u[i]);
        const __m256d sq = _mm256_mul_pd(uv, uv);
        const __m256d poly =
            _mm256_sub_pd(_mm256_add_pd(_mm256_mul_pd(m3, sq), _mm256_mul_pd(bv, uv)), th);
        _mm256_storeu_pd(&out[i], _mm256_mul_pd(rv, poly));
    }
    for (; i < u.size(); ++i) {
        const double sq = u[i] * u[i];
        out[i] = rate * ((-3.0 * sq + b * u[i]) - threshold);
    }
}

}  // namespace rdlab::kernels::avx2

#endif  // RDLAB_HAVE_AVX2
