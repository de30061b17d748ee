#include "rdlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "rdlab/kernels.hpp"

namespace rdlab::linalg {

std::vector<double> thomas_solve(const TridiagonalMatrix& a, std::span<const double> rhs) {
    const std::size_t n = a.size();
    if (n == 0) throw std::invalid_argument("thomas_solve: empty matrix");
    if (rhs.size() != n) throw std::invalid_argument("thomas_solve: rhs size mismatch");
    if (a.sub.size() + 1 != n && !(n == 1 && a.sub.empty()))
        throw std::invalid_argument("thomas_solve: band size mismatch");
    if (a.super.size() != a.sub.size())
        throw std::invalid_argument("thomas_solve: band size mismatch");

    std::vector<double> c(n > 1 ? n - 1 : 0);  // eliminated super-diagonal
    std::vector<double> x(n);
    double pivot = a.diag[0];
    if (std::fabs(pivot) < kPivotFloor) throw ZeroPivot("thomas_solve: zero pivot at row 0");
    if (n > 1) c[0] = a.super[0] / pivot;
    x[0] = rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = a.diag[i] - a.sub[i - 1] * c[i - 1];
        if (std::fabs(pivot) < kPivotFloor)
            throw ZeroPivot("thomas_solve: zero pivot at row " + std::to_string(i));
        if (i + 1 < n) c[i] = a.super[i] / pivot;
        x[i] = (rhs[i] - a.sub[i - 1] * x[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
    return x;
}

namespace {

/// Householder similarity reduction to upper Hessenberg form, in place.
void hessenberg_reduce(std::vector<double>& h, std::size_t n) {
    auto H = [&](std::size_t i, std::size_t j) -> double& { return h[i * n + j]; };
    std::vector<double> v(n, 0.0);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double scale = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) scale = std::max(scale, std::fabs(H(i, k)));
        if (scale == 0.0) continue;
        double norm2 = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) {
            v[i] = H(i, k) / scale;
            norm2 += v[i] * v[i];
        }
        const double sigma = std::copysign(std::sqrt(norm2), v[k + 1]);
        v[k + 1] += sigma;
        double vnorm2 = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) vnorm2 += v[i] * v[i];
        if (vnorm2 == 0.0) continue;
        const double beta = 2.0 / vnorm2;
        // Left multiply by P = I - beta v v'.
        for (std::size_t j = k; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = k + 1; i < n; ++i) s += v[i] * H(i, j);
            s *= beta;
            for (std::size_t i = k + 1; i < n; ++i) H(i, j) -= s * v[i];
        }
        // Right multiply by P.
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) s += H(i, j) * v[j];
            s *= beta;
            for (std::size_t j = k + 1; j < n; ++j) H(i, j) -= s * v[j];
        }
        // The transform annihilates these entries analytically; make it exact.
        H(k + 1, k) = -sigma * scale;
        for (std::size_t i = k + 2; i < n; ++i) H(i, k) = 0.0;
    }
}

/// Implicit double-shift QR on an upper Hessenberg matrix, in place.
/// Classic bulge-chasing iteration with exceptional shifts every ten
/// stalled sweeps. Deflation threshold and sweep budget per the header.
void hqr_eigenvalues(std::vector<double>& h, std::size_t dim, std::vector<double>& wr,
                     std::vector<double>& wi) {
    const int n = static_cast<int>(dim);
    auto H = [&](int i, int j) -> double& { return h[static_cast<std::size_t>(i) * dim + j]; };

    double anorm = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = std::max(0, i - 1); j < n; ++j) row += std::fabs(H(i, j));
        anorm = std::max(anorm, row);
    }
    const double thresh = std::max(1e-12 * anorm, std::numeric_limits<double>::min());
    const long sweep_budget = 100L * n;
    long sweeps = 0;

    int nn = n - 1;
    double t = 0.0;  // accumulated exceptional shifts
    while (nn >= 0) {
        int its = 0;
        for (;;) {
            int l;
            for (l = nn; l >= 1; --l) {
                if (std::fabs(H(l, l - 1)) <= thresh) {
                    H(l, l - 1) = 0.0;
                    break;
                }
            }
            if (l < 0) l = 0;
            double x = H(nn, nn);
            if (l == nn) {  // isolated 1x1 block
                wr[nn] = x + t;
                wi[nn] = 0.0;
                --nn;
                break;
            }
            double y = H(nn - 1, nn - 1);
            double w = H(nn, nn - 1) * H(nn - 1, nn);
            if (l == nn - 1) {  // isolated 2x2 block
                double p = 0.5 * (y - x);
                const double q = p * p + w;
                double z = std::sqrt(std::fabs(q));
                x += t;
                if (q >= 0.0) {  // real pair
                    z = p + std::copysign(z, p);
                    wr[nn - 1] = wr[nn] = x + z;
                    if (z != 0.0) wr[nn] = x - w / z;
                    wi[nn - 1] = wi[nn] = 0.0;
                } else {  // conjugate pair
                    wr[nn - 1] = wr[nn] = x + p;
                    wi[nn - 1] = z;
                    wi[nn] = -z;
                }
                nn -= 2;
                break;
            }
            if (++sweeps > sweep_budget)
                throw NoConvergence("eigenvalues: QR sweep budget exhausted after " +
                                    std::to_string(sweeps - 1) + " sweeps");
            if (its == 10 || its == 20 || (its > 20 && its % 10 == 0)) {
                t += x;
                for (int i = 0; i <= nn; ++i) H(i, i) -= x;
                const double s = std::fabs(H(nn, nn - 1)) + std::fabs(H(nn - 1, nn - 2));
                y = x = 0.75 * s;
                w = -0.4375 * s * s;
            }
            ++its;

            double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
            int m;
            for (m = nn - 2; m >= l; --m) {  // bulge start row
                z = H(m, m);
                double rr = x - z;
                double ss = y - z;
                p = (rr * ss - w) / H(m + 1, m) + H(m, m + 1);
                q = H(m + 1, m + 1) - z - rr - ss;
                r = H(m + 2, m + 1);
                const double scale = std::fabs(p) + std::fabs(q) + std::fabs(r);
                p /= scale;
                q /= scale;
                r /= scale;
                if (m == l) break;
                const double u = std::fabs(H(m, m - 1)) * (std::fabs(q) + std::fabs(r));
                const double v = std::fabs(p) * (std::fabs(H(m - 1, m - 1)) + std::fabs(z) +
                                                 std::fabs(H(m + 1, m + 1)));
                if (u <= std::numeric_limits<double>::epsilon() * v) break;
            }
            for (int i = m + 2; i <= nn; ++i) {
                H(i, i - 2) = 0.0;
                if (i != m + 2) H(i, i - 3) = 0.0;
            }
            for (int k = m; k <= nn - 1; ++k) {  // chase the bulge down
                if (k != m) {
                    p = H(k, k - 1);
                    q = H(k + 1, k - 1);
                    r = (k != nn - 1) ? H(k + 2, k - 1) : 0.0;
                    x = std::fabs(p) + std::fabs(q) + std::fabs(r);
                    if (x != 0.0) {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                const double s = std::copysign(std::sqrt(p * p + q * q + r * r), p);
                if (s == 0.0) continue;
                if (k == m) {
                    if (l != m) H(k, k - 1) = -H(k, k - 1);
                } else {
                    H(k, k - 1) = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                z = r / s;
                q /= p;
                r /= p;
                for (int j = k; j <= nn; ++j) {
                    double pp = H(k, j) + q * H(k + 1, j);
                    if (k != nn - 1) {
                        pp += r * H(k + 2, j);
                        H(k + 2, j) -= pp * z;
                    }
                    H(k + 1, j) -= pp * y;
                    H(k, j) -= pp * x;
                }
                const int mmin = (nn < k + 3) ? nn : k + 3;
                for (int i = l; i <= mmin; ++i) {
                    double pp = x * H(i, k) + y * H(i, k + 1);
                    if (k != nn - 1) {
                        pp += z * H(i, k + 2);
                        H(i, k + 2) -= pp * r;
                    }
                    H(i, k + 1) -= pp * q;
                    H(i, k) -= pp;
                }
            }
        }
    }
}

}  // namespace

ComplexSpectrum eigenvalues(const DenseMatrix& input) {
    const std::size_t n = input.size();
    if (n == 0) throw std::invalid_argument("eigenvalues: empty matrix");
    if (n > kMaxEigenDim) throw std::invalid_argument("eigenvalues: dimension exceeds limit");
    if (input.a.size() != n * n) throw std::invalid_argument("eigenvalues: shape mismatch");
    if (!kernels::all_finite(input.a))
        throw std::invalid_argument("eigenvalues: non-finite entries");

    ComplexSpectrum result;
    if (n == 1) {
        result.eigenvalues.emplace_back(input.at(0, 0), 0.0);
        return result;
    }

    std::vector<double> h = input.a;
    hessenberg_reduce(h, n);
    std::vector<double> wr(n, 0.0), wi(n, 0.0);
    hqr_eigenvalues(h, n, wr, wi);

    result.eigenvalues.reserve(n);
    for (std::size_t i = 0; i < n; ++i) result.eigenvalues.emplace_back(wr[i], wi[i]);
    std::sort(result.eigenvalues.begin(), result.eigenvalues.end(),
              [](const std::complex<double>& a, const std::complex<double>& b) {
                  if (a.real() != b.real()) return a.real() < b.real();
                  return a.imag() < b.imag();
              });
    return result;
}

double spectral_radius(const ComplexSpectrum& s) {
    if (s.eigenvalues.empty()) throw EmptySpectrum("spectral_radius: empty spectrum");
    double m = 0.0;
    for (const auto& ev : s.eigenvalues) m = std::max(m, std::abs(ev));
    return m;
}

double matrix_inf_norm(const DenseMatrix& a) {
    if (a.size() == 0) throw std::invalid_argument("matrix_inf_norm: empty matrix");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) row += std::fabs(a.at(i, j));
        m = std::max(m, row);
    }
    return m;
}

}  // namespace rdlab::linalg
