#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "rdlab/errors.hpp"

/// Dense and tridiagonal linear-algebra kernels: direct tridiagonal solve,
/// Hessenberg reduction with shifted-QR eigenvalues, norms, spectral radius.
namespace rdlab::linalg {

/// Square tridiagonal matrix stored by bands.
/// sub and super hold n-1 entries, diag holds n; all entries finite.
struct TridiagonalMatrix {
    std::vector<double> sub;
    std::vector<double> diag;
    std::vector<double> super;

    [[nodiscard]] std::size_t size() const noexcept { return diag.size(); }
};

/// Square dense matrix, row-major.
struct DenseMatrix {
    std::size_t n = 0;
    std::vector<double> a;

    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t dim) : n(dim), a(dim * dim, 0.0) {}

    [[nodiscard]] static DenseMatrix identity(std::size_t dim) {
        DenseMatrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) m.at(i, i) = 1.0;
        return m;
    }

    [[nodiscard]] static DenseMatrix from_tridiagonal(const TridiagonalMatrix& t) {
        DenseMatrix m(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (i > 0) m.at(i, i - 1) = t.sub[i - 1];
            m.at(i, i) = t.diag[i];
            if (i + 1 < t.size()) m.at(i, i + 1) = t.super[i];
        }
        return m;
    }

    double& at(std::size_t i, std::size_t j) { return a[i * n + j]; }
    [[nodiscard]] double at(std::size_t i, std::size_t j) const { return a[i * n + j]; }

    [[nodiscard]] std::size_t size() const noexcept { return n; }
};

/// Eigenvalue multiset of a real matrix; closed under conjugation and
/// sorted lexicographically by (re, im) for deterministic snapshots.
struct ComplexSpectrum {
    std::vector<std::complex<double>> eigenvalues;
};

/// Magnitude floor below which an elimination pivot counts as zero.
inline constexpr double kPivotFloor = 1e-14;

/// Direct solve of A x = rhs by unpivoted elimination on the bands.
/// The coefficient matrix is never inverted explicitly.
/// Throws ZeroPivot when a pivot magnitude falls below kPivotFloor.
[[nodiscard]] std::vector<double> thomas_solve(const TridiagonalMatrix& a,
                                               std::span<const double> rhs);

/// Maximum active-block dimension accepted by eigenvalues().
inline constexpr std::size_t kMaxEigenDim = 2048;

/// All eigenvalues of a real square matrix: Householder reduction to upper
/// Hessenberg form followed by implicit double-shift QR with 2x2 deflation.
/// Subdiagonal entries deflate below 1e-12 * the Hessenberg infinity norm.
/// Throws NoConvergence when deflation stalls past 100 * n QR sweeps.
[[nodiscard]] ComplexSpectrum eigenvalues(const DenseMatrix& input);

/// max |lambda| over the spectrum. Throws EmptySpectrum.
[[nodiscard]] double spectral_radius(const ComplexSpectrum& s);

/// Max row sum of absolute entries.
[[nodiscard]] double matrix_inf_norm(const DenseMatrix& a);

}  // namespace rdlab::linalg
