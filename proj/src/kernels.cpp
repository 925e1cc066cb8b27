#include "pmam/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "pmam/linalg.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace pmam::kernels {

namespace {

// i-k-j ordering: each output row accumulates a(i,k) * b(k,:) for increasing k,
// so the summation order per entry does not depend on how rows are scheduled.
void multiply_impl(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c, bool parallel) {
    const std::size_t n = a.rows();
    const std::size_t inner = a.cols();
    const std::size_t m = b.cols();
    c = DenseMatrix(n, m);
    const double* ap = a.values().data();
    const double* bp = b.values().data();
    double* cp = c.values().data();
    const bool go_parallel = parallel && n > 1 && n * inner * m >= kParallelWorkThreshold;
    const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (go_parallel)
    for (std::ptrdiff_t is = 0; is < rows; ++is) {
        const auto i = static_cast<std::size_t>(is);
        double* ci = cp + i * m;
        for (std::size_t k = 0; k < inner; ++k) {
            const double aik = ap[i * inner + k];
            if (aik == 0.0) continue;
            const double* bk = bp + k * m;
            for (std::size_t j = 0; j < m; ++j) ci[j] += aik * bk[j];
        }
    }
}

bool lu_factor_impl(DenseMatrix& a, std::vector<std::size_t>& perm, double pivot_tolerance,
                    bool parallel) {
    const std::size_t n = a.rows();
    perm.resize(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::vector<double> scale(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (double v : a.row(i)) scale[i] = std::max(scale[i], std::abs(v));

    double* ap = a.values().data();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(ap[k * n + k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(ap[i * n + k]);
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (!(best > pivot_tolerance * scale[piv]) || best == 0.0) return false;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(ap[k * n + j], ap[piv * n + j]);
            std::swap(perm[k], perm[piv]);
            std::swap(scale[k], scale[piv]);
        }
        const double pivot = ap[k * n + k];
        const std::size_t remaining = n - k - 1;
        const bool go_parallel = parallel && remaining * remaining >= kParallelWorkThreshold;
        const auto first = static_cast<std::ptrdiff_t>(k + 1);
        const auto last = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (go_parallel)
        for (std::ptrdiff_t is = first; is < last; ++is) {
            const auto i = static_cast<std::size_t>(is);
            double* ri = ap + i * n;
            const double l = ri[k] / pivot;
            ri[k] = l;
            if (l == 0.0) continue;
            const double* rk = ap + k * n;
            for (std::size_t j = k + 1; j < n; ++j) ri[j] -= l * rk[j];
        }
    }
    return true;
}

void lu_solve_impl(const DenseMatrix& lu, std::span<const std::size_t> perm, DenseMatrix& rhs,
                   bool parallel) {
    const std::size_t n = lu.rows();
    const std::size_t ncols = rhs.cols();
    const double* lp = lu.values().data();
    double* bp = rhs.values().data();
    const bool go_parallel = parallel && ncols > 1 && n * n * ncols >= kParallelWorkThreshold;
    const auto cols = static_cast<std::ptrdiff_t>(ncols);
#pragma omp parallel if (go_parallel)
    {
        std::vector<double> x(n);
#pragma omp for schedule(static)
        for (std::ptrdiff_t cs = 0; cs < cols; ++cs) {
            const auto c = static_cast<std::size_t>(cs);
            for (std::size_t i = 0; i < n; ++i) x[i] = bp[perm[i] * ncols + c];
            for (std::size_t i = 0; i < n; ++i) {
                double s = x[i];
                for (std::size_t j = 0; j < i; ++j) s -= lp[i * n + j] * x[j];
                x[i] = s;
            }
            for (std::size_t ii = n; ii-- > 0;) {
                double s = x[ii];
                for (std::size_t j = ii + 1; j < n; ++j) s -= lp[ii * n + j] * x[j];
                x[ii] = s / lp[ii * n + ii];
            }
            for (std::size_t i = 0; i < n; ++i) bp[i * ncols + c] = x[i];
        }
    }
}

}  // namespace

int max_threads() noexcept {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void multiply(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c) {
    multiply_impl(a, b, c, true);
}

bool lu_factor(DenseMatrix& a, std::vector<std::size_t>& perm, double pivot_tolerance) {
    return lu_factor_impl(a, perm, pivot_tolerance, true);
}

void lu_solve(const DenseMatrix& lu, std::span<const std::size_t> perm, DenseMatrix& rhs) {
    lu_solve_impl(lu, perm, rhs, true);
}

namespace serial {

void multiply(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c) {
    multiply_impl(a, b, c, false);
}

bool lu_factor(DenseMatrix& a, std::vector<std::size_t>& perm, double pivot_tolerance) {
    return lu_factor_impl(a, perm, pivot_tolerance, false);
}

void lu_solve(const DenseMatrix& lu, std::span<const std::size_t> perm, DenseMatrix& rhs) {
    lu_solve_impl(lu, perm, rhs, false);
}

}  // namespace serial

}  // namespace pmam::kernels
