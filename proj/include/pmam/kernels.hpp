#pragma once

// Compute kernels behind DenseMatrix arithmetic and LuDecomposition.
//
// The top-level functions are OpenMP-parallel. Every parallel loop partitions
// independent outputs (result rows, elimination rows, right-hand-side columns)
// and keeps the per-output summation order of the serial code, so results are
// bitwise identical to the `serial` reference regardless of thread count.

#include <cstddef>
#include <span>
#include <vector>

namespace pmam {
class DenseMatrix;
}

namespace pmam::kernels {

/// Below this many multiply-adds a kernel stays on the calling thread.
inline constexpr std::size_t kParallelWorkThreshold = 1 << 15;

int max_threads() noexcept;

/// c = a * b; c is resized.
void multiply(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c);

/// In-place LU factorization with partial pivoting. Returns false when the
/// best pivot is at or below pivot_tolerance times the largest absolute entry
/// of the original row it came from.
bool lu_factor(DenseMatrix& a, std::vector<std::size_t>& perm, double pivot_tolerance);

/// Overwrites rhs with the solution of (L U) x = P rhs, one column at a time.
void lu_solve(const DenseMatrix& lu, std::span<const std::size_t> perm, DenseMatrix& rhs);

namespace serial {

void multiply(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c);
bool lu_factor(DenseMatrix& a, std::vector<std::size_t>& perm, double pivot_tolerance);
void lu_solve(const DenseMatrix& lu, std::span<const std::size_t> perm, DenseMatrix& rhs);

}  // namespace serial

}  // namespace pmam::kernels
