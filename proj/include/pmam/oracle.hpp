#pragma once

// Brute-force references for the analytic solvers: the deviation series,
// exact taboo expectations and Monte-Carlo estimates of additive functionals.

#include <cstddef>
#include <cstdint>

#include "pmam/linalg.hpp"

namespace pmam {

/// SplitMix64 (Steele, Lea and Flood): 64-bit state advanced by the golden
/// gamma, output through the murmur-style finalizer.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept;
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;

    static std::uint64_t mix(std::uint64_t z) noexcept;

private:
    std::uint64_t state_;
};

/// Σ_n (P^n - e piᵀ), stopped once ‖P^n - e piᵀ‖∞ < tail_tol (1 - rho) with
/// rho the observed one-step contraction. Throws NoConvergence when no
/// contraction shows up within max_steps (periodic chains).
DenseMatrix deviation_by_series(const DenseMatrix& p, const DenseVector& pi, double tail_tol,
                                std::size_t max_steps = 1000000);

/// E_i[τ_target] for every i, with τ the first time >= 1 at the target.
DenseVector expected_hitting_times(const DenseMatrix& p, std::size_t target);

/// K(i,j) = E_i[Σ_{k<τ_α} 1{Φ_k = j}] - pi(j) E_i[τ_α] from the taboo
/// fundamental matrix (I - P restricted to states other than α)^-1.
/// Row α is exactly zero.
DenseMatrix k_by_taboo(const DenseMatrix& p, const DenseVector& pi, std::size_t alpha);

struct SimulationConfig {
    std::size_t path_count = 20000;
    std::size_t max_steps = 1000000;
    std::uint64_t seed = 42;
    double confidence = 0.95;
};

struct SimulationEstimate {
    double estimate = 0.0;
    double half_width = 0.0;
    double std_dev = 0.0;
    std::size_t paths = 0;

    bool contains(double value) const noexcept {
        return value >= estimate - half_width && value <= estimate + half_width;
    }
};

/// Sample mean of Σ_{k<τ_α} gbar(Φ_k) from Φ_0 = start, gbar = g - (piᵀg) e,
/// with a Student-t confidence half-width. Paths run in parallel; path i
/// draws from its own generator seeded from (seed, i), and the sums are
/// accumulated in path order, so the result does not depend on the thread
/// count. Throws PathBudgetExceeded if a path needs more than max_steps steps.
SimulationEstimate simulate_additive(const DenseMatrix& p, const DenseVector& g, std::size_t alpha,
                                     std::size_t start, const SimulationConfig& cfg);

}  // namespace pmam
