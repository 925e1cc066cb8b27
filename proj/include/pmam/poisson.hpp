#pragma once

// Solutions of (I - P) X = I - e piᵀ built from a censored chain: the
// particular solution X̃, the deviation matrix D, the anchored matrix K and
// forcing-function application.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pmam/censor.hpp"
#include "pmam/config.hpp"
#include "pmam/linalg.hpp"

namespace pmam {

struct PoissonDiagnostics {
    double residual_norm = 0.0;
    std::size_t residual_rows = 0;  // rows the residual was measured on
    double tail_mass = 0.0;
    std::size_t g_iterations = 0;
    std::size_t levels = 0;
    std::size_t horizon = 0;
    std::vector<std::string> warnings;
};

/// Every matrix and vector is indexed in model order.
struct PoissonSolution {
    DenseVector pi;
    DenseMatrix x_tilde;
    std::optional<DenseMatrix> d;
    std::optional<DenseMatrix> k;
    std::optional<std::size_t> anchor;
    std::optional<DenseVector> g;
    std::optional<DenseVector> f_d;
    std::optional<DenseVector> f_k;
    double pi_abs_g = 0.0;
    PoissonDiagnostics diagnostics;
};

class ForcingFunction {
public:
    enum class Kind { Table, LevelTimesPhase, SqrtLevel };

    /// "level-times-phase" (g(i,j) = i*j, phases numbered from 1) or
    /// "sqrt-level" (g(i,j) = sqrt(i)).
    static ForcingFunction builtin(const std::string& name);
    static ForcingFunction table(std::vector<double> values);

    Kind kind() const noexcept { return kind_; }
    std::string name() const;
    const std::vector<double>& table_values() const noexcept { return table_; }

    /// Values on states 0..n-1, where state s is (level s / m, phase s % m).
    DenseVector values(std::size_t n, std::size_t block_size = 1) const;

private:
    Kind kind_ = Kind::Table;
    std::vector<double> table_;
};

struct ForcingResult {
    DenseVector f;
    double pi_g = 0.0;
    double pi_abs_g = 0.0;
};

inline constexpr double kForcingOverflowGuard = 1e100;

/// f = X gbar with gbar = g - (piᵀg) e, evaluated as X g - (piᵀg) X e.
ForcingResult apply_forcing(const DenseMatrix& x, const DenseVector& g, const DenseVector& pi);

/// ‖(I - P) X - (I - e piᵀ)‖∞ over all rows.
double residual(const DenseMatrix& p, const DenseMatrix& x, const DenseVector& pi);

/// Same, restricted to the given rows.
double residual_on_rows(const DenseMatrix& p, const DenseMatrix& x, const DenseVector& pi,
                        const std::vector<std::size_t>& rows);

/// Rows of P whose sum is 1 within 1e-12. For a plain truncation these are
/// the rows on which Poisson's equation still holds exactly.
std::vector<std::size_t> full_mass_rows(const DenseMatrix& p);

/// Period of the chain on its positive-entry graph (1 = aperiodic).
std::size_t period(const DenseMatrix& p);

/// N_A stacked over N_B, reordered to model order.
DenseMatrix visit_matrix_N(const DenseMatrix& p, const Partition& part, const DenseVector& pi,
                           const SolverConfig& cfg = {});

/// X̃ with its residual diagnostics. Throws ResidualTooLarge when the residual
/// on full-mass rows exceeds cfg.residual_tolerance.
PoissonSolution solve_xtilde_detailed(const DenseMatrix& p, const Partition& part, const DenseVector& pi,
                                      const SolverConfig& cfg = {});

DenseMatrix solve_xtilde(const DenseMatrix& p, const Partition& part, const DenseVector& pi,
                         const SolverConfig& cfg = {});

/// D = X̃ - e (piᵀX̃). Throws PeriodicChain for periodic chains.
DenseMatrix deviation_matrix(const DenseMatrix& p, const Partition& part, const DenseVector& pi,
                             const SolverConfig& cfg = {});

/// K = X̃ - e X̃(alpha, ·). alpha must lie in the censor set.
DenseMatrix additive_matrix(const DenseMatrix& p, const Partition& part, const DenseVector& pi,
                            std::size_t alpha, const SolverConfig& cfg = {});

DenseMatrix centered(const DenseMatrix& x, const DenseVector& pi);
DenseMatrix anchored(const DenseMatrix& x, std::size_t alpha);

/// Fills d, k, f_d and f_k of a solution that already has pi and x_tilde.
void complete_solution(PoissonSolution& sol, std::optional<std::size_t> anchor,
                       const std::optional<DenseVector>& g);

/// pi by censoring, X̃, and optionally D, K and the two forcing solutions.
PoissonSolution solve_poisson(const DenseMatrix& p, const Partition& part, const SolverConfig& cfg = {},
                              std::optional<std::size_t> anchor = std::nullopt,
                              const std::optional<DenseVector>& g = std::nullopt);

}  // namespace pmam
