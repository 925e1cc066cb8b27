#pragma once

// Block-structured chains of GI/G/1 type.
//
// Level 0 row:  B_0, B_1, B_2, ...
// Level i >= 1: B_{-i} into level 0, A_k into level i + k for i + k >= 1.
//
// With repeat_boundary set, B_{-j} for j beyond the most negative supplied
// index repeats that block, which is the layout of the MAP/G/1 queue with
// negative customers under the RCA rule.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pmam/config.hpp"
#include "pmam/linalg.hpp"
#include "pmam/poisson.hpp"

namespace pmam {

struct BlockSequences {
    std::size_t m = 0;
    std::map<int, DenseMatrix> a;
    std::map<int, DenseMatrix> b;
    bool repeat_boundary = false;
    /// First-passage blocks G_1..G_K; required when A has jumps below -1.
    std::vector<DenseMatrix> g_list;

    DenseMatrix a_block(int i) const;
    DenseMatrix b_block(int i) const;
    int a_min() const;
    int a_max() const;
    int b_min() const;
    int b_max() const;

    /// A_i = 0 for i < -1.
    bool is_mg1() const;
    /// A_i = B_i = 0 for i > 1.
    bool is_gim1() const;

    /// Shapes, finiteness, nonnegativity and the row-sum conditions: the
    /// level-0 row and every level row B_{-j} + Σ_{i>=1-j} A_i stochastic
    /// within 1e-8, Σ A_i substochastic.
    void validate() const;

    /// Dense transition matrix over levels 0..levels.
    DenseMatrix expand_dense(std::size_t levels, TruncationMode mode = TruncationMode::Plain) const;
};

/// Repeating column B_{-2} below level 2, M/G/1-type interior. Expects
/// B_{-2}, B_{-1}, B_0, B_1, ... and A_{-1}, A_0, A_1, ...
BlockSequences build_map_g1_rca(std::map<int, DenseMatrix> b_blocks, std::map<int, DenseMatrix> a_blocks);

struct GIteration {
    DenseMatrix g;
    std::size_t iterations = 0;
    double last_step = 0.0;
    double error_estimate = 0.0;  // last_step / (1 - r), r the ratio of the last two steps
};

/// One step Σ_{n>=-1} A_n G^{n+1}.
DenseMatrix g_step(const std::map<int, DenseMatrix>& a_blocks, const DenseMatrix& g);

/// Iterates from G = O until ‖G[k+1] - G[k]‖∞ < epsilon.
GIteration iterate_G(const std::map<int, DenseMatrix>& a_blocks, double epsilon, std::size_t max_iterations);

struct Measures {
    std::vector<DenseMatrix> g;   // G_1..G_K
    DenseMatrix psi0;
    DenseMatrix u;                // (I - Psi0)^-1
    std::vector<DenseMatrix> r;   // r[i-1] = R_i
    std::vector<DenseMatrix> r0;  // r0[i-1] = R_{0,i}

    DenseMatrix r_at(std::size_t i) const;
    DenseMatrix r0_at(std::size_t i) const;
    std::size_t m() const noexcept { return psi0.rows(); }
};

/// R-measures and Psi0 from a list of G-measures via the balance relations
/// R_i (I - Psi0) = A_i + Σ_k R_{i+k} (I - Psi0) G_k.
Measures measures_from_G(const BlockSequences& model, std::vector<DenseMatrix> g_list,
                         double pivot_tolerance = kDefaultPivotTolerance);

/// M/G/1 shape: G_1 = G and no longer downward jumps.
Measures mg1_measures(const BlockSequences& model, const DenseMatrix& g,
                      double pivot_tolerance = kDefaultPivotTolerance);

/// Blocks Ĥ_ij of the fundamental matrix of the repeating part, levels
/// numbered from 1, filled column by column.
class HatH {
public:
    HatH(const Measures& measures, std::size_t rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    const DenseMatrix& operator()(std::size_t i, std::size_t j) const;

    /// Adds column cols()+1 and returns the largest block norm in it.
    double add_column();
    void extend_to(std::size_t cols);

    /// Largest gap between the G-form and R-form of the diagonal blocks.
    double diagonal_mismatch() const noexcept { return diagonal_mismatch_; }

private:
    std::vector<DenseMatrix> g_;
    std::vector<DenseMatrix> r_;
    DenseMatrix u_;
    std::size_t rows_;
    std::size_t cols_ = 0;
    std::vector<std::vector<DenseMatrix>> columns_;
    double diagonal_mismatch_ = 0.0;
};

/// Ĥ for 1 <= i, j <= levels.
HatH hatH_blocks(const Measures& measures, std::size_t levels);

struct LevelZero {
    std::vector<DenseMatrix> s;  // s[j-1] = Σ_n B_n Ĥ_nj, j = 1..horizon
    DenseMatrix t;               // Σ_j S_j
    DenseMatrix p0;              // P^(0)
    DenseVector pi0_cens;        // stationary vector of P^(0)
    double c = 0.0;              // pi_0 = c pi^(0)
};

LevelZero censor_level_zero(const BlockSequences& model, const HatH& hat_h, std::size_t horizon,
                            double pivot_tolerance = kDefaultPivotTolerance);

/// pi_0 = c pi^(0), then pi_n = pi_0 R_{0,n} + Σ_{k<n} pi_k R_{n-k}.
std::vector<DenseVector> stationary_gig1(const Measures& measures, const LevelZero& level0, std::size_t levels);

struct XBlocks {
    std::vector<std::vector<DenseMatrix>> x;  // x[i][j], 0 <= i, j <= levels
    double x0j_identity_gap = 0.0;            // X̃_00 S_j against the direct formula for X̃_0j
};

XBlocks xtilde_gig1(const BlockSequences& model, const HatH& hat_h, const LevelZero& level0,
                    const std::vector<DenseVector>& pi_blocks, std::size_t levels, std::size_t horizon,
                    double pivot_tolerance = kDefaultPivotTolerance);

struct GIG1Solution {
    SolverConfig config;
    std::size_t levels = 0;
    std::size_t horizon = 0;
    std::size_t g_iterations = 0;
    double g_last_step = 0.0;
    double g_error_estimate = 0.0;  // 0 when G was supplied
    Measures measures;
    std::optional<HatH> hat_h;
    LevelZero level0;
    std::vector<DenseVector> pi_blocks;
    XBlocks x;
    double tail_deficit = 0.0;
    double last_summand = 0.0;
    double residual_norm = 0.0;
    std::size_t residual_rows = 0;
    std::vector<std::string> warnings;

    DenseVector pi() const;
    DenseMatrix x_tilde() const;
};

inline constexpr double kResidualSafetyFactor = 1000.0;

/// Residual bound for a structured solution: cfg.residual_tolerance, raised to
/// kResidualSafetyFactor * (estimated G or R error) * ‖U‖∞ when G or R was iterated.
double structured_residual_tolerance(const GIG1Solution& s);

/// Upper bound of the automatic horizon search, max(10 J, J + 500).
std::size_t horizon_cap(const SolverConfig& cfg);

/// The structured pipeline: G (iterated for M/G/1 shape, user-supplied
/// otherwise), measures, Ĥ, level-0 censoring, pi, X̃ and its residual on the
/// levels whose row mass stays inside the truncation.
GIG1Solution solve_gig1(const BlockSequences& model, const SolverConfig& cfg = {});

/// GI/M/1 specialisation through R: R = A_1 (I - Psi0)^-1,
/// Psi0 = Σ_k R^k A_{-k}, geometric tail pi_j = pi_1 R^{j-1}.
struct GIM1Extras {
    DenseMatrix r;
    std::size_t r_iterations = 0;
    double spectral_radius = 0.0;
};

GIG1Solution gim1_solve(const BlockSequences& model, const SolverConfig& cfg = {}, GIM1Extras* extras = nullptr);

/// Gelfand estimate of the spectral radius by repeated squaring.
double spectral_radius_estimate(const DenseMatrix& m);

struct Algorithm1Result {
    GIG1Solution structured;
    PoissonSolution poisson;
};

/// pi, X̃, D and, with an anchor, K; f_D and f_K when g is given.
PoissonSolution poisson_from_structured(const GIG1Solution& s, std::size_t block_size,
                                        const std::optional<ForcingFunction>& g,
                                        std::optional<std::size_t> anchor);

/// The full pipeline with D, K and, when g is given, f_D and f_K on the
/// retained levels. The anchor must be a level-0 state.
Algorithm1Result algorithm1(const BlockSequences& model, const std::optional<ForcingFunction>& g,
                            std::size_t anchor, const SolverConfig& cfg = {});

}  // namespace pmam
