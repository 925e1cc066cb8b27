#include "pmam/poisson.hpp"

#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "pmam/error.hpp"

namespace pmam {

namespace {

constexpr double kFullMassSlack = 1e-12;

// Rows and columns of a partition-ordered matrix moved back to model order.
DenseMatrix to_model_order(const DenseMatrix& partitioned, const Partition& part, bool rows, bool cols) {
    std::vector<std::size_t> order(part.a());
    order.insert(order.end(), part.b().begin(), part.b().end());
    DenseMatrix out(partitioned.rows(), partitioned.cols());
    for (std::size_t i = 0; i < partitioned.rows(); ++i) {
        const std::size_t oi = rows ? order[i] : i;
        for (std::size_t j = 0; j < partitioned.cols(); ++j) out(oi, cols ? order[j] : j) = partitioned(i, j);
    }
    return out;
}

DenseVector to_partition_order(const DenseVector& v, const Partition& part) {
    DenseVector out(v.size());
    std::size_t k = 0;
    for (std::size_t s : part.a()) out[k++] = v[s];
    for (std::size_t s : part.b()) out[k++] = v[s];
    return out;
}

struct NBlocks {
    DenseMatrix n_a;  // na x n, partition-ordered columns
    DenseMatrix n_b;  // nb x n
};

NBlocks build_n(const CensoredChain& chain, const DenseVector& pi_part, std::size_t na, std::size_t nb) {
    const std::size_t n = na + nb;
    // [I, P_AB Ĥ] - (e + P_AB Ĥ e) piᵀ
    DenseMatrix n_a = hcat(DenseMatrix::identity(na), chain.exit_ab);
    DenseVector lead = DenseVector::ones(na) + chain.exit_ab.row_sums();
    n_a -= outer(lead, pi_part);
    // [O, Ĥ] - Ĥ e piᵀ
    DenseMatrix n_b(nb, n);
    if (nb > 0) {
        n_b.set_block(0, na, chain.hat_bb);
        n_b -= outer(chain.hat_bb.row_sums(), pi_part);
    }
    return {std::move(n_a), std::move(n_b)};
}

void check_pi(const DenseVector& pi, std::size_t n) {
    if (pi.size() != n)
        throw Error(ErrorCode::DimensionMismatch,
                    "stationary vector has " + std::to_string(pi.size()) + " entries for " + std::to_string(n) +
                        " states");
    if (!pi.all_finite()) throw Error(ErrorCode::NonFinite, "stationary vector has non-finite entries");
}

}  // namespace

ForcingFunction ForcingFunction::builtin(const std::string& name) {
    ForcingFunction f;
    if (name == "level-times-phase") {
        f.kind_ = Kind::LevelTimesPhase;
    } else if (name == "sqrt-level") {
        f.kind_ = Kind::SqrtLevel;
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown forcing function '" + name + "'");
    }
    return f;
}

ForcingFunction ForcingFunction::table(std::vector<double> values) {
    ForcingFunction f;
    f.kind_ = Kind::Table;
    for (double v : values)
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "forcing table has non-finite entries");
    f.table_ = std::move(values);
    return f;
}

std::string ForcingFunction::name() const {
    switch (kind_) {
        case Kind::LevelTimesPhase: return "level-times-phase";
        case Kind::SqrtLevel: return "sqrt-level";
        case Kind::Table: return "table";
    }
    return "table";
}

DenseVector ForcingFunction::values(std::size_t n, std::size_t block_size) const {
    if (block_size == 0) throw Error(ErrorCode::InvalidArgument, "block size must be positive");
    DenseVector g(n);
    for (std::size_t s = 0; s < n; ++s) {
        const auto level = static_cast<double>(s / block_size);
        const auto phase = static_cast<double>(s % block_size + 1);
        switch (kind_) {
            case Kind::LevelTimesPhase: g[s] = level * phase; break;
            case Kind::SqrtLevel: g[s] = std::sqrt(level); break;
            case Kind::Table:
                if (s >= table_.size())
                    throw Error(ErrorCode::DimensionMismatch, "forcing table has " + std::to_string(table_.size()) +
                                                                  " entries for " + std::to_string(n) + " states");
                g[s] = table_[s];
                break;
        }
    }
    return g;
}

ForcingResult apply_forcing(const DenseMatrix& x, const DenseVector& g, const DenseVector& pi) {
    if (x.cols() != g.size() || g.size() != pi.size())
        throw Error(ErrorCode::DimensionMismatch, "forcing function, solution and pi sizes differ");
    ForcingResult out;
    for (std::size_t i = 0; i < g.size(); ++i) {
        out.pi_abs_g += pi[i] * std::abs(g[i]);
        out.pi_g += pi[i] * g[i];
    }
    if (!std::isfinite(out.pi_abs_g) || out.pi_abs_g > kForcingOverflowGuard)
        throw Error(ErrorCode::DivergentForcing, "pi^T|g| exceeds the overflow guard");
    out.f = x * g;
    const DenseVector xe = x.row_sums();
    for (std::size_t i = 0; i < out.f.size(); ++i) out.f[i] -= out.pi_g * xe[i];
    return out;
}

double residual_on_rows(const DenseMatrix& p, const DenseMatrix& x, const DenseVector& pi,
                        const std::vector<std::size_t>& rows) {
    const std::size_t n = p.rows();
    if (!p.square() || x.rows() != n || x.cols() != n || pi.size() != n)
        throw Error(ErrorCode::DimensionMismatch, "residual: shapes are not conformable");
    const DenseMatrix px = p * x;
    double worst = 0.0;
    for (std::size_t i : rows) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double lhs = x(i, j) - px(i, j);
            const double rhs = (i == j ? 1.0 : 0.0) - pi[j];
            s += std::abs(lhs - rhs);
        }
        worst = std::max(worst, s);
    }
    return worst;
}

double residual(const DenseMatrix& p, const DenseMatrix& x, const DenseVector& pi) {
    std::vector<std::size_t> rows(p.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return residual_on_rows(p, x, pi, rows);
}

std::vector<std::size_t> full_mass_rows(const DenseMatrix& p) {
    std::vector<std::size_t> rows;
    const DenseVector s = p.row_sums();
    for (std::size_t i = 0; i < s.size(); ++i)
        if (std::abs(1.0 - s[i]) <= kFullMassSlack) rows.push_back(i);
    return rows;
}

std::size_t period(const DenseMatrix& p) {
    const std::size_t n = p.rows();
    if (n == 0) return 1;
    constexpr std::size_t unseen = static_cast<std::size_t>(-1);
    std::vector<std::size_t> level(n, unseen);
    std::queue<std::size_t> frontier;
    level[0] = 0;
    frontier.push(0);
    std::size_t d = 0;
    while (!frontier.empty()) {
        const std::size_t u = frontier.front();
        frontier.pop();
        for (std::size_t v = 0; v < n; ++v) {
            if (p(u, v) <= 0.0) continue;
            if (level[v] == unseen) {
                level[v] = level[u] + 1;
                frontier.push(v);
            } else {
                const auto diff = static_cast<long long>(level[u]) + 1 - static_cast<long long>(level[v]);
                d = std::gcd(d, static_cast<std::size_t>(std::llabs(diff)));
            }
        }
    }
    return d == 0 ? n : d;
}

DenseMatrix visit_matrix_N(const DenseMatrix& p, const Partition& part, const DenseVector& pi,
                           const SolverConfig& cfg) {
    check_pi(pi, p.rows());
    const CensoredChain chain = censor_dtmc(p, part, cfg.pivot_tolerance);
    const std::size_t na = part.a().size();
    const std::size_t nb = part.b().size();
    NBlocks nb_blocks = build_n(chain, to_partition_order(pi, part), na, nb);
    DenseMatrix stacked(na + nb, na + nb);
    stacked.set_block(0, 0, nb_blocks.n_a);
    stacked.set_block(na, 0, nb_blocks.n_b);
    return to_model_order(stacked, part, true, true);
}

PoissonSolution solve_xtilde_detailed(const DenseMatrix& p, const Partition& part, const DenseVector& pi,
                                      const SolverConfig& cfg) {
    check_pi(pi, p.rows());
    const CensoredChain chain = censor_dtmc(p, part, cfg.pivot_tolerance);
    const std::size_t na = part.a().size();
    const std::size_t nb = part.b().size();
    const DenseVector pi_part = to_partition_order(pi, part);
    const NBlocks nblk = build_n(chain, pi_part, na, nb);

    const DenseMatrix w = group_inverse(chain.p_cens, chain.pi_cens, cfg.pivot_tolerance);
    const DenseMatrix x_a = w * nblk.n_a;
    DenseMatrix stacked(na + nb, na + nb);
    stacked.set_block(0, 0, x_a);
    if (nb > 0) {
        const DenseMatrix p_ba = p.gather(part.b(), part.a());
        stacked.set_block(na, 0, chain.hat_bb * (p_ba * x_a) + nblk.n_b);
    }

    PoissonSolution sol;
    sol.pi = pi;
    sol.x_tilde = to_model_order(stacked, part, true, true);
    const std::vector<std::size_t> rows = full_mass_rows(p);
    sol.diagnostics.residual_rows = rows.size();
    sol.diagnostics.residual_norm = residual_on_rows(p, sol.x_tilde, pi, rows);
    sol.diagnostics.tail_mass = chain.tail_mass;
    sol.diagnostics.warnings = chain.warnings;
    if (rows.size() < p.rows()) {
        std::ostringstream msg;
        msg << "residual measured on " << rows.size() << " of " << p.rows() << " rows (truncated model)";
        sol.diagnostics.warnings.push_back(msg.str());
    }
    if (!(sol.diagnostics.residual_norm <= cfg.residual_tolerance)) {
        std::ostringstream msg;
        msg << "Poisson residual " << sol.diagnostics.residual_norm << " exceeds " << cfg.residual_tolerance;
        throw Error(ErrorCode::ResidualTooLarge, msg.str());
    }
    return sol;
}

DenseMatrix solve_xtilde(const DenseMatrix& p, const Partition& part, const DenseVector& pi,
                         const SolverConfig& cfg) {
    return solve_xtilde_detailed(p, part, pi, cfg).x_tilde;
}

DenseMatrix centered(const DenseMatrix& x, const DenseVector& pi) {
    const DenseVector beta = left_multiply(pi, x);
    return x - outer(DenseVector::ones(x.rows()), beta);
}

DenseMatrix anchored(const DenseMatrix& x, std::size_t alpha) {
    if (alpha >= x.rows()) throw Error(ErrorCode::AnchorNotInA, "anchor state out of range");
    const DenseVector beta = x.row_vector(alpha);
    DenseMatrix k = x - outer(DenseVector::ones(x.rows()), beta);
    for (double& v : k.row(alpha)) v = 0.0;
    return k;
}

DenseMatrix deviation_matrix(const DenseMatrix& p, const Partition& part, const DenseVector& pi,
                             const SolverConfig& cfg) {
    const std::size_t d = period(p);
    if (d != 1) throw Error(ErrorCode::PeriodicChain, "chain has period " + std::to_string(d));
    return centered(solve_xtilde(p, part, pi, cfg), pi);
}

DenseMatrix additive_matrix(const DenseMatrix& p, const Partition& part, const DenseVector& pi,
                            std::size_t alpha, const SolverConfig& cfg) {
    if (part.position_in_a(alpha) == part.state_count())
        throw Error(ErrorCode::AnchorNotInA, "anchor state " + std::to_string(alpha) + " is not in the censor set");
    return anchored(solve_xtilde(p, part, pi, cfg), alpha);
}

void complete_solution(PoissonSolution& sol, std::optional<std::size_t> anchor,
                       const std::optional<DenseVector>& g) {
    sol.d = centered(sol.x_tilde, sol.pi);
    if (anchor) {
        sol.anchor = anchor;
        sol.k = anchored(sol.x_tilde, *anchor);
    }
    if (g) {
        sol.g = g;
        ForcingResult fd = apply_forcing(*sol.d, *g, sol.pi);
        sol.f_d = std::move(fd.f);
        sol.pi_abs_g = fd.pi_abs_g;
        if (sol.k) sol.f_k = apply_forcing(*sol.k, *g, sol.pi).f;
    }
}

PoissonSolution solve_poisson(const DenseMatrix& p, const Partition& part, const SolverConfig& cfg,
                              std::optional<std::size_t> anchor, const std::optional<DenseVector>& g) {
    if (anchor && part.position_in_a(*anchor) == part.state_count())
        throw Error(ErrorCode::AnchorNotInA, "anchor state " + std::to_string(*anchor) + " is not in the censor set");
    const DenseVector pi = stationary_via_censoring(p, part, cfg.pivot_tolerance);
    PoissonSolution sol = solve_xtilde_detailed(p, part, pi, cfg);
    const std::size_t d = period(p);
    complete_solution(sol, anchor, g);
    if (d != 1) {
        sol.d.reset();
        sol.f_d.reset();
        sol.diagnostics.warnings.push_back("chain has period " + std::to_string(d) + "; D is not defined");
        if (g) sol.pi_abs_g = apply_forcing(sol.x_tilde, *g, sol.pi).pi_abs_g;
    }
    return sol;
}

}  // namespace pmam
