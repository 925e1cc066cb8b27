#include "pmam/gig1.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pmam/error.hpp"

namespace pmam {

namespace {

constexpr double kRowSumTolerance = 1e-8;

DenseMatrix zeros(std::size_t m) { return DenseMatrix(m, m); }

void check_block(const DenseMatrix& blk, std::size_t m, const std::string& name) {
    if (blk.rows() != m || blk.cols() != m)
        throw Error(ErrorCode::InvalidModel, name + " is not " + std::to_string(m) + "x" + std::to_string(m));
    if (!blk.all_finite()) throw Error(ErrorCode::NonFinite, name + " has non-finite entries");
    for (double v : blk.values())
        if (v < 0.0) throw Error(ErrorCode::InvalidModel, name + " has a negative entry");
}

void check_row_sums(const DenseMatrix& sum, const std::string& what, bool exact) {
    const DenseVector rs = sum.row_sums();
    for (std::size_t k = 0; k < rs.size(); ++k) {
        const bool bad = exact ? std::abs(rs[k] - 1.0) > kRowSumTolerance : rs[k] > 1.0 + kRowSumTolerance;
        if (bad) {
            std::ostringstream msg;
            msg << what << " row " << k << " sums to " << rs[k];
            throw Error(ErrorCode::StochasticityViolation, msg.str());
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// BlockSequences

DenseMatrix BlockSequences::a_block(int i) const {
    const auto it = a.find(i);
    return it == a.end() ? zeros(m) : it->second;
}

DenseMatrix BlockSequences::b_block(int i) const {
    const auto it = b.find(i);
    if (it != b.end()) return it->second;
    if (i < 0 && repeat_boundary && !b.empty() && b.begin()->first < 0 && i < b.begin()->first)
        return b.begin()->second;
    return zeros(m);
}

int BlockSequences::a_min() const { return a.empty() ? 0 : a.begin()->first; }
int BlockSequences::a_max() const { return a.empty() ? 0 : a.rbegin()->first; }
int BlockSequences::b_min() const { return b.empty() ? 0 : b.begin()->first; }
int BlockSequences::b_max() const { return b.empty() ? 0 : b.rbegin()->first; }

bool BlockSequences::is_mg1() const { return a_min() >= -1; }
bool BlockSequences::is_gim1() const { return a_max() <= 1 && b_max() <= 1; }

void BlockSequences::validate() const {
    if (m == 0) throw Error(ErrorCode::InvalidModel, "block size must be positive");
    for (const auto& [i, blk] : a) check_block(blk, m, "A_" + std::to_string(i));
    for (const auto& [i, blk] : b) check_block(blk, m, "B_" + std::to_string(i));
    for (std::size_t k = 0; k < g_list.size(); ++k) check_block(g_list[k], m, "G_" + std::to_string(k + 1));
    if (b.find(0) == b.end() && b_max() < 0) throw Error(ErrorCode::InvalidModel, "no level-0 blocks");

    DenseMatrix up = zeros(m);
    for (const auto& [i, blk] : b)
        if (i >= 0) up += blk;
    check_row_sums(up, "level 0", true);

    DenseMatrix total = zeros(m);
    for (const auto& [i, blk] : a) total += blk;
    check_row_sums(total, "sum of A", false);

    const int deepest = std::max({1, -a_min(), -b_min()}) + 1;
    for (int j = 1; j <= deepest; ++j) {
        DenseMatrix row = b_block(-j);
        for (const auto& [i, blk] : a)
            if (i >= 1 - j) row += blk;
        check_row_sums(row, "level " + std::to_string(j), true);
    }
}

DenseMatrix BlockSequences::expand_dense(std::size_t levels, TruncationMode mode) const {
    const std::size_t n = (levels + 1) * m;
    DenseMatrix p(n, n);
    for (const auto& [i, blk] : b)
        if (i >= 0 && static_cast<std::size_t>(i) <= levels) p.set_block(0, static_cast<std::size_t>(i) * m, blk);
    for (std::size_t lvl = 1; lvl <= levels; ++lvl) {
        p.set_block(lvl * m, 0, b_block(-static_cast<int>(lvl)));
        for (const auto& [k, blk] : a) {
            const long target = static_cast<long>(lvl) + k;
            if (target < 1 || target > static_cast<long>(levels)) continue;
            p.add_block(lvl * m, static_cast<std::size_t>(target) * m, blk);
        }
    }
    if (mode == TruncationMode::Augment) {
        const DenseVector rs = p.row_sums();
        for (std::size_t i = 0; i < n; ++i) p(i, i) += std::max(0.0, 1.0 - rs[i]);
    }
    return p;
}

BlockSequences build_map_g1_rca(std::map<int, DenseMatrix> b_blocks, std::map<int, DenseMatrix> a_blocks) {
    for (int required : {-2, -1, 0})
        if (b_blocks.find(required) == b_blocks.end())
            throw Error(ErrorCode::InvalidModel, "missing B_" + std::to_string(required));
    if (a_blocks.find(-1) == a_blocks.end()) throw Error(ErrorCode::InvalidModel, "missing A_-1");
    if (b_blocks.begin()->first < -2) throw Error(ErrorCode::InvalidModel, "B blocks below index -2");
    if (a_blocks.begin()->first < -1) throw Error(ErrorCode::InvalidModel, "A blocks below index -1");
    BlockSequences model;
    model.m = b_blocks.at(0).rows();
    model.a = std::move(a_blocks);
    model.b = std::move(b_blocks);
    model.repeat_boundary = true;
    model.validate();
    return model;
}

// ---------------------------------------------------------------------------
// G iteration and measures

DenseMatrix g_step(const std::map<int, DenseMatrix>& a_blocks, const DenseMatrix& g) {
    if (a_blocks.empty()) throw Error(ErrorCode::InvalidModel, "no A blocks");
    if (a_blocks.begin()->first < -1)
        throw Error(ErrorCode::InvalidModel, "G iteration needs A_i = 0 for i < -1");
    const std::size_t m = a_blocks.begin()->second.rows();
    // Horner form of A_{-1} + A_0 G + A_1 G^2 + ...
    const int top = a_blocks.rbegin()->first;
    DenseMatrix acc = a_blocks.rbegin()->second;
    for (int n = top - 1; n >= -1; --n) {
        acc = acc * g;
        const auto it = a_blocks.find(n);
        if (it != a_blocks.end()) acc += it->second;
    }
    if (top < -1) acc = zeros(m);
    return acc;
}

namespace {

// Distance to the limit of a linearly converging iteration, from its last two steps.
double remaining_error(double last_step, double previous_step) {
    const double ratio = previous_step > 0.0 ? std::min(last_step / previous_step, 0.999) : 0.0;
    return last_step / (1.0 - ratio);
}

}  // namespace

GIteration iterate_G(const std::map<int, DenseMatrix>& a_blocks, double epsilon, std::size_t max_iterations) {
    if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
    if (a_blocks.empty()) throw Error(ErrorCode::InvalidModel, "no A blocks");
    const std::size_t m = a_blocks.begin()->second.rows();
    GIteration out;
    out.g = zeros(m);
    double previous = 0.0;
    for (std::size_t k = 1; k <= max_iterations; ++k) {
        DenseMatrix next = g_step(a_blocks, out.g);
        previous = out.last_step;
        out.last_step = infinity_norm(next - out.g);
        out.g = std::move(next);
        out.iterations = k;
        if (out.last_step < epsilon) {
            out.error_estimate = remaining_error(out.last_step, previous);
            return out;
        }
    }
    std::ostringstream msg;
    msg << "G iteration did not reach " << epsilon << " within " << max_iterations << " steps (last step "
        << out.last_step << ")";
    throw Error(ErrorCode::NoConvergence, msg.str());
}

DenseMatrix Measures::r_at(std::size_t i) const { return i >= 1 && i <= r.size() ? r[i - 1] : zeros(m()); }
DenseMatrix Measures::r0_at(std::size_t i) const { return i >= 1 && i <= r0.size() ? r0[i - 1] : zeros(m()); }

namespace {

// Q_i = X_i + Σ_k Q_{i+k} G_k for i = top..1.
std::vector<DenseMatrix> backward_balance(const std::vector<DenseMatrix>& x, const std::vector<DenseMatrix>& g) {
    const std::size_t top = x.size();
    std::vector<DenseMatrix> q(top);
    for (std::size_t i = top; i >= 1; --i) {
        DenseMatrix acc = x[i - 1];
        for (std::size_t k = 1; k <= g.size() && i + k <= top; ++k) acc += q[i + k - 1] * g[k - 1];
        q[i - 1] = std::move(acc);
    }
    return q;
}

DenseMatrix inverse_of_i_minus(const DenseMatrix& psi0, double pivot_tolerance) {
    try {
        return inverse(DenseMatrix::identity(psi0.rows()) - psi0, pivot_tolerance);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::SingularMatrix)
            throw Error(ErrorCode::SingularPsi, "I - Psi0 is singular; the G-measures are not valid");
        throw;
    }
}

}  // namespace

Measures measures_from_G(const BlockSequences& model, std::vector<DenseMatrix> g_list, double pivot_tolerance) {
    const std::size_t m = model.m;
    for (const DenseMatrix& gk : g_list)
        if (gk.rows() != m || gk.cols() != m) throw Error(ErrorCode::DimensionMismatch, "G block has wrong shape");
    Measures out;
    out.g = std::move(g_list);

    std::vector<DenseMatrix> a_up;
    for (int i = 1; i <= model.a_max(); ++i) a_up.push_back(model.a_block(i));
    std::vector<DenseMatrix> b_up;
    for (int i = 1; i <= model.b_max(); ++i) b_up.push_back(model.b_block(i));
    const std::vector<DenseMatrix> q = backward_balance(a_up, out.g);
    const std::vector<DenseMatrix> q0 = backward_balance(b_up, out.g);

    out.psi0 = model.a_block(0);
    for (std::size_t k = 1; k <= out.g.size() && k <= q.size(); ++k) out.psi0 += q[k - 1] * out.g[k - 1];
    out.u = inverse_of_i_minus(out.psi0, pivot_tolerance);
    for (const DenseMatrix& qi : q) out.r.push_back(qi * out.u);
    for (const DenseMatrix& qi : q0) out.r0.push_back(qi * out.u);
    return out;
}

Measures mg1_measures(const BlockSequences& model, const DenseMatrix& g, double pivot_tolerance) {
    return measures_from_G(model, {g}, pivot_tolerance);
}

// ---------------------------------------------------------------------------
// Ĥ

HatH::HatH(const Measures& measures, std::size_t rows)
    : g_(measures.g), r_(measures.r), u_(measures.u), rows_(rows) {
    if (rows == 0) throw Error(ErrorCode::InvalidArgument, "Ĥ needs at least one level");
}

const DenseMatrix& HatH::operator()(std::size_t i, std::size_t j) const {
    if (i < 1 || i > rows_ || j < 1 || j > cols_)
        throw Error(ErrorCode::InvalidArgument,
                    "Ĥ block (" + std::to_string(i) + "," + std::to_string(j) + ") outside the computed range");
    return columns_[j - 1][i - 1];
}

double HatH::add_column() {
    const std::size_t j = cols_ + 1;
    const std::size_t m = u_.rows();
    const std::size_t kr = r_.size();
    const std::size_t kg = g_.size();
    std::vector<DenseMatrix> col(rows_);

    // Σ_{n<j} Ĥ_in R_{j-n}; only the last kr columns contribute.
    auto r_form = [&](std::size_t i) {
        DenseMatrix acc(m, m);
        const std::size_t first = j > kr ? j - kr : 1;
        for (std::size_t n = first; n < j; ++n) acc += columns_[n - 1][i - 1] * r_[j - n - 1];
        return acc;
    };
    // Σ_k G_k Ĥ_{i-k, j} over rows already in this column.
    auto g_form = [&](std::size_t i) {
        DenseMatrix acc(m, m);
        for (std::size_t k = 1; k <= kg && k < i; ++k) acc += g_[k - 1] * col[i - k - 1];
        return acc;
    };

    double largest = 0.0;
    for (std::size_t i = 1; i <= rows_; ++i) {
        if (i < j) {
            col[i - 1] = r_form(i);
        } else if (i == j) {
            DenseMatrix by_g = u_ + g_form(i);
            const DenseMatrix by_r = u_ + r_form(i);
            diagonal_mismatch_ = std::max(diagonal_mismatch_, infinity_norm(by_g - by_r));
            col[i - 1] = std::move(by_g);
        } else {
            col[i - 1] = g_form(i);
        }
        largest = std::max(largest, infinity_norm(col[i - 1]));
    }
    columns_.push_back(std::move(col));
    cols_ = j;
    return largest;
}

void HatH::extend_to(std::size_t cols) {
    while (cols_ < cols) add_column();
}

HatH hatH_blocks(const Measures& measures, std::size_t levels) {
    HatH h(measures, levels);
    h.extend_to(levels);
    return h;
}

// ---------------------------------------------------------------------------
// Level 0, pi and X̃

LevelZero censor_level_zero(const BlockSequences& model, const HatH& hat_h, std::size_t horizon,
                            double pivot_tolerance) {
    const std::size_t m = model.m;
    const auto b_top = static_cast<std::size_t>(std::max(0, model.b_max()));
    if (hat_h.cols() < horizon || hat_h.rows() < b_top)
        throw Error(ErrorCode::InvalidArgument, "Ĥ does not cover the requested horizon");
    LevelZero out;
    out.t = zeros(m);
    out.p0 = model.b_block(0);
    for (std::size_t j = 1; j <= horizon; ++j) {
        DenseMatrix s = zeros(m);
        for (std::size_t n = 1; n <= b_top; ++n) s += model.b_block(static_cast<int>(n)) * hat_h(n, j);
        out.t += s;
        out.p0 += s * model.b_block(-static_cast<int>(j));
        out.s.push_back(std::move(s));
    }
    out.pi0_cens = stationary_vector(out.p0, pivot_tolerance);
    const DenseVector lead = DenseVector::ones(m) + out.t.row_sums();
    out.c = 1.0 / dot(out.pi0_cens, lead);
    return out;
}

std::vector<DenseVector> stationary_gig1(const Measures& measures, const LevelZero& level0, std::size_t levels) {
    std::vector<DenseVector> pi;
    pi.reserve(levels + 1);
    pi.push_back(level0.c * level0.pi0_cens);
    const std::size_t kr = measures.r.size();
    for (std::size_t n = 1; n <= levels; ++n) {
        DenseVector v = n <= measures.r0.size() ? left_multiply(pi[0], measures.r0[n - 1]) : DenseVector(measures.m());
        const std::size_t first = n > kr ? n - kr : 1;
        for (std::size_t k = first; k < n; ++k) v += left_multiply(pi[k], measures.r[n - k - 1]);
        pi.push_back(std::move(v));
    }
    return pi;
}

namespace {

// Rows i >= 1 of X̃ from row 0:
// X̃_ij = (Σ_m Ĥ_im B_{-m}) X̃_0j + Ĥ_ij - (Σ_m Ĥ_im) e pi_jᵀ, with Ĥ_i0 = O.
void fill_lower_blocks(const BlockSequences& model, const HatH& hat_h, const std::vector<DenseVector>& pi_blocks,
                       std::size_t levels, std::size_t horizon, XBlocks& out) {
    const std::size_t m = model.m;
    std::vector<DenseMatrix> b_down;
    for (std::size_t k = 1; k <= horizon; ++k) b_down.push_back(model.b_block(-static_cast<int>(k)));
    for (std::size_t i = 1; i <= levels; ++i) {
        DenseMatrix hb = zeros(m);
        DenseVector hs(m);
        for (std::size_t k = 1; k <= horizon; ++k) {
            const DenseMatrix& h = hat_h(i, k);
            hb += h * b_down[k - 1];
            hs += h.row_sums();
        }
        for (std::size_t j = 0; j <= levels; ++j) {
            DenseMatrix blk = hb * out.x[0][j];
            if (j > 0) blk += hat_h(i, j);
            blk -= outer(hs, pi_blocks[j]);
            out.x[i][j] = std::move(blk);
        }
    }
}

XBlocks empty_blocks(std::size_t levels) {
    XBlocks out;
    out.x.assign(levels + 1, std::vector<DenseMatrix>(levels + 1));
    return out;
}

}  // namespace

XBlocks xtilde_gig1(const BlockSequences& model, const HatH& hat_h, const LevelZero& level0,
                    const std::vector<DenseVector>& pi_blocks, std::size_t levels, std::size_t horizon,
                    double pivot_tolerance) {
    const std::size_t m = model.m;
    if (pi_blocks.size() < levels + 1 || level0.s.size() < std::max(levels, horizon) || hat_h.rows() < levels)
        throw Error(ErrorCode::InvalidArgument, "structured inputs do not cover the requested levels");
    XBlocks out = empty_blocks(levels);
    const DenseMatrix w = group_inverse(level0.p0, level0.pi0_cens, pivot_tolerance);
    const DenseVector lead = DenseVector::ones(m) + level0.t.row_sums();
    out.x[0][0] = w * (DenseMatrix::identity(m) - outer(lead, pi_blocks[0]));
    for (std::size_t j = 1; j <= levels; ++j) {
        out.x[0][j] = out.x[0][0] * level0.s[j - 1];
        const DenseMatrix direct = w * (level0.s[j - 1] - outer(lead, pi_blocks[j]));
        out.x0j_identity_gap = std::max(out.x0j_identity_gap, infinity_norm(out.x[0][j] - direct));
    }
    fill_lower_blocks(model, hat_h, pi_blocks, levels, horizon, out);
    return out;
}

DenseVector GIG1Solution::pi() const {
    std::vector<double> v;
    for (const DenseVector& blk : pi_blocks) v.insert(v.end(), blk.values().begin(), blk.values().end());
    return DenseVector(std::move(v));
}

DenseMatrix GIG1Solution::x_tilde() const {
    const std::size_t m = measures.m();
    const std::size_t n = (levels + 1) * m;
    DenseMatrix out(n, n);
    for (std::size_t i = 0; i <= levels; ++i)
        for (std::size_t j = 0; j <= levels; ++j) out.set_block(i * m, j * m, x.x[i][j]);
    return out;
}

std::size_t horizon_cap(const SolverConfig& cfg) { return std::max(10 * cfg.levels, cfg.levels + 500); }

namespace {

void check_levels(const SolverConfig& cfg) {
    if (cfg.levels < 1) throw Error(ErrorCode::InvalidArgument, "at least one level must be retained");
    if (cfg.horizon != 0 && cfg.horizon < cfg.levels)
        throw Error(ErrorCode::InvalidArgument, "horizon must be at least the number of retained levels");
}

// Ĥ with rows up to max(J, top B index) and columns up to the horizon. With
// an automatic horizon, columns are added until every block in the newest
// column is below the summand tolerance.
HatH build_hat_h(const BlockSequences& model, const Measures& measures, GIG1Solution& sol) {
    const SolverConfig& cfg = sol.config;
    const std::size_t rows = std::max<std::size_t>(cfg.levels, static_cast<std::size_t>(std::max(0, model.b_max())));
    HatH h(measures, rows);
    double last = 0.0;
    if (cfg.horizon != 0) {
        while (h.cols() < cfg.horizon) last = h.add_column();
    } else {
        const std::size_t cap = horizon_cap(cfg);
        while (h.cols() < cap) {
            last = h.add_column();
            if (h.cols() >= rows && last <= cfg.summand_tolerance) break;
        }
        if (last > cfg.summand_tolerance) {
            std::ostringstream msg;
            msg << "horizon cap " << cap << " reached with summand norm " << last;
            sol.warnings.push_back(msg.str());
        }
    }
    if (cfg.horizon != 0 && last > cfg.summand_tolerance) {
        std::ostringstream msg;
        msg << "last retained summand has norm " << last << " above " << cfg.summand_tolerance;
        sol.warnings.push_back(msg.str());
    }
    sol.horizon = h.cols();
    sol.last_summand = last;
    return h;
}

void check_tail(GIG1Solution& sol) {
    double total = 0.0;
    for (const DenseVector& blk : sol.pi_blocks) total += blk.sum();
    sol.tail_deficit = 1.0 - total;
    if (std::abs(sol.tail_deficit) > sol.config.tail_tolerance) {
        std::ostringstream msg;
        msg << "stationary mass beyond level " << sol.levels << " is " << sol.tail_deficit << ", above "
            << sol.config.tail_tolerance;
        throw Error(ErrorCode::TailMassTooLarge, msg.str());
    }
}

}  // namespace

double structured_residual_tolerance(const GIG1Solution& s) {
    const double from_g = kResidualSafetyFactor * s.g_error_estimate * infinity_norm(s.measures.u);
    return std::max(s.config.residual_tolerance, from_g);
}

namespace {

// Residual of Poisson's equation on the rows of the level truncation that
// keep all their mass inside it.
void check_residual(const BlockSequences& model, GIG1Solution& sol) {
    const DenseMatrix p = model.expand_dense(sol.levels, TruncationMode::Plain);
    const std::vector<std::size_t> rows = full_mass_rows(p);
    sol.residual_rows = rows.size();
    sol.residual_norm = residual_on_rows(p, sol.x_tilde(), sol.pi(), rows);
    const double tol = structured_residual_tolerance(sol);
    if (!(sol.residual_norm <= tol)) {
        std::ostringstream msg;
        msg << "block residual " << sol.residual_norm << " exceeds " << tol;
        throw Error(ErrorCode::ResidualTooLarge, msg.str());
    }
}

}  // namespace

GIG1Solution solve_gig1(const BlockSequences& model, const SolverConfig& cfg) {
    model.validate();
    check_levels(cfg);
    GIG1Solution sol;
    sol.config = cfg;
    sol.levels = cfg.levels;

    std::vector<DenseMatrix> g_list = model.g_list;
    const bool iterated = g_list.empty();
    if (iterated) {
        if (!model.is_mg1())
            throw Error(ErrorCode::InvalidModel, "A has jumps below -1; supply the G blocks G_1..G_K");
        GIteration it = iterate_G(model.a, cfg.epsilon, cfg.max_iterations);
        sol.g_iterations = it.iterations;
        sol.g_last_step = it.last_step;
        sol.g_error_estimate = it.error_estimate;
        g_list = {std::move(it.g)};
    }
    sol.measures = measures_from_G(model, std::move(g_list), cfg.pivot_tolerance);
    sol.hat_h.emplace(build_hat_h(model, sol.measures, sol));
    sol.level0 = censor_level_zero(model, *sol.hat_h, sol.horizon, cfg.pivot_tolerance);
    sol.pi_blocks = stationary_gig1(sol.measures, sol.level0, sol.levels);
    check_tail(sol);
    sol.x = xtilde_gig1(model, *sol.hat_h, sol.level0, sol.pi_blocks, sol.levels, sol.horizon, cfg.pivot_tolerance);
    check_residual(model, sol);
    return sol;
}

// ---------------------------------------------------------------------------
// GI/M/1

double spectral_radius_estimate(const DenseMatrix& m) {
    double norm = infinity_norm(m);
    if (norm == 0.0) return 0.0;
    DenseMatrix y = (1.0 / norm) * m;
    double log_scale = std::log(norm);  // log ‖M^(2^k)‖ up to the normalised factor
    double exponent = 1.0;
    for (int k = 0; k < 40; ++k) {
        DenseMatrix sq = y * y;
        const double n2 = infinity_norm(sq);
        if (n2 == 0.0) return 0.0;
        log_scale = 2.0 * log_scale + std::log(n2);
        exponent *= 2.0;
        y = (1.0 / n2) * sq;
    }
    return std::exp(log_scale / exponent);
}

GIG1Solution gim1_solve(const BlockSequences& model, const SolverConfig& cfg, GIM1Extras* extras) {
    model.validate();
    check_levels(cfg);
    if (!model.is_gim1()) throw Error(ErrorCode::InvalidModel, "GI/M/1 shape needs A_i = B_i = 0 for i > 1");
    const std::size_t m = model.m;
    const DenseMatrix id = DenseMatrix::identity(m);
    const DenseMatrix a1 = model.a_block(1);
    const int depth = -std::min(0, model.a_min());

    DenseMatrix a_sum = zeros(m);
    DenseMatrix a_moment = zeros(m);
    for (const auto& [i, blk] : model.a) {
        a_sum += blk;
        a_moment += static_cast<double>(i) * blk;
    }
    if (max_abs(a_sum.row_sums() - DenseVector::ones(m)) < 1e-10) {
        const double drift = dot(stationary_vector(a_sum, cfg.pivot_tolerance), a_moment.row_sums());
        if (!(drift < 0.0)) {
            std::ostringstream msg;
            msg << "mean drift of the repeating part is " << drift << ", not negative";
            throw Error(ErrorCode::UnstableR, msg.str());
        }
    }

    // Coupled fixed point R = A_1 (I - Psi0)^-1, Psi0 = Σ_k R^k A_{-k}.
    auto psi_of = [&](const DenseMatrix& r) {
        DenseMatrix acc = model.a_block(-depth);
        for (int k = depth - 1; k >= 0; --k) acc = r * acc + model.a_block(-k);
        return acc;
    };
    DenseMatrix r = zeros(m);
    std::size_t iterations = 0;
    double step = 0.0;
    double previous = 0.0;
    for (;;) {
        if (iterations == cfg.max_iterations) {
            std::ostringstream msg;
            msg << "R iteration did not reach " << cfg.epsilon << " within " << cfg.max_iterations << " steps";
            throw Error(ErrorCode::NoConvergence, msg.str());
        }
        DenseMatrix next = a1 * inverse_of_i_minus(psi_of(r), cfg.pivot_tolerance);
        previous = step;
        step = infinity_norm(next - r);
        r = std::move(next);
        ++iterations;
        if (!r.all_finite()) throw Error(ErrorCode::UnstableR, "R iteration diverged");
        if (step < cfg.epsilon) break;
    }
    const double rho = spectral_radius_estimate(r);
    if (!(rho < 1.0)) {
        std::ostringstream msg;
        msg << "spectral radius of R is " << rho;
        throw Error(ErrorCode::UnstableR, msg.str());
    }
    if (extras) *extras = {r, iterations, rho};

    GIG1Solution sol;
    sol.config = cfg;
    sol.levels = cfg.levels;
    sol.g_iterations = iterations;
    sol.g_last_step = step;
    sol.g_error_estimate = remaining_error(step, previous);
    Measures& ms = sol.measures;
    ms.psi0 = psi_of(r);
    ms.u = inverse_of_i_minus(ms.psi0, cfg.pivot_tolerance);
    ms.r = {r};
    // G_i = U Σ_k R^k A_{-i-k}
    for (int i = 1; i <= depth; ++i) {
        DenseMatrix acc = model.a_block(-depth);
        for (int k = depth - 1; k >= i; --k) acc = r * acc + model.a_block(-k);
        ms.g.push_back(ms.u * acc);
    }
    const DenseMatrix b1u = model.b_block(1) * ms.u;
    if (model.b_max() >= 1) ms.r0 = {b1u};

    sol.hat_h.emplace(build_hat_h(model, ms, sol));

    // P^(0) = B_0 + B_1 U Σ_k R^k B_{-1-k}; a repeating boundary block adds R^K (I - R)^-1 B_{-K-1}.
    const DenseMatrix inv_i_minus_r = inverse(id - r, cfg.pivot_tolerance);
    const int b_depth = -std::min(0, model.b_min());
    DenseMatrix down = zeros(m);
    DenseMatrix rk = id;
    const int explicit_terms = model.repeat_boundary ? b_depth - 1 : b_depth;
    for (int k = 0; k < explicit_terms; ++k) {
        down += rk * model.b_block(-1 - k);
        rk = rk * r;
    }
    if (model.repeat_boundary && b_depth >= 1) down += rk * inv_i_minus_r * model.b_block(-b_depth);

    LevelZero& l0 = sol.level0;
    l0.p0 = model.b_block(0) + b1u * down;
    l0.pi0_cens = stationary_vector(l0.p0, cfg.pivot_tolerance);
    const DenseVector tail_e = inv_i_minus_r.row_sums();
    const DenseVector lead = DenseVector::ones(m) + b1u * tail_e;
    l0.c = 1.0 / dot(l0.pi0_cens, lead);
    for (std::size_t j = 1; j <= sol.horizon; ++j) l0.s.push_back(model.b_block(1) * (*sol.hat_h)(1, j));
    l0.t = b1u * inv_i_minus_r;

    sol.pi_blocks.push_back(l0.c * l0.pi0_cens);
    if (sol.levels >= 1) sol.pi_blocks.push_back(left_multiply(sol.pi_blocks[0], b1u));
    for (std::size_t j = 2; j <= sol.levels; ++j) sol.pi_blocks.push_back(left_multiply(sol.pi_blocks[j - 1], r));
    check_tail(sol);

    XBlocks& xb = sol.x;
    xb = empty_blocks(sol.levels);
    const DenseMatrix w = group_inverse(l0.p0, l0.pi0_cens, cfg.pivot_tolerance);
    const DenseVector e = DenseVector::ones(m);
    xb.x[0][0] = w * (id - outer(lead, sol.pi_blocks[0]));
    if (sol.levels >= 1) {
        const DenseVector& pi1 = sol.pi_blocks[1];
        DenseMatrix lead_j = w * (b1u * (id - outer(tail_e, pi1)) - outer(e, pi1));
        for (std::size_t j = 1; j <= sol.levels; ++j) {
            xb.x[0][j] = lead_j;
            const DenseMatrix via_s = xb.x[0][0] * l0.s[j - 1];
            xb.x0j_identity_gap = std::max(xb.x0j_identity_gap, infinity_norm(lead_j - via_s));
            lead_j = lead_j * r;
        }
    }
    fill_lower_blocks(model, *sol.hat_h, sol.pi_blocks, sol.levels, sol.horizon, xb);
    check_residual(model, sol);
    return sol;
}

// ---------------------------------------------------------------------------
// Algorithm 1

PoissonSolution poisson_from_structured(const GIG1Solution& s, std::size_t block_size,
                                        const std::optional<ForcingFunction>& g, std::optional<std::size_t> anchor) {
    if (anchor && *anchor >= block_size)
        throw Error(ErrorCode::AnchorNotInA, "anchor " + std::to_string(*anchor) + " is not a level-0 state");
    PoissonSolution ps;
    ps.pi = s.pi();
    ps.x_tilde = s.x_tilde();
    ps.diagnostics.residual_norm = s.residual_norm;
    ps.diagnostics.residual_rows = s.residual_rows;
    ps.diagnostics.tail_mass = s.tail_deficit;
    ps.diagnostics.g_iterations = s.g_iterations;
    ps.diagnostics.levels = s.levels;
    ps.diagnostics.horizon = s.horizon;
    ps.diagnostics.warnings = s.warnings;
    std::optional<DenseVector> g_values;
    if (g) g_values = g->values(ps.pi.size(), block_size);
    complete_solution(ps, anchor, g_values);
    return ps;
}

Algorithm1Result algorithm1(const BlockSequences& model, const std::optional<ForcingFunction>& g,
                            std::size_t anchor, const SolverConfig& cfg) {
    if (anchor >= model.m)
        throw Error(ErrorCode::AnchorNotInA, "anchor " + std::to_string(anchor) + " is not a level-0 state");
    Algorithm1Result out{solve_gig1(model, cfg), {}};
    out.poisson = poisson_from_structured(out.structured, model.m, g, anchor);
    return out;
}

}  // namespace pmam
