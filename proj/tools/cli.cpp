#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <utility>

#include <CLI11.hpp>

#include "model_io.hpp"
#include "pmam/censor.hpp"
#include "pmam/ctmc.hpp"
#include "pmam/error.hpp"
#include "pmam/gig1.hpp"
#include "pmam/oracle.hpp"
#include "pmam/poisson.hpp"

namespace pmam::cli {
namespace {

namespace fs = std::filesystem;
using io::CsvTable;
using io::ModelFile;
using io::ModelKind;

struct Flags {
    std::string command;
    std::vector<std::string> model;
    double epsilon = 1e-4;
    std::size_t levels = 50;
    std::size_t horizon = 0;
    std::string anchor;
    std::string out = ".";
    std::uint64_t seed = 42;
    std::size_t paths = 20000;
    bool epsilon_set = false;
    bool levels_set = false;
    bool horizon_set = false;
};

struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

class Diagnostics {
public:
    void add(const std::string& key, const std::string& value) { rows_.emplace_back(key, value); }
    void add(const std::string& key, double value) { add(key, io::format_number(value)); }
    void add(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }

    CsvTable table() const {
        CsvTable t;
        t.header = {"key", "value"};
        for (const auto& [k, v] : rows_) t.rows.push_back({k, v});
        return t;
    }

private:
    std::vector<std::pair<std::string, std::string>> rows_;
};

// Everything a command needs once the model and flags are resolved.
struct Context {
    Flags flags;
    ModelFile model;
    SolverConfig cfg;
    std::optional<std::size_t> anchor;
    fs::path dir;
    Diagnostics diag;
    std::ostream* err = nullptr;

    std::size_t m() const { return model.block_size(); }
    void warn(const std::string& msg) {
        *err << "warning: " << msg << '\n';
        diag.add("warning", msg);
    }
};

enum class Need { Pi, XTilde, Deviation, KMatrix, Full };

ModelFile resolve_model(const std::vector<std::string>& words) {
    if (words.empty()) throw Error(ErrorCode::InvalidArgument, "no model given; pass a JSON file or 'example <name>'");
    if (words[0] == "example") {
        if (words.size() != 2) throw Error(ErrorCode::InvalidArgument, "usage: example <map-g1-neg|scalar-gig1>");
        return io::builtin_model(words[1]);
    }
    if (words.size() != 1) throw Error(ErrorCode::InvalidArgument, "expected a single model file");
    return io::load_model(words[0]);
}

SolverConfig effective_config(const ModelFile& model, const Flags& flags) {
    SolverConfig cfg = model.config;
    if (flags.epsilon_set) cfg.epsilon = flags.epsilon;
    if (flags.levels_set) cfg.levels = flags.levels;
    if (flags.horizon_set) cfg.horizon = flags.horizon;
    if (!(cfg.epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
    if (cfg.levels == 0) throw Error(ErrorCode::InvalidArgument, "max-levels must be positive");
    return cfg;
}

std::optional<std::size_t> effective_anchor(const ModelFile& model, const Flags& flags) {
    std::optional<io::StateRef> ref = model.anchor;
    if (!flags.anchor.empty()) ref = io::StateRef::parse(flags.anchor);
    if (!ref) return std::nullopt;
    return ref->resolve(model.block_size());
}

std::vector<std::size_t> censor_set(const Context& ctx) {
    if (!ctx.model.censor_set.empty()) return ctx.model.censor_set;
    return {ctx.anchor.value_or(0)};
}

DenseVector forcing_or_level(const Context& ctx, std::size_t n) {
    if (ctx.model.forcing) return ctx.model.forcing->values(n, ctx.m());
    DenseVector g(n);
    for (std::size_t s = 0; s < n; ++s) g[s] = static_cast<double>(s / ctx.m());
    return g;
}

std::optional<DenseVector> forcing(const Context& ctx, std::size_t n) {
    if (!ctx.model.forcing) return std::nullopt;
    return ctx.model.forcing->values(n, ctx.m());
}

CsvTable pi_table(const DenseVector& pi, std::size_t m) {
    CsvTable t;
    t.header = {"state_index", "level", "phase", "value"};
    for (std::size_t s = 0; s < pi.size(); ++s)
        t.add({static_cast<double>(s), static_cast<double>(s / m), static_cast<double>(s % m + 1), pi[s]});
    return t;
}

CsvTable matrix_table(const DenseMatrix& x) {
    CsvTable t;
    t.header = {"row", "col", "value"};
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) t.add({static_cast<double>(i), static_cast<double>(j), x(i, j)});
    return t;
}

CsvTable f_table(const PoissonSolution& sol, std::size_t m) {
    CsvTable t;
    t.header = {"state_index", "level", "phase", "f_D", "f_K"};
    for (std::size_t s = 0; s < sol.pi.size(); ++s) {
        t.rows.push_back({std::to_string(s), std::to_string(s / m), std::to_string(s % m + 1),
                          sol.f_d ? io::format_number((*sol.f_d)[s]) : "",
                          sol.f_k ? io::format_number((*sol.f_k)[s]) : ""});
    }
    return t;
}

void write(const Context& ctx, const std::string& file, const CsvTable& table) {
    io::write_csv((ctx.dir / file).string(), table);
}

void record(Context& ctx, const PoissonDiagnostics& d) {
    ctx.diag.add("residual_norm", d.residual_norm);
    ctx.diag.add("residual_rows", d.residual_rows);
    ctx.diag.add("tail_mass", d.tail_mass);
    if (d.levels) ctx.diag.add("levels", d.levels);
    if (d.horizon) ctx.diag.add("horizon", d.horizon);
    if (d.g_iterations) ctx.diag.add("g_iterations", d.g_iterations);
    for (const std::string& w : d.warnings) ctx.warn(w);
}

GIG1Solution solve_structured(const Context& ctx, const SolverConfig& cfg) {
    if (ctx.model.kind == ModelKind::Gim1) {
        return gim1_solve(*ctx.model.blocks, cfg);
    }
    return solve_gig1(*ctx.model.blocks, cfg);
}

void require_anchor(const Context& ctx) {
    if (!ctx.anchor) throw Error(ErrorCode::InvalidArgument, "this command needs --anchor");
}

PoissonSolution compute_dense(Context& ctx, Need need) {
    const DenseMatrix& p = *ctx.model.matrix;
    const Partition part = Partition::from_censor_set(censor_set(ctx), p.rows());
    if (need == Need::Pi) {
        const CensoredChain chain = censor_dtmc(p, part, ctx.cfg.pivot_tolerance);
        PoissonSolution sol;
        sol.pi = stationary_from_censored(chain, part);
        sol.diagnostics.tail_mass = chain.tail_mass;
        sol.diagnostics.warnings = chain.warnings;
        return sol;
    }
    if (need == Need::KMatrix || need == Need::Full) require_anchor(ctx);
    PoissonSolution sol = solve_poisson(p, part, ctx.cfg, ctx.anchor,
                                        need == Need::Full ? forcing(ctx, p.rows()) : std::nullopt);
    if (need == Need::Deviation && !sol.d)
        throw Error(ErrorCode::PeriodicChain, "the chain is periodic, so D is not defined");
    return sol;
}

PoissonSolution compute_ctmc(Context& ctx, Need need) {
    const DenseMatrix& q = *ctx.model.matrix;
    const Partition part = Partition::from_censor_set(censor_set(ctx), q.rows());
    PoissonSolution sol;
    sol.pi = stationary_ctmc(q, ctx.cfg.pivot_tolerance);
    if (need == Need::Pi) return sol;
    sol.x_tilde = xtilde_ctmc(q, part, sol.pi, ctx.cfg);
    sol.diagnostics.residual_norm = residual_ctmc(q, sol.x_tilde, sol.pi);
    sol.diagnostics.residual_rows = q.rows();
    if (need == Need::KMatrix || need == Need::Full) require_anchor(ctx);
    if (ctx.anchor && part.position_in_a(*ctx.anchor) == part.state_count())
        throw Error(ErrorCode::AnchorNotInA, "anchor state is not in the censor set");
    complete_solution(sol, ctx.anchor, need == Need::Full ? forcing(ctx, q.rows()) : std::nullopt);
    return sol;
}

PoissonSolution compute_structured(Context& ctx, Need need) {
    const GIG1Solution s = solve_structured(ctx, ctx.cfg);
    if (need == Need::KMatrix || need == Need::Full) require_anchor(ctx);
    PoissonSolution sol = poisson_from_structured(s, ctx.m(), need == Need::Full ? ctx.model.forcing : std::nullopt,
                                                  ctx.anchor);
    ctx.diag.add("g_last_step", s.g_last_step);
    ctx.diag.add("g_error_estimate", s.g_error_estimate);
    ctx.diag.add("residual_tolerance", structured_residual_tolerance(s));
    ctx.diag.add("last_summand", s.last_summand);
    ctx.diag.add("x0j_identity_gap", s.x.x0j_identity_gap);
    if (s.hat_h) ctx.diag.add("hatH_diagonal_mismatch", s.hat_h->diagonal_mismatch());
    const std::size_t d = period(ctx.model.blocks->expand_dense(s.levels));
    if (d != 1) {
        sol.d.reset();
        sol.f_d.reset();
        sol.diagnostics.warnings.push_back("chain has period " + std::to_string(d) + "; D is not defined");
        if (need == Need::Deviation)
            throw Error(ErrorCode::PeriodicChain, "the chain is periodic, so D is not defined");
    }
    return sol;
}

PoissonSolution compute(Context& ctx, Need need) {
    switch (ctx.model.kind) {
        case ModelKind::DtmcDense: return compute_dense(ctx, need);
        case ModelKind::CtmcDense: return compute_ctmc(ctx, need);
        default: return compute_structured(ctx, need);
    }
}

int run_solver_command(Context& ctx) {
    const std::string& c = ctx.flags.command;
    const Need need = c == "stationary"  ? Need::Pi
                      : c == "poisson"   ? Need::XTilde
                      : c == "deviation" ? Need::Deviation
                      : c == "kmatrix"   ? Need::KMatrix
                                         : Need::Full;
    const PoissonSolution sol = compute(ctx, need);
    record(ctx, sol.diagnostics);
    write(ctx, "pi.csv", pi_table(sol.pi, ctx.m()));
    if (need == Need::XTilde || need == Need::Full) write(ctx, "xtilde.csv", matrix_table(sol.x_tilde));
    if ((need == Need::Deviation || need == Need::Full) && sol.d) write(ctx, "deviation.csv", matrix_table(*sol.d));
    if ((need == Need::KMatrix || need == Need::Full) && sol.k) write(ctx, "kmatrix.csv", matrix_table(*sol.k));
    if (need == Need::Full && sol.g) {
        write(ctx, "f_values.csv", f_table(sol, ctx.m()));
        ctx.diag.add("pi_abs_g", sol.pi_abs_g);
        if (sol.f_d && sol.f_k) {
            double lo = INFINITY;
            double hi = -INFINITY;
            for (std::size_t s = 0; s < sol.pi.size(); ++s) {
                const double shift = (*sol.f_d)[s] - (*sol.f_k)[s];
                lo = std::min(lo, shift);
                hi = std::max(hi, shift);
            }
            ctx.diag.add("shift_f_D_minus_f_K", (*sol.f_d)[0] - (*sol.f_k)[0]);
            ctx.diag.add("shift_spread", hi - lo);
        }
    } else if (need == Need::Full) {
        ctx.warn("model has no forcing function; f_values.csv not written");
    }
    return kExitOk;
}

// Oracle cross-checks.

void add_check(std::vector<Check>& checks, std::string name, double value, double tolerance) {
    checks.push_back({std::move(name), value, tolerance, std::isfinite(value) && value <= tolerance});
}

std::vector<std::size_t> simulation_starts(std::size_t m, std::size_t n) {
    std::vector<std::size_t> starts;
    for (std::size_t level : {0, 1, 3, 5, 8})
        if (level * m < n) starts.push_back(level * m);
    return starts;
}

void dense_oracle_checks(const Context& ctx, const DenseMatrix& p, const Partition& part, std::size_t alpha,
                         const DenseVector& g, const std::string& prefix, std::vector<Check>& checks) {
    const PoissonSolution sol = solve_poisson(p, part, ctx.cfg, alpha, g);
    add_check(checks, prefix + "residual", sol.diagnostics.residual_norm, ctx.cfg.residual_tolerance);
    add_check(checks, prefix + "pi_censored_vs_direct", max_abs(sol.pi - stationary_vector(p)), 1e-9);
    add_check(checks, prefix + "k_vs_taboo", max_abs_diff(*sol.k, k_by_taboo(p, sol.pi, alpha)), 1e-8);
    if (sol.d) {
        add_check(checks, prefix + "d_vs_series", max_abs_diff(*sol.d, deviation_by_series(p, sol.pi, 1e-12)), 1e-6);
        add_check(checks, prefix + "pi_d", max_abs(left_multiply(sol.pi, *sol.d)), 1e-8);
    }
    const DenseVector h = expected_hitting_times(p, alpha);
    add_check(checks, prefix + "kac", std::abs(sol.pi[alpha] * h[alpha] - 1.0), 1e-8);

    SimulationConfig sim;
    sim.path_count = ctx.flags.paths;
    sim.seed = ctx.flags.seed;
    sim.confidence = 0.99;
    for (std::size_t start : simulation_starts(ctx.m(), p.rows())) {
        const SimulationEstimate est = simulate_additive(p, g, alpha, start, sim);
        const double gap = std::abs(est.estimate - (*sol.f_k)[start]);
        checks.push_back({prefix + "mc_f_K_state_" + std::to_string(start), gap, est.half_width,
                          est.contains((*sol.f_k)[start])});
    }
}

std::vector<Check> verify_dense(Context& ctx) {
    const DenseMatrix& p = *ctx.model.matrix;
    const std::size_t alpha = ctx.anchor.value_or(0);
    const Partition part = Partition::from_censor_set(censor_set(ctx), p.rows());
    std::vector<Check> checks;
    dense_oracle_checks(ctx, p, part, alpha, forcing_or_level(ctx, p.rows()), "", checks);
    return checks;
}

std::vector<Check> verify_ctmc(Context& ctx) {
    const DenseMatrix& q = *ctx.model.matrix;
    const std::size_t n = q.rows();
    const Partition part = Partition::from_censor_set(censor_set(ctx), n);
    std::vector<Check> checks;
    const DenseVector pi = stationary_ctmc(q, ctx.cfg.pivot_tolerance);
    const DenseMatrix x = xtilde_ctmc(q, part, pi, ctx.cfg);
    add_check(checks, "residual", residual_ctmc(q, x, pi), ctx.cfg.residual_tolerance);
    add_check(checks, "censored_row_sums", max_abs(censor_ctmc(q, part).q_cens.row_sums()), 1e-8);

    double rate = 0.0;
    for (std::size_t i = 0; i < n; ++i) rate = std::max(rate, -q(i, i));
    rate = rate > 0.0 ? 1.05 * rate : 1.0;
    DenseMatrix p = DenseMatrix::identity(n);
    p += (1.0 / rate) * q;
    const DenseVector pi_p = stationary_via_censoring(p, part, ctx.cfg.pivot_tolerance);
    add_check(checks, "pi_vs_uniformized", max_abs(pi - pi_p), 1e-9);
    const DenseMatrix d_p = deviation_matrix(p, part, pi_p, ctx.cfg);
    add_check(checks, "d_vs_uniformized", max_abs_diff(rate * centered(x, pi), d_p), 1e-8);
    const std::size_t alpha = ctx.anchor.value_or(part.a().front());
    add_check(checks, "k_vs_uniformized_taboo", max_abs_diff(rate * anchored(x, alpha), k_by_taboo(p, pi_p, alpha)),
              1e-8);
    return checks;
}

std::vector<Check> verify_structured(Context& ctx) {
    const BlockSequences& blocks = *ctx.model.blocks;
    const std::size_t m = blocks.m;
    std::vector<Check> checks;

    const GIG1Solution s = solve_structured(ctx, ctx.cfg);
    add_check(checks, "structured_residual", s.residual_norm, structured_residual_tolerance(s));
    add_check(checks, "tail_deficit", s.tail_deficit, ctx.cfg.tail_tolerance);
    if (s.hat_h) add_check(checks, "hatH_diagonal_forms", s.hat_h->diagonal_mismatch(), 1e-8);
    add_check(checks, "x0j_identity", s.x.x0j_identity_gap, 1e-8);

    const std::size_t j = std::min<std::size_t>(ctx.cfg.levels, 30);
    SolverConfig tight = ctx.cfg;
    tight.levels = j;
    tight.horizon = 0;
    tight.epsilon = 1e-12;
    tight.truncation = TruncationMode::Plain;
    const GIG1Solution st = solve_structured(ctx, tight);
    const DenseMatrix pd = blocks.expand_dense(3 * j, TruncationMode::Plain);
    const Partition lead = Partition::leading(m, pd.rows());
    const DenseVector pid = stationary_via_censoring(pd, lead, ctx.cfg.pivot_tolerance);
    const DenseMatrix xd = solve_xtilde(pd, lead, pid, ctx.cfg);
    const DenseVector pis = st.pi();
    const DenseMatrix xs = st.x_tilde();
    double pi_gap = 0.0;
    for (std::size_t i = 0; i < pis.size(); ++i) pi_gap = std::max(pi_gap, std::abs(pis[i] - pid[i]));
    add_check(checks, "pi_structured_vs_dense", pi_gap, 1e-6);
    add_check(checks, "xtilde_structured_vs_dense", max_abs_diff(xs, xd.block(0, 0, xs.rows(), xs.cols())), 1e-6);

    const DenseMatrix pa = blocks.expand_dense(j, TruncationMode::Augment);
    const std::size_t alpha = ctx.anchor.value_or(0);
    if (alpha >= m) throw Error(ErrorCode::AnchorNotInA, "the anchor must be a level-0 state");
    dense_oracle_checks(ctx, pa, Partition::leading(m, pa.rows()), alpha, forcing_or_level(ctx, pa.rows()),
                        "augmented_", checks);
    return checks;
}

int run_verify(Context& ctx) {
    std::vector<Check> checks;
    switch (ctx.model.kind) {
        case ModelKind::DtmcDense: checks = verify_dense(ctx); break;
        case ModelKind::CtmcDense: checks = verify_ctmc(ctx); break;
        default: checks = verify_structured(ctx); break;
    }
    CsvTable t;
    t.header = {"check", "value", "tolerance", "pass"};
    bool ok = true;
    for (const Check& c : checks) {
        t.rows.push_back({c.name, io::format_number(c.value), io::format_number(c.tolerance), c.pass ? "1" : "0"});
        *ctx.err << (c.pass ? "PASS " : "FAIL ") << c.name << ' ' << io::format_number(c.value)
                 << " (tolerance " << io::format_number(c.tolerance) << ")\n";
        ok = ok && c.pass;
    }
    write(ctx, "verify.csv", t);
    ctx.diag.add("checks", checks.size());
    ctx.diag.add("verify", ok ? "pass" : "fail");
    return ok ? kExitOk : kExitNumerical;
}

int run_export(Context& ctx) {
    const std::string stem = ctx.model.name.empty() ? "model" : ctx.model.name;
    const fs::path path = ctx.dir / (stem + ".json");
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
    file << io::to_json(ctx.model).dump(2) << '\n';
    *ctx.err << "wrote " << path.string() << '\n';
    return kExitOk;
}

int dispatch(Flags flags, std::ostream& err) {
    Context ctx;
    ctx.flags = std::move(flags);
    ctx.err = &err;
    ctx.model = resolve_model(ctx.flags.model);
    ctx.cfg = effective_config(ctx.model, ctx.flags);
    ctx.anchor = effective_anchor(ctx.model, ctx.flags);
    ctx.dir = ctx.flags.out;
    fs::create_directories(ctx.dir);

    if (ctx.flags.command == "export") return run_export(ctx);

    ctx.diag.add("command", ctx.flags.command);
    ctx.diag.add("model", ctx.model.name.empty() ? ctx.flags.model.front() : ctx.model.name);
    ctx.diag.add("kind", io::to_string(ctx.model.kind));
    ctx.diag.add("epsilon", ctx.cfg.epsilon);
    if (ctx.anchor) ctx.diag.add("anchor", *ctx.anchor);
    const int code = ctx.flags.command == "verify" ? run_verify(ctx) : run_solver_command(ctx);
    write(ctx, "diagnostics.csv", ctx.diag.table());
    return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Poisson's equation for Markov chains by censoring and matrix-analytic methods"};
    app.require_subcommand(1, 1);
    Flags flags;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"stationary", "stationary vector -> pi.csv"},
        {"poisson", "particular solution X~ -> pi.csv, xtilde.csv"},
        {"deviation", "deviation matrix D -> deviation.csv"},
        {"kmatrix", "anchored solution K -> kmatrix.csv (needs --anchor)"},
        {"solve", "full pipeline with f_D and f_K -> f_values.csv"},
        {"verify", "oracle cross-checks -> verify.csv; exit 3 on failure"},
        {"export", "write the model as JSON into --out"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("model", flags.model, "model.json, or: example map-g1-neg | example scalar-gig1")
            ->required()
            ->expected(1, 2);
        sub->add_option("--epsilon", flags.epsilon, "G iteration tolerance (1e-4)")
            ->each([&flags](const std::string&) { flags.epsilon_set = true; });
        sub->add_option("--max-levels", flags.levels, "highest retained level J (50)")
            ->each([&flags](const std::string&) { flags.levels_set = true; });
        sub->add_option("--horizon", flags.horizon, "last level in the infinite sums; 0 = automatic")
            ->each([&flags](const std::string&) { flags.horizon_set = true; });
        sub->add_option("--anchor", flags.anchor, "anchor state: level,phase or flat index");
        sub->add_option("--out", flags.out, "output directory (.)");
        sub->add_option("--seed", flags.seed, "simulation seed (42)");
        sub->add_option("--paths", flags.paths, "simulation paths per state (20000)");
        sub->callback([&flags, name = name] { flags.command = name; });
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        return dispatch(std::move(flags), err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return is_validation_error(e.code()) ? kExitValidation : kExitNumerical;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
}

}  // namespace pmam::cli
