#include "pmam/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "pmam/censor.hpp"
#include "pmam/error.hpp"

namespace pmam {

std::uint64_t SplitMix64::mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t SplitMix64::next() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
}

double SplitMix64::uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

DenseMatrix deviation_by_series(const DenseMatrix& p, const DenseVector& pi, double tail_tol, std::size_t max_steps) {
    if (!p.square() || pi.size() != p.rows()) throw Error(ErrorCode::DimensionMismatch, "P and pi do not match");
    if (!(tail_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tail tolerance must be positive");
    const std::size_t n = p.rows();
    const DenseMatrix e_pi = outer(DenseVector::ones(n), pi);
    // P^k - e piᵀ = (P - e piᵀ)^k for k >= 1.
    const DenseMatrix centered = p - e_pi;
    DenseMatrix d = DenseMatrix::identity(n) - e_pi;
    DenseMatrix term = centered;
    double previous = infinity_norm(d);
    for (std::size_t k = 1; k <= max_steps; ++k) {
        const double norm = infinity_norm(term);
        if (norm == 0.0) return d;
        d += term;
        const double rho = previous > 0.0 ? norm / previous : 1.0;
        if (rho < 1.0 && norm < tail_tol * (1.0 - rho)) return d;
        previous = norm;
        term = term * centered;
    }
    throw Error(ErrorCode::NoConvergence, "deviation series shows no contraction; the chain may be periodic");
}

namespace {

struct Taboo {
    std::vector<std::size_t> others;  // states other than the target, ascending
    DenseMatrix u;                    // (I - P restricted to others)^-1
};

Taboo taboo(const DenseMatrix& p, std::size_t target) {
    if (!p.square()) throw Error(ErrorCode::DimensionMismatch, "P must be square");
    if (target >= p.rows()) throw Error(ErrorCode::InvalidArgument, "target state out of range");
    Taboo t;
    for (std::size_t s = 0; s < p.rows(); ++s)
        if (s != target) t.others.push_back(s);
    const DenseMatrix sub = p.gather(t.others, t.others);
    t.u = t.others.empty() ? DenseMatrix() : inverse(DenseMatrix::identity(sub.rows()) - sub);
    return t;
}

}  // namespace

DenseVector expected_hitting_times(const DenseMatrix& p, std::size_t target) {
    const Taboo t = taboo(p, target);
    const DenseVector from_others = t.u.row_sums();
    DenseVector h(p.rows());
    double from_target = 1.0;
    for (std::size_t k = 0; k < t.others.size(); ++k) {
        h[t.others[k]] = from_others[k];
        from_target += p(target, t.others[k]) * from_others[k];
    }
    h[target] = from_target;
    return h;
}

DenseMatrix k_by_taboo(const DenseMatrix& p, const DenseVector& pi, std::size_t alpha) {
    if (pi.size() != p.rows()) throw Error(ErrorCode::DimensionMismatch, "P and pi do not match");
    const Taboo t = taboo(p, alpha);
    const std::size_t n = p.rows();
    DenseMatrix visits(n, n);
    for (std::size_t a = 0; a < t.others.size(); ++a)
        for (std::size_t b = 0; b < t.others.size(); ++b) visits(t.others[a], t.others[b]) = t.u(a, b);
    visits(alpha, alpha) = 1.0;
    for (std::size_t b = 0; b < t.others.size(); ++b) {
        double s = 0.0;
        for (std::size_t l = 0; l < t.others.size(); ++l) s += p(alpha, t.others[l]) * t.u(l, b);
        visits(alpha, t.others[b]) = s;
    }
    const DenseVector tau = visits.row_sums();
    DenseMatrix k(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == alpha) continue;
        for (std::size_t j = 0; j < n; ++j) k(i, j) = visits(i, j) - pi[j] * tau[i];
    }
    return k;
}

SimulationEstimate simulate_additive(const DenseMatrix& p, const DenseVector& g, std::size_t alpha, std::size_t start,
                                     const SimulationConfig& cfg) {
    validate_transition_matrix(p, true);
    const std::size_t n = p.rows();
    if (g.size() != n) throw Error(ErrorCode::DimensionMismatch, "forcing function does not match P");
    if (alpha >= n || start >= n) throw Error(ErrorCode::InvalidArgument, "anchor or start state out of range");
    if (cfg.path_count < 2) throw Error(ErrorCode::InvalidArgument, "at least two paths are needed");
    if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0))
        throw Error(ErrorCode::InvalidArgument, "confidence must lie in (0, 1)");

    const DenseVector pi = stationary_vector(p);
    const double mean_g = dot(pi, g);
    std::vector<double> gbar(n);
    for (std::size_t s = 0; s < n; ++s) gbar[s] = g[s] - mean_g;

    std::vector<double> cumulative(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) cumulative[i * n + j] = (acc += p(i, j));
    }
    auto step = [&](std::size_t from, double u) {
        const double* row = cumulative.data() + from * n;
        const double target = u * row[n - 1];
        const std::size_t j = static_cast<std::size_t>(std::upper_bound(row, row + n, target) - row);
        return std::min(j, n - 1);
    };

    std::vector<double> sums(cfg.path_count);
    std::atomic<bool> exhausted{false};
    const auto paths = static_cast<std::ptrdiff_t>(cfg.path_count);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ps = 0; ps < paths; ++ps) {
        if (exhausted.load(std::memory_order_relaxed)) continue;
        const auto path = static_cast<std::uint64_t>(ps);
        SplitMix64 rng(SplitMix64::mix(cfg.seed ^ SplitMix64::mix(path + 1)));
        std::size_t state = start;
        double total = 0.0;
        std::size_t steps = 0;
        do {
            total += gbar[state];
            state = step(state, rng.uniform());
            if (++steps > cfg.max_steps) {
                exhausted.store(true, std::memory_order_relaxed);
                break;
            }
        } while (state != alpha);
        sums[static_cast<std::size_t>(ps)] = total;
    }
    if (exhausted.load()) {
        std::ostringstream msg;
        msg << "a path did not return to state " << alpha << " within " << cfg.max_steps << " steps";
        throw Error(ErrorCode::PathBudgetExceeded, msg.str());
    }

    SimulationEstimate out;
    out.paths = cfg.path_count;
    double mean = 0.0;
    for (double v : sums) mean += v;
    mean /= static_cast<double>(sums.size());
    double ss = 0.0;
    for (double v : sums) ss += (v - mean) * (v - mean);
    out.estimate = mean;
    out.std_dev = std::sqrt(ss / static_cast<double>(sums.size() - 1));
    const boost::math::students_t dist(static_cast<double>(sums.size() - 1));
    const double t = boost::math::quantile(dist, 0.5 + cfg.confidence / 2.0);
    out.half_width = t * out.std_dev / std::sqrt(static_cast<double>(sums.size()));
    return out;
}

}  // namespace pmam
