#include "pmam/censor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pmam/error.hpp"

namespace pmam {

namespace {

constexpr double kRowSumSlack = 1e-10;
constexpr double kTailWarning = 1e-8;

}  // namespace

Partition Partition::from_censor_set(std::vector<std::size_t> a, std::size_t state_count) {
    if (a.empty()) throw Error(ErrorCode::InvalidPartition, "censor set is empty");
    std::sort(a.begin(), a.end());
    if (std::adjacent_find(a.begin(), a.end()) != a.end())
        throw Error(ErrorCode::InvalidPartition, "censor set has repeated states");
    if (a.back() >= state_count)
        throw Error(ErrorCode::InvalidPartition, "censor set state " + std::to_string(a.back()) +
                                                     " outside 0.." + std::to_string(state_count - 1));
    Partition part;
    part.a_ = std::move(a);
    part.b_.reserve(state_count - part.a_.size());
    std::size_t next = 0;
    for (std::size_t s = 0; s < state_count; ++s) {
        if (next < part.a_.size() && part.a_[next] == s) {
            ++next;
            continue;
        }
        part.b_.push_back(s);
    }
    return part;
}

Partition Partition::leading(std::size_t a_size, std::size_t state_count) {
    std::vector<std::size_t> a(a_size);
    for (std::size_t i = 0; i < a_size; ++i) a[i] = i;
    return from_censor_set(std::move(a), state_count);
}

std::size_t Partition::position_in_a(std::size_t state) const {
    const auto it = std::lower_bound(a_.begin(), a_.end(), state);
    if (it == a_.end() || *it != state) return state_count();
    return static_cast<std::size_t>(it - a_.begin());
}

PartitionedMatrix split(const DenseMatrix& p, const Partition& part) {
    if (!p.square() || p.rows() != part.state_count())
        throw Error(ErrorCode::DimensionMismatch, "partition of " + std::to_string(part.state_count()) +
                                                      " states for a " + std::to_string(p.rows()) +
                                                      "-state matrix");
    return {p.gather(part.a(), part.a()), p.gather(part.a(), part.b()), p.gather(part.b(), part.a()),
            p.gather(part.b(), part.b())};
}

void validate_transition_matrix(const DenseMatrix& p, bool stochastic) {
    if (!p.square()) throw Error(ErrorCode::DimensionMismatch, "transition matrix must be square");
    if (p.rows() == 0) throw Error(ErrorCode::DimensionMismatch, "transition matrix is empty");
    if (!p.all_finite()) throw Error(ErrorCode::NonFinite, "transition matrix has non-finite entries");
    for (std::size_t i = 0; i < p.rows(); ++i) {
        double s = 0.0;
        for (double v : p.row(i)) {
            if (v < 0.0)
                throw Error(ErrorCode::NotSubstochastic, "negative entry in row " + std::to_string(i));
            s += v;
        }
        if (s > 1.0 + kRowSumSlack)
            throw Error(ErrorCode::NotSubstochastic, "row " + std::to_string(i) + " sums to " + std::to_string(s));
        if (stochastic && s < 1.0 - kRowSumSlack)
            throw Error(ErrorCode::NotStochastic, "row " + std::to_string(i) + " sums to " + std::to_string(s));
    }
}

DenseMatrix fundamental_matrix(const DenseMatrix& p_bb, double pivot_tolerance) {
    if (!p_bb.square()) throw Error(ErrorCode::DimensionMismatch, "P_BB must be square");
    if (p_bb.rows() == 0) return {};
    for (std::size_t i = 0; i < p_bb.rows(); ++i) {
        double s = 0.0;
        for (double v : p_bb.row(i)) {
            if (v < 0.0) throw Error(ErrorCode::NotSubstochastic, "negative entry in P_BB");
            s += v;
        }
        if (s > 1.0 + kRowSumSlack)
            throw Error(ErrorCode::NotSubstochastic,
                        "P_BB row " + std::to_string(i) + " sums to " + std::to_string(s));
    }
    return inverse(DenseMatrix::identity(p_bb.rows()) - p_bb, pivot_tolerance);
}

CensoredChain censor_dtmc(const DenseMatrix& p, const Partition& part, double pivot_tolerance) {
    validate_transition_matrix(p, false);
    const PartitionedMatrix blk = split(p, part);
    CensoredChain out;
    out.hat_bb = fundamental_matrix(blk.bb, pivot_tolerance);
    out.p_cens = blk.aa;
    if (!part.b().empty()) {
        out.exit_ab = blk.ab * out.hat_bb;
        out.p_cens += out.exit_ab * blk.ba;
    } else {
        out.exit_ab = DenseMatrix(part.a().size(), 0);
    }
    const DenseVector rs = out.p_cens.row_sums();
    for (double s : rs.values()) out.tail_mass = std::max(out.tail_mass, 1.0 - s);
    if (out.tail_mass > kTailWarning) {
        std::ostringstream msg;
        msg << "censored chain loses mass " << out.tail_mass << " through the truncation boundary";
        out.warnings.push_back(msg.str());
    }
    out.pi_cens = stationary_vector(out.p_cens, pivot_tolerance);
    return out;
}

DenseVector to_model_order(const DenseVector& partitioned, const Partition& part) {
    DenseVector out(part.state_count());
    const std::size_t na = part.a().size();
    for (std::size_t k = 0; k < na; ++k) out[part.a()[k]] = partitioned[k];
    for (std::size_t k = 0; k < part.b().size(); ++k) out[part.b()[k]] = partitioned[na + k];
    return out;
}

DenseVector stationary_from_censored(const CensoredChain& chain, const Partition& part) {
    const std::size_t na = part.a().size();
    const std::size_t nb = part.b().size();
    // c = 1 / (pi^(A)ᵀ [I, P_AB Ĥ] e)
    const DenseVector exit_mass = chain.exit_ab.row_sums();
    double denom = 0.0;
    for (std::size_t k = 0; k < na; ++k) denom += chain.pi_cens[k] * (1.0 + exit_mass[k]);
    const double c = 1.0 / denom;
    DenseVector pi_a = c * chain.pi_cens;
    DenseVector pi_b = nb ? left_multiply(pi_a, chain.exit_ab) : DenseVector();
    DenseVector joined(na + nb);
    for (std::size_t k = 0; k < na; ++k) joined[k] = pi_a[k];
    for (std::size_t k = 0; k < nb; ++k) joined[na + k] = pi_b[k];
    return to_model_order(joined, part);
}

DenseVector stationary_via_censoring(const DenseMatrix& p, const Partition& part, double pivot_tolerance) {
    return stationary_from_censored(censor_dtmc(p, part, pivot_tolerance), part);
}

}  // namespace pmam
