#include "pmam/ctmc.hpp"

#include <cmath>
#include <sstream>

#include "pmam/error.hpp"

namespace pmam {

namespace {

constexpr double kGeneratorSlack = 1e-10;

}  // namespace

void validate_generator(const DenseMatrix& q) {
    if (!q.square() || q.rows() == 0) throw Error(ErrorCode::DimensionMismatch, "generator must be square and nonempty");
    if (!q.all_finite()) throw Error(ErrorCode::NonFinite, "generator has non-finite rates");
    for (std::size_t i = 0; i < q.rows(); ++i) {
        double s = 0.0;
        double scale = 0.0;
        for (std::size_t j = 0; j < q.cols(); ++j) {
            if (i != j && q(i, j) < 0.0)
                throw Error(ErrorCode::InvalidModel, "negative off-diagonal rate in row " + std::to_string(i));
            s += q(i, j);
            scale = std::max(scale, std::abs(q(i, j)));
        }
        if (std::abs(s) > kGeneratorSlack * std::max(1.0, scale))
            throw Error(ErrorCode::InvalidModel, "generator row " + std::to_string(i) + " does not sum to 0");
    }
}

DenseMatrix q_fundamental(const DenseMatrix& q_bb, double pivot_tolerance) {
    if (!q_bb.square()) throw Error(ErrorCode::DimensionMismatch, "Q_BB must be square");
    if (q_bb.rows() == 0) return {};
    return inverse(-1.0 * q_bb, pivot_tolerance);
}

CensoredGenerator censor_ctmc(const DenseMatrix& q, const Partition& part, double pivot_tolerance) {
    validate_generator(q);
    const PartitionedMatrix blk = split(q, part);
    CensoredGenerator out;
    out.hat_bb = q_fundamental(blk.bb, pivot_tolerance);
    out.q_cens = blk.aa;
    if (!part.b().empty()) {
        out.exit_ab = blk.ab * out.hat_bb;
        out.q_cens += out.exit_ab * blk.ba;
    } else {
        out.exit_ab = DenseMatrix(part.a().size(), 0);
    }
    out.pi_cens = stationary_vector_generator(out.q_cens, pivot_tolerance);
    return out;
}

DenseVector stationary_ctmc(const DenseMatrix& q, double pivot_tolerance) {
    validate_generator(q);
    return stationary_vector_generator(q, pivot_tolerance);
}

double residual_ctmc(const DenseMatrix& q, const DenseMatrix& x, const DenseVector& pi) {
    const std::size_t n = q.rows();
    if (!q.square() || x.rows() != n || x.cols() != n || pi.size() != n)
        throw Error(ErrorCode::DimensionMismatch, "residual: shapes are not conformable");
    const DenseMatrix qx = q * x;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += std::abs(-qx(i, j) - ((i == j ? 1.0 : 0.0) - pi[j]));
        worst = std::max(worst, s);
    }
    return worst;
}

DenseMatrix xtilde_ctmc(const DenseMatrix& q, const Partition& part, const DenseVector& pi, const SolverConfig& cfg) {
    if (pi.size() != q.rows()) throw Error(ErrorCode::DimensionMismatch, "pi does not match the generator");
    const CensoredGenerator cg = censor_ctmc(q, part, cfg.pivot_tolerance);
    const std::size_t na = part.a().size();
    const std::size_t nb = part.b().size();
    const std::size_t n = na + nb;
    std::vector<std::size_t> order(part.a());
    order.insert(order.end(), part.b().begin(), part.b().end());
    DenseVector pi_part(n);
    for (std::size_t k = 0; k < n; ++k) pi_part[k] = pi[order[k]];

    const DenseMatrix w = group_inverse_of_operator(-1.0 * cg.q_cens, cg.pi_cens, cfg.pivot_tolerance);
    DenseMatrix n_a = hcat(DenseMatrix::identity(na), cg.exit_ab);
    n_a -= outer(DenseVector::ones(na) + cg.exit_ab.row_sums(), pi_part);
    const DenseMatrix x_a = w * n_a;

    DenseMatrix stacked(n, n);
    stacked.set_block(0, 0, x_a);
    if (nb > 0) {
        const DenseMatrix q_ba = q.gather(part.b(), part.a());
        DenseMatrix x_b = cg.hat_bb * (q_ba * x_a);
        x_b.add_block(0, na, cg.hat_bb);
        x_b -= outer(cg.hat_bb.row_sums(), pi_part);
        stacked.set_block(na, 0, x_b);
    }
    DenseMatrix x(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) x(order[i], order[j]) = stacked(i, j);

    const double res = residual_ctmc(q, x, pi);
    if (!(res <= cfg.residual_tolerance)) {
        std::ostringstream msg;
        msg << "-QX residual " << res << " exceeds " << cfg.residual_tolerance;
        throw Error(ErrorCode::ResidualTooLarge, msg.str());
    }
    return x;
}

}  // namespace pmam
