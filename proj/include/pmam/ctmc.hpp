#pragma once

// Continuous-time counterpart: censored generators and X̃ for
// -Q X = I - e piᵀ.

#include "pmam/censor.hpp"
#include "pmam/config.hpp"
#include "pmam/linalg.hpp"

namespace pmam {

/// Square, finite, nonnegative off-diagonal, rows summing to 0 within 1e-10.
void validate_generator(const DenseMatrix& q);

/// (-Q_BB)^-1.
DenseMatrix q_fundamental(const DenseMatrix& q_bb, double pivot_tolerance = kDefaultPivotTolerance);

struct CensoredGenerator {
    DenseMatrix q_cens;   // Q^(A)
    DenseVector pi_cens;  // its stationary vector
    DenseMatrix hat_bb;   // (-Q_BB)^-1
    DenseMatrix exit_ab;  // Q_AB (-Q_BB)^-1
};

/// Q^(A) = Q_AA + Q_AB (-Q_BB)^-1 Q_BA.
CensoredGenerator censor_ctmc(const DenseMatrix& q, const Partition& part,
                              double pivot_tolerance = kDefaultPivotTolerance);

DenseVector stationary_ctmc(const DenseMatrix& q, double pivot_tolerance = kDefaultPivotTolerance);

/// ‖-Q X - (I - e piᵀ)‖∞.
double residual_ctmc(const DenseMatrix& q, const DenseMatrix& x, const DenseVector& pi);

/// X̃_A = (-Q^(A))# ([I, Q_AB Q̂_BB] - (e + Q_AB Q̂_BB e) piᵀ),
/// X̃_B = Q̂_BB Q_BA X̃_A + [O, Q̂_BB] - Q̂_BB e piᵀ, in model order.
/// Throws ResidualTooLarge above cfg.residual_tolerance.
DenseMatrix xtilde_ctmc(const DenseMatrix& q, const Partition& part, const DenseVector& pi,
                        const SolverConfig& cfg = {});

}  // namespace pmam
