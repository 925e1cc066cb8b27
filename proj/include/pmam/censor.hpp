#pragma once

// Censoring a discrete-time chain on a finite subset A and rebuilding the
// full stationary vector from the censored one.

#include <cstddef>
#include <string>
#include <vector>

#include "pmam/linalg.hpp"

namespace pmam {

/// Disjoint split of {0, ..., n-1} into the censor set A and its complement B,
/// both ascending.
class Partition {
public:
    static Partition from_censor_set(std::vector<std::size_t> a, std::size_t state_count);
    /// A = {0, ..., a_size-1}.
    static Partition leading(std::size_t a_size, std::size_t state_count);

    const std::vector<std::size_t>& a() const noexcept { return a_; }
    const std::vector<std::size_t>& b() const noexcept { return b_; }
    std::size_t state_count() const noexcept { return a_.size() + b_.size(); }
    /// Position of a state within A, or state_count() if it is in B.
    std::size_t position_in_a(std::size_t state) const;

private:
    std::vector<std::size_t> a_;
    std::vector<std::size_t> b_;
};

/// The four blocks of P under a partition.
struct PartitionedMatrix {
    DenseMatrix aa, ab, ba, bb;
};

PartitionedMatrix split(const DenseMatrix& p, const Partition& part);

struct CensoredChain {
    DenseMatrix p_cens;   // P^(A) over A
    DenseVector pi_cens;  // stationary vector of P^(A)
    DenseMatrix hat_bb;   // (I - P_BB)^-1
    DenseMatrix exit_ab;  // P_AB (I - P_BB)^-1, reused by the Poisson solvers
    double tail_mass = 0.0;  // largest row deficit of P^(A); nonzero only for truncated models
    std::vector<std::string> warnings;
};

/// (I - P_BB)^-1 for a substochastic block.
DenseMatrix fundamental_matrix(const DenseMatrix& p_bb, double pivot_tolerance = kDefaultPivotTolerance);

/// Checks that P is square, finite, nonnegative and has row sums at most
/// 1 + 1e-10 (and at least 1 - 1e-10 when `stochastic` is set).
void validate_transition_matrix(const DenseMatrix& p, bool stochastic);

/// P^(A) = P_AA + P_AB (I - P_BB)^-1 P_BA and its stationary vector. P may be
/// a plain truncation of a stochastic chain; the mass lost from A is reported
/// as tail_mass with a warning above 1e-8.
CensoredChain censor_dtmc(const DenseMatrix& p, const Partition& part,
                          double pivot_tolerance = kDefaultPivotTolerance);

/// Full stationary vector, in model order, from the censored chain.
DenseVector stationary_via_censoring(const DenseMatrix& p, const Partition& part,
                                     double pivot_tolerance = kDefaultPivotTolerance);

DenseVector stationary_from_censored(const CensoredChain& chain, const Partition& part);

/// Entries of a partition-ordered vector placed back in model order.
DenseVector to_model_order(const DenseVector& partitioned, const Partition& part);

}  // namespace pmam
