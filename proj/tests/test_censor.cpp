#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "pmam/censor.hpp"
#include "pmam/error.hpp"
#include "pmam/examples.hpp"
#include "pmam/oracle.hpp"
#include "reference.hpp"
#include "support.hpp"

using namespace pmam;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::InvalidArgument;
}

double max_row_sum_gap(const DenseMatrix& p) {
    double gap = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i) gap = std::max(gap, std::abs(p.row_sums()[i] - 1.0));
    return gap;
}

}  // namespace

TEST(Partition, ComplementInAscendingOrder) {
    const Partition part = Partition::from_censor_set({4, 1}, 6);
    EXPECT_EQ(part.a(), (std::vector<std::size_t>{1, 4}));
    EXPECT_EQ(part.b(), (std::vector<std::size_t>{0, 2, 3, 5}));
    EXPECT_EQ(part.position_in_a(4), 1u);
    EXPECT_EQ(part.position_in_a(2), part.state_count());
}

TEST(Partition, InvalidSetsAreRejected) {
    EXPECT_EQ(code_of([] { Partition::from_censor_set({}, 3); }), ErrorCode::InvalidPartition);
    EXPECT_EQ(code_of([] { Partition::from_censor_set({1, 1}, 3); }), ErrorCode::InvalidPartition);
    EXPECT_EQ(code_of([] { Partition::from_censor_set({3}, 3); }), ErrorCode::InvalidPartition);
    const DenseMatrix p{{0.5, 0.5}, {0.5, 0.5}};
    EXPECT_EQ(code_of([&] { censor_dtmc(p, Partition::leading(1, 3)); }), ErrorCode::DimensionMismatch);
}

TEST(FundamentalMatrix, ZeroBlockGivesIdentity) {
    EXPECT_EQ(fundamental_matrix(DenseMatrix(3, 3)), DenseMatrix::identity(3));
}

TEST(FundamentalMatrix, SingleStateGeometricVisits) {
    EXPECT_NEAR(fundamental_matrix(DenseMatrix{{0.5}})(0, 0), 2.0, 1e-15);
}

TEST(FundamentalMatrix, MatchesNeumannSeries) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        DenseMatrix pbb(3, 3);
        for (std::size_t i = 0; i < 3; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < 3; ++j) s += (pbb(i, j) = u(rng));
            const double mass = 0.5 + 0.4 * u(rng);
            for (std::size_t j = 0; j < 3; ++j) pbb(i, j) *= mass / s;
        }
        DenseMatrix series = DenseMatrix::identity(3);
        DenseMatrix term = DenseMatrix::identity(3);
        for (int k = 1; k <= 2000; ++k) {
            term = term * pbb;
            series += term;
        }
        const DenseMatrix hat = fundamental_matrix(pbb);
        EXPECT_LE(max_abs_diff(hat, series), 1e-8);
        for (double v : hat.values()) EXPECT_GE(v, 0.0);
        EXPECT_LE(max_abs_diff((DenseMatrix::identity(3) - pbb) * hat, DenseMatrix::identity(3)), 1e-8);
    }
}

TEST(FundamentalMatrix, Errors) {
    EXPECT_EQ(code_of([] { fundamental_matrix(DenseMatrix{{0.7, 0.4}, {0.1, 0.1}}); }), ErrorCode::NotSubstochastic);
    EXPECT_EQ(code_of([] { fundamental_matrix(DenseMatrix{{1.0, 0.0}, {0.0, 0.5}}); }), ErrorCode::SingularMatrix);
}

TEST(CensorDtmc, FullSetReturnsTheChain) {
    std::mt19937_64 rng(5);
    const DenseMatrix p = pmam::testing::random_chain(rng, 6);
    const CensoredChain chain = censor_dtmc(p, Partition::leading(6, 6));
    EXPECT_EQ(chain.p_cens, p);
    EXPECT_EQ(chain.hat_bb.rows(), 0u);
}

TEST(CensorDtmc, TwoStateStationaryVector) {
    const double a = 0.35;
    const double b = 0.6;
    const DenseMatrix p{{1 - a, a}, {b, 1 - b}};
    const DenseVector pi = stationary_via_censoring(p, Partition::from_censor_set({0}, 2));
    EXPECT_NEAR(pi[0], b / (a + b), 1e-14);
    EXPECT_NEAR(pi[1], a / (a + b), 1e-14);
}

TEST(CensorDtmc, PropertiesOnRandomChains) {
    std::mt19937_64 pick(99);
    for (const DenseMatrix& p : pmam::testing::random_chain_suite(60, 31)) {
        const std::size_t n = p.rows();
        std::vector<std::size_t> a1;
        std::vector<std::size_t> a2;
        std::bernoulli_distribution coin(0.5);
        for (std::size_t s = 0; s < n; ++s) (coin(pick) ? a1 : a2).push_back(s);
        if (a1.empty()) a1.push_back(0);
        if (a2.empty()) a2.push_back(n - 1);
        const Partition part1 = Partition::from_censor_set(a1, n);
        const Partition part2 = Partition::from_censor_set(a2, n);

        const CensoredChain chain = censor_dtmc(p, part1);
        EXPECT_LE(max_row_sum_gap(chain.p_cens), 1e-8);
        EXPECT_LE(max_abs(left_multiply(chain.pi_cens, chain.p_cens) - chain.pi_cens), 1e-8);
        EXPECT_NEAR(chain.pi_cens.sum(), 1.0, 1e-12);
        for (double v : chain.hat_bb.values()) EXPECT_GE(v, -1e-15);
        const PartitionedMatrix blocks = split(p, part1);
        if (!part1.b().empty()) {
            const DenseVector exit = chain.hat_bb * (blocks.ba * DenseVector::ones(a1.size()));
            EXPECT_LE(max_abs(exit - DenseVector::ones(exit.size())), 1e-8);
        }

        const DenseVector pi1 = stationary_via_censoring(p, part1);
        const DenseVector pi2 = stationary_via_censoring(p, part2);
        EXPECT_LE(max_abs(pi1 - pi2), 1e-8);
        EXPECT_LE(max_abs(left_multiply(pi1, p) - pi1), 1e-8);
        EXPECT_NEAR(pi1.sum(), 1.0, 1e-8);

        const DenseVector h = expected_hitting_times(p, a1.front());
        EXPECT_NEAR(pi1[a1.front()] * h[a1.front()], 1.0, 1e-6);
    }
}

TEST(CensorDtmc, PlainTruncationWarnsAboutLostMass) {
    const DenseMatrix p = examples::scalar_gig1().expand_dense(3);
    const CensoredChain chain = censor_dtmc(p, Partition::leading(1, p.rows()));
    EXPECT_GT(chain.tail_mass, 1e-8);
    EXPECT_FALSE(chain.warnings.empty());
    const DenseMatrix deep = examples::scalar_gig1().expand_dense(60);
    EXPECT_LT(censor_dtmc(deep, Partition::leading(1, deep.rows())).tail_mass, 1e-8);
}

TEST(CensorDtmc, ScalarModelOnTwoStates) {
    const DenseMatrix p = examples::scalar_gig1().expand_dense(200);
    const CensoredChain chain = censor_dtmc(p, Partition::leading(2, p.rows()));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            EXPECT_NEAR(chain.p_cens(i, j), reference::scalar_gig1::pa_cens[i][j], 1e-3);
    EXPECT_NEAR(chain.pi_cens[0], reference::scalar_gig1::pi_a_cens[0], 1e-3);
    EXPECT_NEAR(chain.pi_cens[1], reference::scalar_gig1::pi_a_cens[1], 1e-3);
    // Closed forms: P^(A)(0,1) = 1 - √2/2, P^(A)(1,1) = (2 - √2)/4.
    EXPECT_NEAR(chain.p_cens(0, 1), 1.0 - std::sqrt(0.5), 1e-12);
    EXPECT_NEAR(chain.p_cens(1, 1), (2.0 - std::sqrt(2.0)) / 4.0, 1e-12);

    const DenseVector pi = stationary_via_censoring(p, Partition::leading(2, p.rows()));
    for (std::size_t s = 0; s < reference::scalar_gig1::pi.size(); ++s)
        EXPECT_NEAR(pi[s], reference::scalar_gig1::pi[s], 5e-4) << "state " << s;
}

TEST(CensorDtmc, NegativeCustomerModelOnLevelZero) {
    const DenseMatrix p = examples::map_g1_negative().expand_dense(200);
    const Partition part = Partition::leading(3, p.rows());
    const CensoredChain chain = censor_dtmc(p, part);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(chain.p_cens(i, j), reference::map_g1_neg::p0[i][j], 1e-3);
        EXPECT_NEAR(chain.pi_cens[i], reference::map_g1_neg::pi0_cens[i], 1e-3);
    }
    const DenseVector pi = stationary_via_censoring(p, part);
    EXPECT_NEAR(pi[0] + pi[1] + pi[2], reference::map_g1_neg::c, 1e-3);
    for (std::size_t level = 0; level < reference::map_g1_neg::pi.size(); ++level)
        for (std::size_t phase = 0; phase < 3; ++phase)
            EXPECT_NEAR(pi[3 * level + phase], reference::map_g1_neg::pi[level][phase], 5e-4);
}

TEST(ToModelOrder, ScattersPartitionOrderedValues) {
    const Partition part = Partition::from_censor_set({2}, 3);
    EXPECT_EQ(to_model_order(DenseVector{30, 10, 20}, part), (DenseVector{10, 20, 30}));
}
