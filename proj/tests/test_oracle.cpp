#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include <omp.h>

#include "pmam/error.hpp"
#include "pmam/linalg.hpp"
#include "pmam/oracle.hpp"
#include "pmam/poisson.hpp"
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

}  // namespace

TEST(SplitMix64, ReferenceSequence) {
    SplitMix64 rng(1234567);
    const std::uint64_t expected[] = {6457827717110365317ULL, 3203168211198807973ULL, 9817491932198370423ULL,
                                      4593380528125082431ULL, 16408922859458223821ULL};
    for (std::uint64_t v : expected) EXPECT_EQ(rng.next(), v);
}

TEST(SplitMix64, UniformStaysInUnitInterval) {
    SplitMix64 rng(9);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000, 0.5, 0.01);
}

TEST(DeviationSeries, MatchesGroupInverse) {
    for (const DenseMatrix& p : pmam::testing::random_chain_suite(25, 808)) {
        const DenseVector pi = stationary_vector(p);
        EXPECT_LE(max_abs_diff(deviation_by_series(p, pi, 1e-12), group_inverse(p, pi)), 1e-8);
    }
}

TEST(DeviationSeries, PeriodicChainDoesNotConverge) {
    const DenseMatrix p = pmam::testing::cycle_chain(4);
    EXPECT_EQ(code_of([&] { deviation_by_series(p, stationary_vector(p), 1e-10, 5000); }), ErrorCode::NoConvergence);
}

TEST(HittingTimes, TwoStateClosedForm) {
    const double a = 0.25;
    const double b = 0.6;
    const DenseMatrix p{{1 - a, a}, {b, 1 - b}};
    const DenseVector h = expected_hitting_times(p, 1);
    EXPECT_NEAR(h[0], 1.0 / a, 1e-12);
    EXPECT_NEAR(h[1], (a + b) / a, 1e-12);
}

TEST(HittingTimes, KacOnRandomChains) {
    for (const DenseMatrix& p : pmam::testing::random_chain_suite(30, 12)) {
        const DenseVector pi = stationary_vector(p);
        for (std::size_t t = 0; t < p.rows(); t += 2) EXPECT_NEAR(pi[t] * expected_hitting_times(p, t)[t], 1.0, 1e-9);
    }
}

TEST(TabooK, RowsSumToZeroAndMatchAnchoredGroupInverse) {
    for (const DenseMatrix& p : pmam::testing::random_chain_suite(25, 3)) {
        const DenseVector pi = stationary_vector(p);
        const std::size_t alpha = p.rows() / 2;
        const DenseMatrix k = k_by_taboo(p, pi, alpha);
        for (double v : k.row(alpha)) EXPECT_EQ(v, 0.0);
        const DenseVector sums = k.row_sums();
        for (double v : sums.values()) EXPECT_NEAR(v, 0.0, 1e-10);
        EXPECT_LE(max_abs_diff(k, anchored(group_inverse(p, pi), alpha)), 1e-9);
    }
}

TEST(Simulation, IndependentOfThreadCount) {
    std::mt19937_64 rng(1);
    const DenseMatrix p = pmam::testing::random_chain(rng, 6);
    const DenseVector g{1, 0, 3, -1, 2, 5};
    SimulationConfig cfg;
    cfg.path_count = 3000;
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const SimulationEstimate one = simulate_additive(p, g, 0, 4, cfg);
    omp_set_num_threads(4);
    const SimulationEstimate four = simulate_additive(p, g, 0, 4, cfg);
    omp_set_num_threads(saved);
    EXPECT_EQ(one.estimate, four.estimate);
    EXPECT_EQ(one.half_width, four.half_width);
    EXPECT_EQ(one.paths, 3000u);
}

TEST(Simulation, IntervalCoversTabooValue) {
    std::mt19937_64 rng(2);
    const DenseMatrix p = pmam::testing::random_chain(rng, 5);
    const DenseVector pi = stationary_vector(p);
    const DenseVector g{2, -1, 0.5, 4, 1};
    const DenseVector exact = k_by_taboo(p, pi, 0) * g;
    SimulationConfig cfg;
    cfg.confidence = 0.99;
    // Twice the 99% half-width is about five standard errors.
    for (std::size_t start = 1; start < 5; ++start) {
        const SimulationEstimate est = simulate_additive(p, g, 0, start, cfg);
        EXPECT_LE(std::abs(est.estimate - exact[start]), 2.0 * est.half_width) << start << ": " << est.estimate << " ± " << est.half_width
                                                << " vs " << exact[start];
        EXPECT_GT(est.half_width, 0.0);
    }
}

TEST(Simulation, PathBudget) {
    const DenseMatrix p = pmam::testing::cycle_chain(10);
    SimulationConfig cfg;
    cfg.path_count = 10;
    cfg.max_steps = 5;
    EXPECT_EQ(code_of([&] { simulate_additive(p, DenseVector::ones(10), 0, 1, cfg); }),
              ErrorCode::PathBudgetExceeded);
}
