#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "pmam/ctmc.hpp"
#include "pmam/error.hpp"
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

DenseMatrix birth_death(std::size_t n, double up, double down) {
    DenseMatrix q(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i + 1 < n) q(i, i + 1) = up;
        if (i > 0) q(i, i - 1) = down;
        q(i, i) = -((i + 1 < n ? up : 0.0) + (i > 0 ? down : 0.0));
    }
    return q;
}

Partition random_partition(std::mt19937_64& rng, std::size_t n) {
    std::vector<std::size_t> a;
    std::bernoulli_distribution coin(0.4);
    for (std::size_t s = 0; s < n; ++s)
        if (coin(rng)) a.push_back(s);
    if (a.empty()) a.push_back(n / 2);
    return Partition::from_censor_set(a, n);
}

}  // namespace

TEST(Generator, ValidationCatchesBadRows) {
    EXPECT_NO_THROW(validate_generator(DenseMatrix{{-1, 1}, {2, -2}}));
    EXPECT_EQ(code_of([] { validate_generator(DenseMatrix{{-1, 0.5}, {2, -2}}); }), ErrorCode::InvalidModel);
    EXPECT_THROW(validate_generator(DenseMatrix{{1, -1}, {2, -2}}), Error);
    EXPECT_THROW(validate_generator(DenseMatrix(2, 3)), Error);
}

TEST(QFundamental, ScalarAndBlockDiagonal) {
    EXPECT_NEAR(q_fundamental(DenseMatrix{{-4}})(0, 0), 0.25, 1e-15);
    const DenseMatrix q{{-2, 1, 0, 0}, {0, -3, 0, 0}, {0, 0, -1, 0}, {0, 0, 0.5, -5}};
    const DenseMatrix h = q_fundamental(q);
    EXPECT_LE(max_abs_diff(h.block(0, 0, 2, 2), q_fundamental(q.block(0, 0, 2, 2))), 1e-15);
    EXPECT_LE(max_abs_diff(h.block(2, 2, 2, 2), q_fundamental(q.block(2, 2, 2, 2))), 1e-15);
    EXPECT_EQ(max_abs(h.block(0, 2, 2, 2)), 0.0);
    EXPECT_LE(max_abs_diff(-1.0 * q * h, DenseMatrix::identity(4)), 1e-14);
}

TEST(CensorCtmc, FullSetAndSingleState) {
    const DenseMatrix q = birth_death(6, 1.0, 2.0);
    EXPECT_EQ(censor_ctmc(q, Partition::leading(6, 6)).q_cens, q);
    const CensoredGenerator one = censor_ctmc(q, Partition::leading(1, 6));
    EXPECT_NEAR(one.q_cens(0, 0), 0.0, 1e-14);
    EXPECT_NEAR(one.pi_cens[0], 1.0, 1e-15);
}

TEST(CensorCtmc, PropertiesOnRandomGenerators) {
    std::mt19937_64 rng(17);
    for (const DenseMatrix& q : pmam::testing::random_generator_suite(60, 5)) {
        const Partition part = random_partition(rng, q.rows());
        const CensoredGenerator c = censor_ctmc(q, part);
        const DenseVector sums = c.q_cens.row_sums();
        for (double v : sums.values()) EXPECT_NEAR(v, 0.0, 1e-10);
        for (std::size_t i = 0; i < c.q_cens.rows(); ++i)
            for (std::size_t j = 0; j < c.q_cens.cols(); ++j)
                if (i != j) EXPECT_GE(c.q_cens(i, j), -1e-14);
        if (!part.b().empty()) {
            const PartitionedMatrix blocks = split(q, part);
            const DenseVector exit = c.hat_bb * (blocks.ba * DenseVector::ones(part.a().size()));
            EXPECT_LE(max_abs(exit - DenseVector::ones(exit.size())), 1e-9);
        }
        const DenseVector pi = stationary_ctmc(q);
        double mass = 0.0;
        for (std::size_t s : part.a()) mass += pi[s];
        for (std::size_t k = 0; k < part.a().size(); ++k) EXPECT_NEAR(c.pi_cens[k], pi[part.a()[k]] / mass, 1e-9);
    }
}

TEST(CensorCtmc, BirthDeathToOrigin) {
    const CensoredGenerator c = censor_ctmc(birth_death(8, 0.7, 1.3), Partition::from_censor_set({0}, 8));
    EXPECT_NEAR(c.q_cens(0, 0), 0.0, 1e-14);
}

TEST(StationaryCtmc, BirthDeathIsGeometric) {
    const double rho = 0.6;
    const DenseVector pi = stationary_ctmc(birth_death(10, rho, 1.0));
    for (std::size_t i = 1; i < 10; ++i) EXPECT_NEAR(pi[i] / pi[i - 1], rho, 1e-12);
}

TEST(XtildeCtmc, TwoStateDeviationClosedForm) {
    // D = [[a, -a], [-b, b]] / (a + b)^2 for Q = [[-a, a], [b, -b]].
    const double a = 1.5;
    const double b = 0.4;
    const DenseMatrix q{{-a, a}, {b, -b}};
    const DenseVector pi = stationary_ctmc(q);
    const DenseMatrix expected = (1.0 / ((a + b) * (a + b))) * DenseMatrix{{a, -a}, {-b, b}};
    for (std::size_t s : {0u, 1u}) {
        const DenseMatrix x = xtilde_ctmc(q, Partition::from_censor_set({s}, 2), pi);
        EXPECT_LE(max_abs_diff(centered(x, pi), expected), 1e-10);
    }
}

TEST(XtildeCtmc, ResidualOnRandomGenerators) {
    std::mt19937_64 rng(4);
    for (const DenseMatrix& q : pmam::testing::random_generator_suite(100, 77)) {
        const DenseVector pi = stationary_ctmc(q);
        const DenseMatrix x = xtilde_ctmc(q, random_partition(rng, q.rows()), pi);
        EXPECT_LE(residual_ctmc(q, x, pi), 1e-8);
    }
}

TEST(XtildeCtmc, AgreesWithUniformizedChain) {
    std::mt19937_64 rng(8);
    for (const DenseMatrix& q : pmam::testing::random_generator_suite(20, 123)) {
        const std::size_t n = q.rows();
        double lambda = 0.0;
        for (std::size_t i = 0; i < n; ++i) lambda = std::max(lambda, -q(i, i));
        lambda *= 1.05;
        const DenseMatrix p = DenseMatrix::identity(n) + (1.0 / lambda) * q;
        const Partition part = random_partition(rng, n);
        const DenseVector pi = stationary_ctmc(q);
        const DenseVector pi_p = stationary_via_censoring(p, part);
        EXPECT_LE(max_abs(pi - pi_p), 1e-9);
        const DenseMatrix xq = xtilde_ctmc(q, part, pi);
        const DenseMatrix xp = solve_xtilde(p, part, pi_p);
        EXPECT_LE(max_abs_diff(lambda * centered(xq, pi), centered(xp, pi_p)), 1e-8);
        const std::size_t alpha = part.a().front();
        EXPECT_LE(max_abs_diff(lambda * anchored(xq, alpha), anchored(xp, alpha)), 1e-8);
    }
}

TEST(XtildeCtmc, WrongPiIsReported) {
    const DenseMatrix q{{-1, 1}, {1, -1}};
    SolverConfig cfg;
    cfg.residual_tolerance = 1e-12;
    EXPECT_EQ(code_of([&] { xtilde_ctmc(q, Partition::leading(1, 2), DenseVector{0.9, 0.1}, cfg); }),
              ErrorCode::ResidualTooLarge);
}
