#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pmam/error.hpp"
#include "pmam/linalg.hpp"
#include "support.hpp"

using namespace pmam;

namespace {

void expect_matrix_near(const DenseMatrix& a, const DenseMatrix& b, double tol) {
    ASSERT_EQ(a.rows(), b.rows());
    ASSERT_EQ(a.cols(), b.cols());
    EXPECT_LE(max_abs_diff(a, b), tol);
}

}  // namespace

TEST(DenseMatrix, ConstructionAndAccess) {
    DenseMatrix m{{1, 2, 3}, {4, 5, 6}};
    EXPECT_EQ(m.rows(), 2u);
    EXPECT_EQ(m.cols(), 3u);
    EXPECT_EQ(m(1, 2), 6.0);
    EXPECT_EQ(m.transpose()(2, 1), 6.0);
    EXPECT_EQ(m.row_sums()[1], 15.0);
    EXPECT_EQ(m.block(0, 1, 2, 2), (DenseMatrix{{2, 3}, {5, 6}}));
    EXPECT_THROW(DenseMatrix::from_rows({{1, 2}, {3}}), Error);
}

TEST(DenseMatrix, ArithmeticMatchesHandComputation) {
    const DenseMatrix a{{1, 2}, {3, 4}};
    const DenseMatrix b{{0, 1}, {1, 0}};
    EXPECT_EQ(a * b, (DenseMatrix{{2, 1}, {4, 3}}));
    EXPECT_EQ(a + b, (DenseMatrix{{1, 3}, {4, 4}}));
    EXPECT_EQ(left_multiply(DenseVector{1, 1}, a), (DenseVector{4, 6}));
    EXPECT_EQ(a * (DenseVector{1, -1}), (DenseVector{-1, -1}));
    EXPECT_EQ(outer(DenseVector{1, 2}, DenseVector{3, 4}), (DenseMatrix{{3, 4}, {6, 8}}));
    EXPECT_EQ(power(a, 0), DenseMatrix::identity(2));
    EXPECT_EQ(power(a, 3), a * a * a);
    EXPECT_THROW(a * DenseMatrix(3, 3), Error);
}

TEST(DenseMatrix, InfinityNorm) {
    EXPECT_EQ(infinity_norm(DenseMatrix(3, 3)), 0.0);
    EXPECT_EQ(infinity_norm(DenseMatrix{{1, -2}, {3, 0}}), 3.0);
    EXPECT_EQ(infinity_norm(DenseMatrix{{-5}}), 5.0);
}

TEST(DenseMatrix, ZeroSizedBlocksComposeWithoutSpecialCases) {
    const DenseMatrix empty(0, 3);
    EXPECT_TRUE(empty.empty());
    EXPECT_EQ((DenseMatrix(2, 0) * empty).rows(), 2u);
    EXPECT_EQ(max_abs(DenseMatrix(2, 0) * empty), 0.0);
}

TEST(SolveLinear, ScalarAndIdentity) {
    EXPECT_NEAR(solve_linear(DenseMatrix{{2}}, DenseMatrix{{4}})(0, 0), 2.0, 1e-15);
    std::mt19937_64 rng(3);
    const DenseMatrix rhs = pmam::testing::random_matrix(rng, 3, 4);
    EXPECT_EQ(solve_linear(DenseMatrix::identity(3), rhs), rhs);
}

TEST(SolveLinear, TwoByTwoInverse) {
    const DenseMatrix m{{2, 1}, {1, 3}};
    const DenseMatrix x = inverse(m);
    expect_matrix_near(x, DenseMatrix{{0.6, -0.2}, {-0.2, 0.4}}, 1e-15);
    expect_matrix_near(m * x, DenseMatrix::identity(2), 1e-15);
}

TEST(SolveLinear, ResidualBoundOnRandomSystems) {
    std::mt19937_64 rng(11);
    for (std::size_t n = 1; n <= 40; n += 3) {
        DenseMatrix m = pmam::testing::random_matrix(rng, n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) += 2.0;
        const DenseMatrix rhs = pmam::testing::random_matrix(rng, n, 3);
        const DenseMatrix x = solve_linear(m, rhs);
        EXPECT_LE(infinity_norm(m * x - rhs), 1e-10 * std::max(1.0, infinity_norm(rhs))) << "n = " << n;
    }
}

TEST(SolveLinear, PivotingHandlesZeroLeadingEntry) {
    const DenseMatrix m{{0, 1}, {1, 0}};
    expect_matrix_near(solve_linear(m, DenseMatrix{{3}, {5}}), DenseMatrix{{5}, {3}}, 0.0);
}

TEST(SolveLinear, SingularMatrixIsReported) {
    try {
        solve_linear(DenseMatrix{{1, 2}, {2, 4}}, DenseMatrix::identity(2));
        FAIL() << "expected SingularMatrix";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SingularMatrix);
    }
    EXPECT_THROW(solve_linear(DenseMatrix(2, 3), DenseMatrix(2, 1)), Error);
    EXPECT_THROW(solve_linear(DenseMatrix::identity(2), DenseMatrix(3, 1)), Error);
}

TEST(SolveLinear, NearSingularByRelativePivot) {
    const double tiny = 1e-15;
    EXPECT_THROW(inverse(DenseMatrix{{1, 1}, {1, 1 + tiny}}), Error);
    EXPECT_NO_THROW(inverse(DenseMatrix{{1e-20, 0}, {0, 1e-20}}));
}

TEST(StationaryVector, TwoStateClosedForm) {
    const double a = 0.3;
    const double b = 0.1;
    const DenseVector pi = stationary_vector(DenseMatrix{{1 - a, a}, {b, 1 - b}});
    EXPECT_NEAR(pi[0], b / (a + b), 1e-15);
    EXPECT_NEAR(pi[1], a / (a + b), 1e-15);
}

TEST(StationaryVector, GeneratorTwoState) {
    const DenseVector pi = stationary_vector_generator(DenseMatrix{{-2, 2}, {3, -3}});
    EXPECT_NEAR(pi[0], 0.6, 1e-15);
    EXPECT_NEAR(pi[1], 0.4, 1e-15);
}

TEST(GroupInverse, SingleState) {
    EXPECT_EQ(group_inverse(DenseMatrix{{1}}, DenseVector{1}), (DenseMatrix{{0}}));
}

TEST(GroupInverse, SymmetricTwoState) {
    expect_matrix_near(group_inverse(DenseMatrix{{0.5, 0.5}, {0.5, 0.5}}, DenseVector{0.5, 0.5}),
                       DenseMatrix{{0.5, -0.5}, {-0.5, 0.5}}, 1e-15);
}

TEST(GroupInverse, TwoStateClosedForm) {
    // W = [[b, -b], [-a, a]] / (a + b)^2 for P = [[1-a, a], [b, 1-b]].
    const double a = 0.2;
    const double b = 0.7;
    const DenseMatrix p{{1 - a, a}, {b, 1 - b}};
    const DenseMatrix expected = (1.0 / ((a + b) * (a + b))) * DenseMatrix{{a, -a}, {-b, b}};
    expect_matrix_near(group_inverse(p, stationary_vector(p)), expected, 1e-14);
}

TEST(GroupInverse, DefiningIdentitiesOnCensoredExampleChain) {
    const DenseMatrix p{{0.7071, 0.2929}, {0.8536, 0.1464}};
    const DenseVector pi = stationary_vector(p);
    EXPECT_NEAR(pi[0], 0.7445, 1e-3);
    EXPECT_NEAR(pi[1], 0.2555, 1e-3);
    const DenseMatrix w = group_inverse(p, pi);
    const DenseMatrix a = DenseMatrix::identity(2) - p;
    EXPECT_LE(max_abs_diff(w * a * w, w), 1e-8);
    EXPECT_LE(max_abs_diff(a * w * a, a), 1e-8);
    EXPECT_LE(max_abs_diff(w * a, a * w), 1e-8);
    EXPECT_LE(max_abs(left_multiply(pi, w)), 1e-8);
}

TEST(GroupInverse, PropertySuiteOnRandomChains) {
    for (const DenseMatrix& p : pmam::testing::random_chain_suite(50, 2024)) {
        const std::size_t n = p.rows();
        const DenseVector pi = stationary_vector(p);
        const DenseMatrix w = group_inverse(p, pi);
        const DenseMatrix a = DenseMatrix::identity(n) - p;
        EXPECT_LE(infinity_norm(w * a * w - w), 1e-8);
        EXPECT_LE(infinity_norm(a * w * a - a), 1e-8);
        EXPECT_LE(infinity_norm(w * a - a * w), 1e-8);
        EXPECT_LE(max_abs(left_multiply(pi, w)), 1e-8);
        EXPECT_LE(max_abs(w * DenseVector::ones(n)), 1e-8);
    }
}

TEST(GroupInverse, InconsistentPiIsRejected) {
    EXPECT_THROW(group_inverse(DenseMatrix{{0, 1}, {1, 0}}, DenseVector{1, 0, 0}), Error);
}
