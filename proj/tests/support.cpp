#include "support.hpp"

namespace pmam::testing {

namespace {

DenseMatrix random_pattern(std::mt19937_64& rng, std::size_t n, double scale) {
    std::uniform_real_distribution<double> weight(0.05, 1.0);
    std::bernoulli_distribution keep(0.5);
    DenseMatrix w(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (keep(rng)) w(i, j) = scale * weight(rng);
    for (std::size_t i = 0; i < n; ++i) w(i, (i + 1) % n) = scale * weight(rng);
    return w;
}

}  // namespace

DenseMatrix random_chain(std::mt19937_64& rng, std::size_t n) {
    DenseMatrix p = random_pattern(rng, n, 1.0);
    p(0, 0) += 0.1;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (double v : p.row(i)) s += v;
        for (double& v : p.row(i)) v /= s;
    }
    return p;
}

DenseMatrix random_generator(std::mt19937_64& rng, std::size_t n) {
    DenseMatrix q = random_pattern(rng, n, 2.0);
    for (std::size_t i = 0; i < n; ++i) {
        q(i, i) = 0.0;
        double s = 0.0;
        for (double v : q.row(i)) s += v;
        q(i, i) = -s;
    }
    return q;
}

DenseMatrix cycle_chain(std::size_t n) {
    DenseMatrix p(n, n);
    for (std::size_t i = 0; i < n; ++i) p(i, (i + 1) % n) = 1.0;
    return p;
}

std::vector<DenseMatrix> random_chain_suite(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> size(3, 12);
    std::vector<DenseMatrix> out;
    for (std::size_t k = 0; k < count; ++k) out.push_back(random_chain(rng, size(rng)));
    return out;
}

std::vector<DenseMatrix> random_generator_suite(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> size(3, 12);
    std::vector<DenseMatrix> out;
    for (std::size_t k = 0; k < count; ++k) out.push_back(random_generator(rng, size(rng)));
    return out;
}

DenseMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    DenseMatrix m(rows, cols);
    for (double& v : m.values()) v = u(rng);
    return m;
}

}  // namespace pmam::testing
