#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "pmam/linalg.hpp"

namespace pmam::testing {

/// Irreducible, aperiodic stochastic matrix: a positive cycle 0 -> 1 -> ... -> 0,
/// a self-loop at state 0 and about half of the remaining entries positive.
DenseMatrix random_chain(std::mt19937_64& rng, std::size_t n);

/// Irreducible generator built the same way, rates in (0, 2].
DenseMatrix random_generator(std::mt19937_64& rng, std::size_t n);

/// n-cycle, period n.
DenseMatrix cycle_chain(std::size_t n);

/// Chains of 3..12 states from a fixed seed.
std::vector<DenseMatrix> random_chain_suite(std::size_t count, std::uint64_t seed);
std::vector<DenseMatrix> random_generator_suite(std::size_t count, std::uint64_t seed);

DenseMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols);

}  // namespace pmam::testing
