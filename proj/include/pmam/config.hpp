#pragma once

#include <cstddef>

namespace pmam {

enum class TruncationMode {
    Plain,    // drop mass that jumps beyond the last retained level
    Augment,  // add that mass to the diagonal so every row stays stochastic
};

struct SolverConfig {
    double epsilon = 1e-4;          // stopping tolerance of the G iteration
    std::size_t max_iterations = 100000;
    std::size_t levels = 50;        // J: highest retained level
    std::size_t horizon = 0;        // last level used in infinite sums; 0 = automatic
    double summand_tolerance = 1e-10;
    double residual_tolerance = 1e-8;
    double tail_tolerance = 1e-6;
    double pivot_tolerance = 1e-13;
    TruncationMode truncation = TruncationMode::Plain;
};

}  // namespace pmam
