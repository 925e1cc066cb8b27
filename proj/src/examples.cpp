#include "pmam/examples.hpp"

#include <cmath>

namespace pmam::examples {

BlockSequences map_g1_negative() {
    std::map<int, DenseMatrix> b;
    b[0] = {{0.2, 0.1, 0.2}, {0.0, 0.4, 0.1}, {0.0, 0.2, 0.1}};
    b[1] = {{0.2, 0.0, 0.2}, {0.3, 0.1, 0.0}, {0.4, 0.2, 0.0}};
    b[2] = {{0.1, 0.0, 0.0}, {0.0, 0.1, 0.0}, {0.0, 0.0, 0.1}};
    b[-1] = {{0.1, 0.0, 0.4}, {0.3, 0.2, 0.1}, {0.0, 0.1, 0.3}};
    b[-2] = {{0.0, 0.0, 0.2}, {0.1, 0.1, 0.0}, {0.0, 0.0, 0.1}};
    std::map<int, DenseMatrix> a;
    a[-1] = {{0.1, 0.0, 0.2}, {0.2, 0.1, 0.1}, {0.1, 0.1, 0.1}};
    a[0] = {{0.0, 0.1, 0.2}, {0.1, 0.1, 0.0}, {0.0, 0.1, 0.2}};
    a[1] = {{0.1, 0.0, 0.0}, {0.0, 0.1, 0.0}, {0.0, 0.1, 0.1}};
    a[2] = {{0.0, 0.1, 0.0}, {0.0, 0.1, 0.0}, {0.0, 0.0, 0.1}};
    return build_map_g1_rca(std::move(b), std::move(a));
}

BlockSequences scalar_gig1() {
    constexpr int last = 58;
    std::map<int, DenseMatrix> b;
    std::map<int, DenseMatrix> a;
    for (int i = 0; i <= last; ++i) b[i] = {{std::ldexp(1.0, -i - 1)}};
    b[-1] = {{0.75}};
    b[-2] = {{0.5}};
    // A_k = a_{k+1} = 2^{-k-3}
    for (int k = -1; k <= last; ++k) a[k] = {{std::ldexp(1.0, -k - 3)}};
    return build_map_g1_rca(std::move(b), std::move(a));
}

}  // namespace pmam::examples
