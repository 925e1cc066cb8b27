#pragma once

// Built-in block models.

#include "pmam/gig1.hpp"

namespace pmam::examples {

/// MAP/G/1 queue with negative customers (RCA rule), three phases.
BlockSequences map_g1_negative();

/// Scalar GI/G/1 chain with a_i = 2^{-i-2}, b_i = 2^{-i-1}, b_{-1} = 3/4,
/// b_{-2} = 1/2. The geometric tails are cut where the terms drop below 2^-60.
BlockSequences scalar_gig1();

}  // namespace pmam::examples
