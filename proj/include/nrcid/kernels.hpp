#pragma once

#include "nrcid/matrix.hpp"

#include <cstddef>
#include <vector>

namespace nrcid {

/// Distances from every point to its first and second nearest neighbour.
struct TwoNnDistances {
    std::vector<double> r1;
    std::vector<double> r2;
};

namespace kernels {

/// Straight double loop over all ordered pairs. Kept as the reference that the
/// blocked kernel must reproduce bit for bit.
TwoNnDistances two_nn_serial(const Matrix& points);

struct BlockOptions {
    std::size_t query_block = 32;
    std::size_t candidate_block = 512;
    int threads = 0; ///< 0 lets OpenMP decide
};

/// Tiled, OpenMP-parallel exact two-nearest-neighbour search.
///
/// Each squared distance accumulates coordinates in ascending order and each
/// query scans candidates in ascending index order, exactly like the serial
/// loop. The output is bitwise identical for every tile size and thread count.
TwoNnDistances two_nn_blocked(const Matrix& points, const BlockOptions& opts = {});

} // namespace kernels
} // namespace nrcid
