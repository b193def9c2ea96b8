#pragma once

#include "nrcid/kernels.hpp"
#include "nrcid/matrix.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace nrcid {

/// Exact first/second nearest-neighbour distances for every row.
///
/// Throws DataError("insufficient points") for fewer than 3 rows and
/// DataError("duplicate points") if any point has a zero first-neighbour distance.
TwoNnDistances pairwise_two_nn(const Matrix& points);

/// Top principal directions of a point cloud.
struct PcaBasis {
    Matrix components;               ///< dim x k, orthonormal columns
    std::vector<double> eigenvalues; ///< k values, non-increasing
    std::vector<double> mean;        ///< dim
};

/// Principal components of mean-centred rows. Eigenvalues are those of the
/// population covariance (divided by the row count). Each component is signed
/// so that its largest-magnitude entry is positive.
///
/// Requires 1 <= k <= min(rows - 1, cols).
PcaBasis pca(const Matrix& features, std::size_t k);

/// Least-squares slope of a line constrained through the origin.
double slope_through_origin(std::span<const double> xs, std::span<const double> ys);

/// Squared norm of the projection of `v` onto span(basis.components).
double projected_norm_sq(std::span<const double> v, const PcaBasis& basis);

/// ||v - proj(v | components)||^2 for a unit vector v; clamped to [0, 1].
double residual_fraction(std::span<const double> v, const PcaBasis& basis);

} // namespace nrcid
