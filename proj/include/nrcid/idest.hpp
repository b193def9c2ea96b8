#pragma once

#include "nrcid/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nrcid {

/// Global intrinsic dimension from the two-nearest-neighbour ratio law
/// F(mu) = 1 - mu^(-d), plus diagnostics of the origin-constrained fit.
struct IdEstimate {
    double id = 0.0;
    std::size_t pairs_used = 0;
    double discard_fraction = 0.0; ///< fraction of the M-1 pairs actually dropped
    double fit_rmse = 0.0;         ///< RMS residual in (log mu, -log(1-F)) space
    std::size_t duplicates_removed = 0;
};

struct IdOptions {
    double discard_fraction = 0.0; ///< drop this top fraction of pairs (largest mu)
    bool dedupe = true;
    std::uint64_t seed = 0; ///< only consumed by subsampling routines
};

struct DecimationPoint {
    std::size_t subsample_size = 0;
    double mean_id = 0.0;
    double std_id = 0.0;
    std::size_t repetitions = 0;
};

using DecimationCurve = std::vector<DecimationPoint>;

struct DedupeResult {
    Matrix points;
    std::size_t removed = 0;
};

/// Removes bitwise-identical rows, keeping first occurrences in order.
DedupeResult dedupe_points(const Matrix& points);

/// The sort-and-fit half of the estimator, fed directly with ratios mu >= 1.
/// Needs at least 10 ratios.
IdEstimate estimate_id_from_ratios(std::span<const double> ratios, double discard_fraction = 0.0);

IdEstimate estimate_id(const Matrix& points, const IdOptions& opts = {});

/// Mean/std of the estimate over `reps` seeded uniform subsamples per size.
/// Sizes must be strictly increasing, each in [10, rows].
DecimationCurve decimation_curve(const Matrix& points, std::span<const std::size_t> sizes,
                                 std::size_t reps, std::uint64_t seed, const IdOptions& opts = {});

} // namespace nrcid
