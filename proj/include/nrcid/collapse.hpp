#pragma once

#include "nrcid/matrix.hpp"

#include <cstddef>

namespace nrcid {

/// Which matrix the top-n principal subspace is fitted to.
enum class PcaSource {
    CenteredFeatures,   ///< h_i - mean (default)
    NormalizedFeatures, ///< the unit vectors (h_i - mean) / ||h_i - mean||
};

struct Nrc1Options {
    double norm_eps = 1e-12;
    PcaSource pca_source = PcaSource::CenteredFeatures;
};

struct Nrc1Result {
    double nrc1 = 0.0;
    std::size_t n_components = 0;
    std::size_t skipped_points = 0; ///< rows within norm_eps of the mean
};

inline constexpr double kDefaultCollapseThreshold = 0.05;

/// Mean squared distance of the centred, normalised features from their
/// top-n principal subspace. Small values mean the features have collapsed
/// onto an n-dimensional linear subspace.
///
/// Requires features.rows() >= n + 2 and 1 <= n < features.cols().
Nrc1Result nrc1(const Matrix& features, std::size_t n, const Nrc1Options& opts = {});

/// Strict: a value equal to the threshold is not collapsed.
bool collapse_flag(double nrc1_value, double threshold = kDefaultCollapseThreshold);

} // namespace nrcid
