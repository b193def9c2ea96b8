#pragma once

#include "nrcid/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

namespace nrcid {

/// Ground truth recorded by the synthetic generators.
struct GroundTruth {
    std::size_t latent_dim = 0;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Paired regression data: inputs (M x D) and targets (M x n).
struct Dataset {
    Matrix inputs;
    Matrix targets;
    std::string name;
    std::optional<GroundTruth> meta;

    std::size_t size() const { return inputs.rows(); }

    /// Throws DataError unless row counts agree, are non-zero and all entries are finite.
    void validate() const;
};

} // namespace nrcid
