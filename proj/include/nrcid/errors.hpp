#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nrcid {

// Precondition violations on arguments throw std::invalid_argument.

/// Malformed, inconsistent or insufficient input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computation could not produce a finite, meaningful result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Training loss became non-finite or blew up past the divergence guard.
class DivergenceError : public NumericalError {
public:
    DivergenceError(std::size_t epoch, double loss);
    std::size_t epoch() const { return epoch_; }
    double loss() const { return loss_; }

private:
    std::size_t epoch_;
    double loss_;
};

} // namespace nrcid
