#include "nrcid/matrix.hpp"
#include "nrcid/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

namespace nrcid {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("matrix dimensions must be at least 1x1");
    }
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(values.begin(), values.end()) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("matrix dimensions must be at least 1x1");
    }
    if (values_.size() != rows * cols) {
        throw std::invalid_argument("matrix value count " + std::to_string(values_.size()) +
                                    " does not match " + std::to_string(rows) + "x" +
                                    std::to_string(cols));
    }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    if (rows.size() == 0) {
        throw std::invalid_argument("matrix needs at least one row");
    }
    const std::size_t cols = rows.begin()->size();
    std::vector<double> values;
    values.reserve(rows.size() * cols);
    for (const auto& r : rows) {
        if (r.size() != cols) {
            throw std::invalid_argument("ragged initializer for matrix");
        }
        values.insert(values.end(), r.begin(), r.end());
    }
    return Matrix(rows.size(), cols, std::move(values));
}

bool Matrix::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= rows_) {
            throw std::out_of_range("row index out of range");
        }
        std::copy_n(values_.data() + indices[i] * cols_, cols_, out.values_.data() + i * cols_);
    }
    return out;
}

Matrix Matrix::scaled(double factor) const {
    Matrix out = *this;
    for (double& v : out.values_) {
        v *= factor;
    }
    return out;
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           (a.size() == 0 || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

DivergenceError::DivergenceError(std::size_t epoch, double loss)
    : NumericalError("divergence at epoch " + std::to_string(epoch) + " (loss " +
                     std::to_string(loss) + ")"),
      epoch_(epoch), loss_(loss) {}

} // namespace nrcid
