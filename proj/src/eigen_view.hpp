#pragma once

#include "nrcid/matrix.hpp"

#include <Eigen/Dense>

namespace nrcid::detail {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMat>;
using RowMap = Eigen::Map<RowMat>;

inline ConstRowMap view(const Matrix& m) {
    return ConstRowMap(m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
}

inline RowMap view(Matrix& m) {
    return RowMap(m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
}

template <typename Derived>
Matrix to_matrix(const Eigen::MatrixBase<Derived>& e) {
    Matrix out(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
    view(out) = e;
    return out;
}

} // namespace nrcid::detail
