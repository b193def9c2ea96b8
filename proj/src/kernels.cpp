#include "nrcid/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <omp.h>

namespace nrcid::kernels {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline void push_candidate(double d2, double& best1, double& best2) {
    if (d2 < best1) {
        best2 = best1;
        best1 = d2;
    } else if (d2 < best2) {
        best2 = d2;
    }
}

void finish(std::vector<double>& best1, std::vector<double>& best2, TwoNnDistances& out) {
    out.r1.resize(best1.size());
    out.r2.resize(best2.size());
    for (std::size_t i = 0; i < best1.size(); ++i) {
        out.r1[i] = std::sqrt(best1[i]);
        out.r2[i] = std::sqrt(best2[i]);
    }
}

void require_points(const Matrix& points) {
    if (points.rows() < 3) {
        throw std::invalid_argument("two-NN search needs at least 3 points");
    }
}

} // namespace

TwoNnDistances two_nn_serial(const Matrix& points) {
    require_points(points);
    const std::size_t m = points.rows();
    const std::size_t dim = points.cols();
    std::vector<double> best1(m, kInf), best2(m, kInf);
    for (std::size_t i = 0; i < m; ++i) {
        const double* xi = points.data() + i * dim;
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i) {
                continue;
            }
            const double* xj = points.data() + j * dim;
            double d2 = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                const double diff = xi[k] - xj[k];
                d2 += diff * diff;
            }
            push_candidate(d2, best1[i], best2[i]);
        }
    }
    TwoNnDistances out;
    finish(best1, best2, out);
    return out;
}

TwoNnDistances two_nn_blocked(const Matrix& points, const BlockOptions& opts) {
    require_points(points);
    const std::size_t m = points.rows();
    const std::size_t dim = points.cols();
    const std::size_t qb = std::max<std::size_t>(1, opts.query_block);
    const std::size_t cb = std::max<std::size_t>(1, opts.candidate_block);

    // Coordinate-major copy of the points.
    std::vector<double> by_coord(m * dim);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = 0; k < dim; ++k) {
            by_coord[k * m + j] = points(j, k);
        }
    }

    std::vector<double> best1(m, kInf), best2(m, kInf);
    const auto n_query_blocks = static_cast<std::ptrdiff_t>((m + qb - 1) / qb);
    const int threads = opts.threads > 0 ? opts.threads : omp_get_max_threads();

#pragma omp parallel num_threads(threads)
    {
        std::vector<double> acc(cb);
#pragma omp for schedule(dynamic, 1)
        for (std::ptrdiff_t blk = 0; blk < n_query_blocks; ++blk) {
            const std::size_t i0 = static_cast<std::size_t>(blk) * qb;
            const std::size_t i1 = std::min(m, i0 + qb);
            for (std::size_t j0 = 0; j0 < m; j0 += cb) {
                const std::size_t width = std::min(cb, m - j0);
                for (std::size_t i = i0; i < i1; ++i) {
                    const double* xi = points.data() + i * dim;
                    double* a = acc.data();
                    std::fill_n(a, width, 0.0);
                    for (std::size_t k = 0; k < dim; ++k) {
                        const double xik = xi[k];
                        const double* col = by_coord.data() + k * m + j0;
#pragma omp simd
                        for (std::size_t j = 0; j < width; ++j) {
                            const double diff = xik - col[j];
                            a[j] += diff * diff;
                        }
                    }
                    double b1 = best1[i];
                    double b2 = best2[i];
                    for (std::size_t j = 0; j < width; ++j) {
                        if (j0 + j != i) {
                            push_candidate(a[j], b1, b2);
                        }
                    }
                    best1[i] = b1;
                    best2[i] = b2;
                }
            }
        }
    }

    TwoNnDistances out;
    finish(best1, best2, out);
    return out;
}

} // namespace nrcid::kernels
