#include "nrcid/ndstats.hpp"
#include "nrcid/errors.hpp"

#include "eigen_view.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nrcid {

TwoNnDistances pairwise_two_nn(const Matrix& points) {
    if (points.rows() < 3) {
        throw DataError("insufficient points: need at least 3 rows, got " + std::to_string(points.rows()));
    }
    TwoNnDistances d = kernels::two_nn_blocked(points);
    for (std::size_t i = 0; i < d.r1.size(); ++i) {
        if (!(d.r1[i] > 0.0)) {
            throw DataError("duplicate points: row " + std::to_string(i) + " has a zero-distance neighbour");
        }
    }
    return d;
}

namespace {

// Largest-magnitude entry positive; the first such entry wins ties.
void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        if (std::abs(v[i]) > std::abs(v[best])) {
            best = i;
        }
    }
    if (v[best] < 0.0) {
        v = -v;
    }
}

// Replace column `c` by a unit vector orthogonal to columns [0, c).
void complete_orthonormal(Eigen::MatrixXd& comps, Eigen::Index c) {
    const Eigen::Index dim = comps.rows();
    for (Eigen::Index e = 0; e < dim; ++e) {
        Eigen::VectorXd v = Eigen::VectorXd::Unit(dim, e);
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index j = 0; j < c; ++j) {
                v -= comps.col(j).dot(v) * comps.col(j);
            }
        }
        const double norm = v.norm();
        if (norm > 1e-6) {
            comps.col(c) = v / norm;
            return;
        }
    }
    throw NumericalError("could not complete an orthonormal basis");
}

} // namespace

PcaBasis pca(const Matrix& features, std::size_t k) {
    const std::size_t m = features.rows();
    const std::size_t dim = features.cols();
    if (k < 1 || k > std::min(m > 0 ? m - 1 : 0, dim)) {
        throw std::invalid_argument("pca: k=" + std::to_string(k) + " outside [1, min(rows-1, cols)] for " +
                                    std::to_string(m) + "x" + std::to_string(dim) + " data");
    }
    const auto x = detail::view(features);
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd centred = x.rowwise() - mean;
    const double inv_m = 1.0 / static_cast<double>(m);
    const auto kk = static_cast<Eigen::Index>(k);

    Eigen::MatrixXd comps(static_cast<Eigen::Index>(dim), kk);
    Eigen::VectorXd evals(kk);

    if (dim <= m) {
        Eigen::MatrixXd cov = (centred.transpose() * centred) * inv_m;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
        if (solver.info() != Eigen::Success) {
            throw NumericalError("pca: covariance eigendecomposition failed");
        }
        // Eigen returns ascending eigenvalues.
        for (Eigen::Index c = 0; c < kk; ++c) {
            const Eigen::Index src = static_cast<Eigen::Index>(dim) - 1 - c;
            evals[c] = std::max(0.0, solver.eigenvalues()[src]);
            comps.col(c) = solver.eigenvectors().col(src);
        }
    } else {
        Eigen::MatrixXd gram = (centred * centred.transpose()) * inv_m;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
        if (solver.info() != Eigen::Success) {
            throw NumericalError("pca: Gram eigendecomposition failed");
        }
        const double scale_floor = 1e-12 * std::max(1.0, solver.eigenvalues().cwiseAbs().maxCoeff());
        for (Eigen::Index c = 0; c < kk; ++c) {
            const Eigen::Index src = static_cast<Eigen::Index>(m) - 1 - c;
            const double lambda = std::max(0.0, solver.eigenvalues()[src]);
            evals[c] = lambda;
            if (lambda > scale_floor) {
                Eigen::VectorXd v = centred.transpose() * solver.eigenvectors().col(src);
                comps.col(c) = v / v.norm();
            } else {
                complete_orthonormal(comps, c);
            }
        }
    }

    PcaBasis basis;
    basis.components = Matrix(dim, k);
    basis.eigenvalues.resize(k);
    basis.mean.assign(mean.data(), mean.data() + mean.size());
    for (Eigen::Index c = 0; c < kk; ++c) {
        Eigen::VectorXd v = comps.col(c);
        fix_sign(v);
        for (std::size_t r = 0; r < dim; ++r) {
            basis.components(r, static_cast<std::size_t>(c)) = v[static_cast<Eigen::Index>(r)];
        }
        basis.eigenvalues[static_cast<std::size_t>(c)] = evals[c];
    }
    return basis;
}

double slope_through_origin(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.empty()) {
        throw std::invalid_argument("slope_through_origin: lists must have equal non-zero length");
    }
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += xs[i] * ys[i];
        sxx += xs[i] * xs[i];
    }
    if (!(sxx > 0.0)) {
        throw NumericalError("degenerate fit: all abscissae are zero");
    }
    return sxy / sxx;
}

namespace {

// Coefficients of v in the component basis.
std::vector<double> coefficients(std::span<const double> v, const PcaBasis& basis) {
    const Matrix& c = basis.components;
    if (v.size() != c.rows()) {
        throw std::invalid_argument("vector dimension does not match basis");
    }
    std::vector<double> coef(c.cols(), 0.0);
    for (std::size_t r = 0; r < c.rows(); ++r) {
        const double vr = v[r];
        for (std::size_t j = 0; j < c.cols(); ++j) {
            coef[j] += c(r, j) * vr;
        }
    }
    return coef;
}

} // namespace

double projected_norm_sq(std::span<const double> v, const PcaBasis& basis) {
    double s = 0.0;
    for (double a : coefficients(v, basis)) {
        s += a * a;
    }
    return s;
}

double residual_fraction(std::span<const double> v, const PcaBasis& basis) {
    double norm_sq = 0.0;
    for (double x : v) {
        norm_sq += x * x;
    }
    if (std::abs(std::sqrt(norm_sq) - 1.0) > 1e-8) {
        throw std::invalid_argument("residual_fraction expects a unit vector");
    }
    const Matrix& c = basis.components;
    const std::vector<double> coef = coefficients(v, basis);
    double residual = 0.0;
    for (std::size_t r = 0; r < c.rows(); ++r) {
        double p = 0.0;
        for (std::size_t j = 0; j < c.cols(); ++j) {
            p += c(r, j) * coef[j];
        }
        const double diff = v[r] - p;
        residual += diff * diff;
    }
    return std::clamp(residual, 0.0, 1.0);
}

} // namespace nrcid
