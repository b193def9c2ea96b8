#include "nrcid/collapse.hpp"
#include "nrcid/errors.hpp"
#include "nrcid/ndstats.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace nrcid {

Nrc1Result nrc1(const Matrix& features, std::size_t n, const Nrc1Options& opts) {
    const std::size_t m = features.rows();
    const std::size_t dim = features.cols();
    if (n < 1 || n >= dim) {
        throw std::invalid_argument("nrc1: need 1 <= n < feature dimension (n=" + std::to_string(n) +
                                    ", dim=" + std::to_string(dim) + ")");
    }
    if (m < n + 2) {
        throw std::invalid_argument("nrc1: need at least n + 2 feature rows");
    }

    std::vector<double> mean(dim, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const auto r = features.row(i);
        for (std::size_t c = 0; c < dim; ++c) {
            mean[c] += r[c];
        }
    }
    for (double& v : mean) {
        v /= static_cast<double>(m);
    }

    Matrix centred(m, dim);
    std::vector<double> unit_rows;
    unit_rows.reserve(m * dim);
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const auto src = features.row(i);
        auto dst = centred.row(i);
        double norm_sq = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
            dst[c] = src[c] - mean[c];
            norm_sq += dst[c] * dst[c];
        }
        const double norm = std::sqrt(norm_sq);
        if (!(norm >= opts.norm_eps) || norm == 0.0) {
            ++skipped;
            continue;
        }
        for (std::size_t c = 0; c < dim; ++c) {
            unit_rows.push_back(dst[c] / norm);
        }
    }
    const std::size_t kept = m - skipped;
    if (kept == 0) {
        throw NumericalError("degenerate features: every row coincides with the mean");
    }
    Matrix unit(kept, dim, std::move(unit_rows));

    PcaBasis basis;
    if (opts.pca_source == PcaSource::CenteredFeatures) {
        basis = pca(centred, n);
    } else {
        if (kept < n + 1) {
            throw NumericalError("degenerate features: too few non-degenerate rows for the normalised PCA");
        }
        basis = pca(unit, n);
    }

    double total = 0.0;
    for (std::size_t i = 0; i < kept; ++i) {
        total += residual_fraction(unit.row(i), basis);
    }
    Nrc1Result out;
    out.nrc1 = std::clamp(total / static_cast<double>(kept), 0.0, 1.0);
    out.n_components = n;
    out.skipped_points = skipped;
    return out;
}

bool collapse_flag(double nrc1_value, double threshold) {
    if (!(threshold > 0.0)) {
        throw std::invalid_argument("collapse threshold must be positive");
    }
    return nrc1_value < threshold;
}

} // namespace nrcid
