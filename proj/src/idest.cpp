#include "nrcid/idest.hpp"
#include "nrcid/errors.hpp"
#include "nrcid/ndstats.hpp"
#include "nrcid/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string>
#include <string_view>
#include <unordered_set>

namespace nrcid {
namespace {

constexpr std::size_t kMinPoints = 10;

} // namespace

DedupeResult dedupe_points(const Matrix& points) {
    if (points.rows() < 1) {
        throw std::invalid_argument("dedupe_points needs at least one row");
    }
    const std::size_t bytes = points.cols() * sizeof(double);
    const char* base = reinterpret_cast<const char*>(points.data());
    std::unordered_set<std::string_view> seen;
    seen.reserve(points.rows() * 2);
    std::vector<std::size_t> keep;
    keep.reserve(points.rows());
    for (std::size_t i = 0; i < points.rows(); ++i) {
        if (seen.emplace(base + i * bytes, bytes).second) {
            keep.push_back(i);
        }
    }
    DedupeResult out;
    out.removed = points.rows() - keep.size();
    out.points = out.removed == 0 ? points : points.select_rows(keep);
    return out;
}

IdEstimate estimate_id_from_ratios(std::span<const double> ratios, double discard_fraction) {
    if (!(discard_fraction >= 0.0 && discard_fraction < 1.0)) {
        throw std::invalid_argument("discard_fraction must lie in [0, 1)");
    }
    const std::size_t m = ratios.size();
    if (m < kMinPoints) {
        throw DataError("insufficient points: the estimator needs at least " + std::to_string(kMinPoints) +
                        ", got " + std::to_string(m));
    }
    for (double mu : ratios) {
        if (!std::isfinite(mu) || mu < 1.0) {
            throw NumericalError("duplicate or zero-distance points: non-finite neighbour ratio");
        }
    }

    std::vector<double> sorted(ratios.begin(), ratios.end());
    std::stable_sort(sorted.begin(), sorted.end());

    // Pairs i = 1..M-1; the i = M point has F = 1 and is excluded.
    const std::size_t total_pairs = m - 1;
    const auto dropped = static_cast<std::size_t>(std::ceil(discard_fraction * static_cast<double>(total_pairs)));
    const std::size_t used = total_pairs - std::min(dropped, total_pairs);
    if (used < 2) {
        throw DataError("too few pairs left after discarding");
    }

    const double inv_m = 1.0 / static_cast<double>(m);
    std::vector<double> xs(used), ys(used);
    for (std::size_t i = 1; i <= used; ++i) {
        xs[i - 1] = std::log(sorted[i - 1]);
        ys[i - 1] = -std::log1p(-static_cast<double>(i) * inv_m);
    }

    IdEstimate est;
    est.id = slope_through_origin(xs, ys);
    est.pairs_used = used;
    est.discard_fraction = static_cast<double>(total_pairs - used) / static_cast<double>(total_pairs);
    double sse = 0.0;
    for (std::size_t i = 0; i < used; ++i) {
        const double r = ys[i] - est.id * xs[i];
        sse += r * r;
    }
    est.fit_rmse = std::sqrt(sse / static_cast<double>(used));
    if (!(est.id > 0.0) || !std::isfinite(est.id)) {
        throw NumericalError("intrinsic dimension fit produced a non-positive slope");
    }
    return est;
}

IdEstimate estimate_id(const Matrix& points, const IdOptions& opts) {
    std::size_t removed = 0;
    const Matrix* data = &points;
    DedupeResult unique;
    if (opts.dedupe) {
        unique = dedupe_points(points);
        removed = unique.removed;
        data = &unique.points;
    }
    if (data->rows() < kMinPoints) {
        throw DataError("insufficient points after deduplication: " + std::to_string(data->rows()) + " < " +
                        std::to_string(kMinPoints));
    }
    TwoNnDistances nn = kernels::two_nn_blocked(*data);
    std::vector<double> ratios(nn.r1.size());
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        ratios[i] = nn.r2[i] / nn.r1[i];
        if (!std::isfinite(ratios[i])) {
            throw NumericalError("duplicate or zero-distance points: row " + std::to_string(i));
        }
    }
    IdEstimate est = estimate_id_from_ratios(ratios, opts.discard_fraction);
    est.duplicates_removed = removed;
    return est;
}

DecimationCurve decimation_curve(const Matrix& points, std::span<const std::size_t> sizes, std::size_t reps,
                                 std::uint64_t seed, const IdOptions& opts) {
    if (reps < 1) {
        throw std::invalid_argument("decimation needs at least one repetition");
    }
    if (sizes.empty()) {
        throw std::invalid_argument("decimation needs at least one subsample size");
    }
    for (std::size_t s = 0; s < sizes.size(); ++s) {
        if (sizes[s] < kMinPoints) {
            throw std::invalid_argument("subsample size " + std::to_string(sizes[s]) + " is below 10");
        }
        if (sizes[s] > points.rows()) {
            throw std::invalid_argument("subsample size " + std::to_string(sizes[s]) + " exceeds the " +
                                        std::to_string(points.rows()) + " available rows");
        }
        if (s > 0 && sizes[s] <= sizes[s - 1]) {
            throw std::invalid_argument("subsample sizes must be strictly increasing");
        }
    }

    DecimationCurve curve;
    for (std::size_t s = 0; s < sizes.size(); ++s) {
        std::vector<double> ids(reps);
        const auto nreps = static_cast<std::ptrdiff_t>(reps);
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t r = 0; r < nreps; ++r) {
            Rng rng(derive_seed(seed, sizes[s], static_cast<std::uint64_t>(r)));
            const auto idx = sample_without_replacement(points.rows(), sizes[s], rng);
            ids[static_cast<std::size_t>(r)] = estimate_id(points.select_rows(idx), opts).id;
        }
        DecimationPoint pt;
        pt.subsample_size = sizes[s];
        pt.repetitions = reps;
        pt.mean_id = std::accumulate(ids.begin(), ids.end(), 0.0) / static_cast<double>(reps);
        if (reps > 1) {
            double ss = 0.0;
            for (double v : ids) {
                ss += (v - pt.mean_id) * (v - pt.mean_id);
            }
            pt.std_id = std::sqrt(ss / static_cast<double>(reps - 1));
        }
        curve.push_back(pt);
    }
    return curve;
}

} // namespace nrcid
