#include "nrcid/collapse.hpp"
#include "nrcid/errors.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace nrcid;

namespace {

Matrix rank_n_features(std::size_t m, std::size_t n, std::size_t d, std::uint64_t seed) {
    return oracle::matmul(oracle::gaussian_matrix(m, n, seed), oracle::gaussian_matrix(n, d, seed + 1));
}

/// Zero-mean cloud whose normalised rows all have squared component c2 along
/// e3 and the rest in the (e1, e2) plane.
Matrix offplane_set(double c2, std::size_t d) {
    const std::size_t angles = 90;
    Matrix h(4 * angles, d);
    const double off = std::sqrt(c2);
    const double in = std::sqrt(1.0 - c2);
    std::size_t row = 0;
    for (std::size_t k = 0; k < angles; ++k) {
        const double theta = std::numbers::pi * static_cast<double>(k) / static_cast<double>(angles);
        const double radius = 1.0 + 0.5 * static_cast<double>(k % 3);
        for (double flip : {1.0, -1.0}) {
            for (double sign : {1.0, -1.0}) {
                h(row, 0) = flip * radius * in * std::cos(theta);
                h(row, 1) = flip * radius * in * std::sin(theta);
                h(row, 2) = sign * flip * radius * off;
                ++row;
            }
        }
    }
    return h;
}

} // namespace

TEST(Nrc1, ExactRankNIsZero) {
    for (std::size_t n : {1u, 2u, 3u}) {
        const Nrc1Result r = nrc1(rank_n_features(500, n, 12, 10 + n), n);
        EXPECT_LE(r.nrc1, 1e-10) << "n=" << n;
        EXPECT_EQ(r.n_components, n);
        EXPECT_EQ(r.skipped_points, 0u);
    }
}

TEST(Nrc1, IsotropicGaussian) {
    const Nrc1Result r = nrc1(oracle::gaussian_matrix(100000, 64, 1), 2);
    EXPECT_NEAR(r.nrc1, 62.0 / 64.0, 0.005);
}

TEST(Nrc1, AnalyticOffPlaneConstruction) {
    const Nrc1Result r = nrc1(offplane_set(0.04, 5), 2);
    EXPECT_NEAR(r.nrc1, 0.04, 1e-6);
}

TEST(Nrc1, SkipsRowsAtTheMean) {
    Matrix h = rank_n_features(50, 2, 6, 3);
    std::vector<double> mean(6, 0.0);
    for (std::size_t i = 0; i < h.rows(); ++i) {
        for (std::size_t k = 0; k < 6; ++k) {
            mean[k] += h(i, k) / 50.0;
        }
    }
    Matrix with_mean(52, 6);
    for (std::size_t i = 0; i < 50; ++i) {
        std::copy(h.row(i).begin(), h.row(i).end(), with_mean.row(i).begin());
    }
    // Two copies of the original mean keep the mean unchanged and sit on it.
    std::copy(mean.begin(), mean.end(), with_mean.row(50).begin());
    std::copy(mean.begin(), mean.end(), with_mean.row(51).begin());
    Nrc1Options opts;
    opts.norm_eps = 1e-9;
    const Nrc1Result r = nrc1(with_mean, 2, opts);
    EXPECT_EQ(r.skipped_points, 2u);
    EXPECT_LE(r.nrc1, 1e-10);
}

TEST(Nrc1, ConstantFeaturesAreDegenerate) {
    try {
        nrc1(Matrix(10, 4, 2.5), 2);
        FAIL();
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("degenerate features"), std::string::npos);
    }
}

TEST(Nrc1, RejectsBadN) {
    const Matrix h = oracle::gaussian_matrix(20, 4, 1);
    EXPECT_THROW(nrc1(h, 0), std::invalid_argument);
    EXPECT_THROW(nrc1(h, 4), std::invalid_argument);
    EXPECT_THROW(nrc1(oracle::gaussian_matrix(3, 4, 1), 2), std::invalid_argument);
}

TEST(Nrc1, OrthogonalInvariance) {
    const Matrix h = oracle::gaussian_matrix(400, 8, 5);
    Matrix stretched = h;
    for (std::size_t i = 0; i < h.rows(); ++i) {
        stretched(i, 0) *= 4.0;
        stretched(i, 1) *= 2.0;
    }
    const auto [values, q] = oracle::jacobi_eigen(oracle::covariance(oracle::gaussian_matrix(40, 8, 8)));
    const double a = nrc1(stretched, 2).nrc1;
    EXPECT_NEAR(nrc1(oracle::matmul(stretched, q), 2).nrc1, a, 1e-9);
}

TEST(Nrc1, ScaleInvariance) {
    const Matrix h = oracle::gaussian_matrix(300, 6, 2);
    const double a = nrc1(h, 2).nrc1;
    for (double c : {0.25, 2.0, 64.0}) {
        EXPECT_EQ(nrc1(h.scaled(c), 2).nrc1, a) << "c=" << c;
    }
    for (double c : {0.3, 7.0, 1e5}) {
        EXPECT_NEAR(nrc1(h.scaled(c), 2).nrc1, a, 1e-12) << "c=" << c;
    }
}

TEST(Nrc1, TranslationInvariance) {
    const Matrix h = oracle::gaussian_matrix(300, 6, 4);
    Matrix moved = h;
    for (std::size_t i = 0; i < h.rows(); ++i) {
        for (std::size_t k = 0; k < 6; ++k) {
            moved(i, k) += 10.0 - static_cast<double>(k);
        }
    }
    EXPECT_NEAR(nrc1(moved, 2).nrc1, nrc1(h, 2).nrc1, 1e-9);
}

TEST(Nrc1, MonotoneInNAndBounded) {
    const Matrix h = oracle::random_matrix(200, 7, 9);
    double previous = 1.0;
    for (std::size_t n = 1; n < 7; ++n) {
        const double v = nrc1(h, n).nrc1;
        EXPECT_LE(v, previous + 1e-12);
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        previous = v;
    }
}

TEST(Nrc1, NormalizedSourceOption) {
    Nrc1Options opts;
    opts.pca_source = PcaSource::NormalizedFeatures;
    EXPECT_LE(nrc1(rank_n_features(300, 2, 9, 4), 2, opts).nrc1, 1e-10);
    EXPECT_NEAR(nrc1(offplane_set(0.04, 5), 2, opts).nrc1, 0.04, 1e-6);
    const Matrix h = oracle::gaussian_matrix(300, 6, 2);
    const double v = nrc1(h, 2, opts).nrc1;
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
}

TEST(CollapseFlag, Examples) {
    EXPECT_TRUE(collapse_flag(0.001, 0.05));
    EXPECT_FALSE(collapse_flag(0.5, 0.05));
    EXPECT_FALSE(collapse_flag(0.05, 0.05));
    EXPECT_TRUE(collapse_flag(0.049));
    EXPECT_THROW(collapse_flag(0.01, 0.0), std::invalid_argument);
}
