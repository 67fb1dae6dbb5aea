#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qigl/features.hpp"
#include "qigl/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

using namespace qigl;

namespace {

Mat random_matrix(Index rows, Index cols, Rng& rng, double lo = 0.0, double hi = 1.0) {
    Mat m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
    return m;
}

}  // namespace

TEST_CASE("dominant axis of an x-aligned cloud") {
    Rng rng(5);
    Mat data(50, 2);
    for (Index i = 0; i < 50; ++i) {
        data(i, 0) = rng.uniform(-3.0, 3.0);
        data(i, 1) = 1e-4 * rng.uniform(-1.0, 1.0);
    }
    const PcaModel model = fit_pca(data, 1);
    CHECK(std::abs(std::abs(model.axes(0, 0)) - 1.0) < 1e-6);
    CHECK(std::abs(model.axes(0, 1)) < 1e-3);
    CHECK(model.axes(0, 0) > 0.0);  // sign convention
}

TEST_CASE("explained variance ratios") {
    Rng rng(9);
    const Mat data = random_matrix(20, 6, rng);
    const PcaModel full = fit_pca(data, 6);
    CHECK(full.explained_variance_ratio.sum() == doctest::Approx(1.0).epsilon(1e-10));

    // nonincreasing ratios, orthonormal axes
    for (Index i = 1; i < 6; ++i) {
        CHECK(full.explained_variance_ratio[i] <= full.explained_variance_ratio[i - 1] + 1e-15);
        CHECK(full.singular_values[i] <= full.singular_values[i - 1] + 1e-12);
    }
    const Mat gram = full.axes * full.axes.transpose();
    CHECK((gram - Mat::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("ratios match an independent covariance eigendecomposition") {
    // 64 synthetic 16x16 "images": smooth low-rank structure plus noise.
    Rng rng(13);
    Mat data(64, 256);
    for (Index i = 0; i < 64; ++i) {
        const double a = rng.uniform(), b = rng.uniform();
        for (Index j = 0; j < 256; ++j) {
            const double x = static_cast<double>(j % 16) / 16.0;
            const double y = static_cast<double>(j / 16) / 16.0;
            data(i, j) = a * x + b * y * y + 0.01 * rng.uniform(-1.0, 1.0);
        }
    }
    const int k = 10;
    const PcaModel model = fit_pca(data, k);

    const Mat centered = data.rowwise() - data.colwise().mean();
    Eigen::SelfAdjointEigenSolver<Mat> eigh(centered.transpose() * centered);
    Vec lambda = eigh.eigenvalues();  // ascending
    std::reverse(lambda.data(), lambda.data() + lambda.size());
    lambda = lambda.cwiseMax(0.0);
    const Vec want = lambda.head(k) / lambda.sum();
    CHECK((model.explained_variance_ratio - want).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("transform and inverse_transform") {
    Rng rng(17);
    const Mat data = random_matrix(12, 5, rng);
    const PcaModel model = fit_pca(data, 5);

    const Mat mean_scores = transform(model, model.mean.transpose());
    CHECK(mean_scores.cwiseAbs().maxCoeff() < 1e-12);

    const Mat round_trip = inverse_transform(model, transform(model, data));
    const double rms = std::sqrt((round_trip - data).squaredNorm() /
                                 static_cast<double>(data.size()));
    CHECK(rms < 1e-8);

    CHECK((inverse_transform(model, Mat::Zero(1, 5)).row(0).transpose() - model.mean)
              .cwiseAbs()
              .maxCoeff() < 1e-12);

    CHECK_THROWS_AS(transform(model, Mat::Zero(2, 4)), ShapeError);
    CHECK_THROWS_AS(inverse_transform(model, Mat::Zero(2, 4)), ShapeError);
}

TEST_CASE("two-point dataset scores") {
    Mat data(2, 3);
    data << 1.0, 2.0, 3.0,
            3.0, 4.0, 1.0;
    const PcaModel model = fit_pca(data, 1);
    const Vec mean = (data.row(0) + data.row(1)).transpose() / 2.0;
    const double distance = (data.row(0).transpose() - mean).norm();
    const Mat scores = transform(model, data);
    CHECK(std::abs(scores(0, 0)) == doctest::Approx(distance).epsilon(1e-10));
    CHECK(std::abs(scores(1, 0)) == doctest::Approx(distance).epsilon(1e-10));
    CHECK(scores(0, 0) == doctest::Approx(-scores(1, 0)).epsilon(1e-10));
}

TEST_CASE("truncation error matches the discarded singular values") {
    Rng rng(19);
    const Mat data = random_matrix(30, 8, rng);
    const int k = 3;
    const PcaModel full = fit_pca(data, 8);
    const PcaModel truncated = fit_pca(data, k);

    const Mat recon = inverse_transform(truncated, transform(truncated, data));
    const double mse = (recon - data).squaredNorm() / static_cast<double>(data.rows());
    const double want =
        full.singular_values.tail(8 - k).array().square().sum() / static_cast<double>(data.rows());
    CHECK(std::abs(mse - want) < 1e-6);
}

TEST_CASE("score scaling") {
    Rng rng(21);
    const Mat data = random_matrix(16, 4, rng);
    const PcaModel model = fit_pca(data, 3);
    const Mat scores = transform(model, data);
    const Mat scaled = scale_scores(model, scores);

    CHECK(scaled.minCoeff() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(scaled.maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));

    Mat endpoints(1, 3);
    endpoints << model.pca_min, model.pca_max, model.pca_min;
    const Mat scaled_endpoints = scale_scores(model, endpoints);
    CHECK(scaled_endpoints(0, 0) == 0.0);
    CHECK(scaled_endpoints(0, 1) == 1.0);

    const Mat back = unscale_scores(model, scaled);
    CHECK((back - scores).cwiseAbs().maxCoeff() < 1e-12);

    // values beyond the training range extend linearly, no clamping
    Mat overshoot(1, 3);
    overshoot.setConstant(1.1);
    const double expect = model.pca_min + 1.1 * (model.pca_max - model.pca_min);
    CHECK(unscale_scores(model, overshoot)(0, 0) == doctest::Approx(expect).epsilon(1e-12));

    PcaModel degenerate = model;
    degenerate.pca_max = degenerate.pca_min;
    CHECK_THROWS_AS(scale_scores(degenerate, scores), DataError);
}

TEST_CASE("fit_pca error paths") {
    Rng rng(25);
    const Mat data = random_matrix(4, 6, rng);
    CHECK_THROWS_AS(fit_pca(data, 4), ArgumentError);  // k > n - 1
    CHECK_THROWS_AS(fit_pca(data, 0), ArgumentError);
    CHECK_THROWS_AS(fit_pca(data.topRows(1), 1), DataError);

    Mat constant = Mat::Ones(5, 3);
    CHECK_THROWS_AS(fit_pca(constant, 2), DataError);
}

TEST_CASE("balanced assignment follows the reverse-deal rule") {
    const FeatureAssignment a = balanced_assignment(40, 8, 5);
    CHECK(a.subsets[0] == std::vector<int>{0, 39, 38, 37, 36});
    CHECK(a.subsets[1] == std::vector<int>{1, 35, 34, 33, 32});
    CHECK(a.subsets[7] == std::vector<int>{7, 11, 10, 9, 8});

    std::set<int> all;
    for (const auto& subset : a.subsets) all.insert(subset.begin(), subset.end());
    CHECK(all.size() == 40);
    CHECK(*all.begin() == 0);
    CHECK(*all.rbegin() == 39);

    // every sub-generator holds exactly one of the top-8 components
    for (const auto& subset : a.subsets) {
        CHECK(std::count_if(subset.begin(), subset.end(), [](int i) { return i < 8; }) == 1);
    }

    const FeatureAssignment general = balanced_assignment(10, 2, 5);
    CHECK(general.subsets[0] == std::vector<int>{0, 9, 8, 7, 6});
    CHECK(general.subsets[1] == std::vector<int>{1, 5, 4, 3, 2});

    CHECK_THROWS_AS(balanced_assignment(39, 8, 5), ShapeError);
}

TEST_CASE("conventional assignment is sequential blocks") {
    const FeatureAssignment a = conventional_assignment(40, 8, 5);
    CHECK(a.subsets[0] == std::vector<int>{0, 1, 2, 3, 4});
    CHECK(a.subsets[7] == std::vector<int>{35, 36, 37, 38, 39});

    std::set<int> all;
    for (const auto& subset : a.subsets) all.insert(subset.begin(), subset.end());
    CHECK(all.size() == 40);
}

TEST_CASE("components_for_variance") {
    Mat data(8, 4);
    data.setZero();
    for (Index i = 0; i < 8; ++i) {
        data(i, 0) = 10.0 * (i % 2 == 0 ? 1.0 : -1.0);
        data(i, 1) = 0.1 * static_cast<double>(i);
    }
    const PcaModel model = fit_pca(data, 3);
    const auto k98 = components_for_variance(model, 0.98);
    REQUIRE(k98.has_value());
    CHECK(*k98 == 1);  // the first component carries almost all variance
    CHECK_FALSE(components_for_variance(model, 1.0 + 1e-9).has_value());
}
