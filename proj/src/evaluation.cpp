#include "qigl/evaluation.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <string>

namespace qigl {

using nlohmann::json;

GaussianFit fit_gaussian(const Mat& samples) {
    const Index n = samples.rows();
    if (n < 2) throw DataError("fit_gaussian needs at least 2 samples");
    GaussianFit fit;
    fit.sample_count = n;
    fit.mean = samples.colwise().mean();
    const Mat centered = samples.rowwise() - fit.mean.transpose();
    fit.covariance = (centered.transpose() * centered) / static_cast<double>(n - 1);
    fit.covariance = (fit.covariance + fit.covariance.transpose()) / 2.0;
    return fit;
}

Mat matrix_sqrt_psd(const Mat& a) {
    if (a.rows() != a.cols()) throw ShapeError("matrix_sqrt_psd needs a square matrix");
    const Mat sym = (a + a.transpose()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Mat> eigh(sym);
    if (eigh.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
    Vec eigenvalues = eigh.eigenvalues();
    const double scale = std::max(1.0, std::abs(eigenvalues.maxCoeff()));
    if (eigenvalues.minCoeff() < -1e-8 * scale) {
        throw NumericError("matrix is not PSD within tolerance");
    }
    eigenvalues = eigenvalues.cwiseMax(0.0).cwiseSqrt();
    return eigh.eigenvectors() * eigenvalues.asDiagonal() * eigh.eigenvectors().transpose();
}

double frechet_distance(const GaussianFit& real, const GaussianFit& fake) {
    if (real.mean.size() != fake.mean.size()) {
        throw ShapeError("Frechet distance needs fits of equal dimension");
    }
    const Index k = real.mean.size();
    // Diagonal regularization guards rank-deficient small-sample fits.
    const Mat reg = 1e-10 * Mat::Identity(k, k);
    const Mat sigma_r = real.covariance + reg;
    const Mat sigma_g = fake.covariance + reg;

    // tr((Sr Sg)^{1/2}) through the symmetric similar form sqrt(Sr) Sg sqrt(Sr).
    const Mat root_r = matrix_sqrt_psd(sigma_r);
    const Mat inner = root_r * sigma_g * root_r;
    const Mat cross = matrix_sqrt_psd((inner + inner.transpose()) / 2.0);

    const double mean_term = (real.mean - fake.mean).squaredNorm();
    const double trace_term = sigma_r.trace() + sigma_g.trace() - 2.0 * cross.trace();
    const double value = mean_term + trace_term;
    if (value < -1e-8) throw NumericError("Frechet distance is negative beyond tolerance");
    return std::max(value, 0.0);
}

Mat generate_scaled_features(const GeneratorEnsemble& ensemble, int n, Rng& rng) {
    if (n < 1) throw ArgumentError("sample count must be >= 1");
    const auto noise = sample_noise(ensemble, n, rng);
    Mat rows(n, ensemble.feature_count());
    parallel_for(n, [&](Index i) {
        const Vec m = forward(ensemble, noise[static_cast<std::size_t>(i)]);
        rows.row(i) = ((m.array() + 1.0) / 2.0).transpose();
    });
    return rows;
}

double generated_vs_real_frechet(const GeneratorEnsemble& ensemble, const Mat& real_scaled,
                                 int n_samples, Rng& rng) {
    if (n_samples < 2) throw DataError("need at least 2 generated samples");
    if (real_scaled.cols() != ensemble.feature_count()) {
        throw ShapeError("real feature width does not match the ensemble");
    }
    const Mat fake = generate_scaled_features(ensemble, n_samples, rng);
    return frechet_distance(fit_gaussian(real_scaled), fit_gaussian(fake));
}

double split_half_frechet(const Mat& features) {
    const Index n = features.rows();
    if (n < 4) throw DataError("split-half baseline needs at least 4 rows");
    const Index half = n / 2;
    return frechet_distance(fit_gaussian(features.topRows(half)),
                            fit_gaussian(features.bottomRows(n - half)));
}

std::string metrics_to_json(const MetricsReport& report) {
    json j;
    j["frechet"] = report.frechet;
    j["n_samples"] = report.n_samples;
    j["space"] = report.space;
    j["seed"] = report.seed;
    j["checkpoint_epoch"] = report.checkpoint_epoch;
    j["note"] = report.note;
    j["config_hash"] = report.config_hash;
    j["timestamp"] = report.timestamp;
    if (!report.per_class.empty()) j["per_class"] = report.per_class;
    return j.dump(2) + "\n";
}

MetricsReport metrics_from_json(const std::string& text) {
    const json j = json::parse(text);
    MetricsReport report;
    report.frechet = j.at("frechet").get<double>();
    report.n_samples = j.at("n_samples").get<int>();
    report.space = j.at("space").get<std::string>();
    report.seed = j.at("seed").get<std::uint64_t>();
    report.checkpoint_epoch = j.at("checkpoint_epoch").get<int>();
    report.note = j.value("note", "");
    report.config_hash = j.value("config_hash", "");
    report.timestamp = j.value("timestamp", "");
    if (j.contains("per_class")) {
        report.per_class = j.at("per_class").get<std::map<std::string, double>>();
    }
    return report;
}

}  // namespace qigl
