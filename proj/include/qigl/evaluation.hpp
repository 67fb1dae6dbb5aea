#pragma once

#include "qigl/common.hpp"
#include "qigl/qgenerator.hpp"
#include "qigl/rng.hpp"

#include <map>
#include <string>

namespace qigl {

struct GaussianFit {
    Vec mean;
    Mat covariance;  // symmetric PSD (within tolerance)
    Index sample_count = 0;
};

/// Sample mean and unbiased covariance (divides by n - 1). Needs n >= 2.
GaussianFit fit_gaussian(const Mat& samples);

/// PSD square root via eigendecomposition; negative eigenvalues within
/// tolerance are clamped to zero, larger ones are a numeric error.
Mat matrix_sqrt_psd(const Mat& a);

/// ||mu_r - mu_g||^2 + tr(Sigma_r + Sigma_g - 2 (Sigma_r Sigma_g)^{1/2}),
/// computed through the symmetrized form sqrt(Sr) Sg sqrt(Sr). Small
/// negative results from roundoff are clamped to 0.
double frechet_distance(const GaussianFit& real, const GaussianFit& fake);

/// `n` generated feature rows mapped into the critic's [0,1] space via
/// m -> (m + 1) / 2.
Mat generate_scaled_features(const GeneratorEnsemble& ensemble, int n, Rng& rng);

/// Frechet distance between Gaussian fits of generated samples and the
/// given real scaled-score rows.
double generated_vs_real_frechet(const GeneratorEnsemble& ensemble, const Mat& real_scaled,
                                 int n_samples, Rng& rng);

/// Baseline: distance between the first and second half of `features`
/// (in row order). Needs at least 4 rows.
double split_half_frechet(const Mat& features);

struct MetricsReport {
    double frechet = 0.0;
    int n_samples = 0;
    std::string space = "feature";
    std::uint64_t seed = 0;
    int checkpoint_epoch = 0;
    std::map<std::string, double> per_class;
    std::string note;
    std::string config_hash;
    std::string timestamp;
};

/// JSON with fixed field names (frechet, n_samples, space, seed,
/// checkpoint_epoch, ...).
std::string metrics_to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const std::string& text);

}  // namespace qigl
