#include "qigl/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qigl {

PcaModel fit_pca(const Mat& data, int k) {
    const Index n = data.rows();
    const Index d = data.cols();
    if (n < 2) throw DataError("PCA needs at least 2 samples");
    const Index k_max = std::min(n - 1, d);
    if (k < 1 || k > k_max) {
        throw ArgumentError("component count " + std::to_string(k) + " exceeds usable rank " +
                            std::to_string(k_max));
    }

    PcaModel model;
    model.mean = data.colwise().mean();
    Mat centered = data.rowwise() - model.mean.transpose();

    const double total_variance = centered.squaredNorm();  // sum of all sigma_i^2
    if (total_variance <= 0.0) {
        throw DataError("degenerate data: all rows identical");
    }

    Eigen::BDCSVD<Mat> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
    model.singular_values = svd.singularValues().head(k);
    model.axes = svd.matrixV().leftCols(k).transpose();  // k x d

    // Sign convention: largest-magnitude entry of each axis is positive.
    for (Index i = 0; i < k; ++i) {
        Index arg_max = 0;
        model.axes.row(i).cwiseAbs().maxCoeff(&arg_max);
        if (model.axes(i, arg_max) < 0.0) model.axes.row(i) = -model.axes.row(i);
    }

    model.explained_variance_ratio =
        model.singular_values.array().square() / total_variance;

    const Mat scores = centered * model.axes.transpose();
    model.pca_min = scores.minCoeff();
    model.pca_max = scores.maxCoeff();
    if (!(model.pca_min < model.pca_max)) {
        throw DataError("degenerate score range: pca_min == pca_max");
    }
    return model;
}

Mat transform(const PcaModel& model, const Mat& data) {
    if (data.cols() != model.dim()) {
        throw ShapeError("data width " + std::to_string(data.cols()) +
                         " does not match PCA dimension " + std::to_string(model.dim()));
    }
    return (data.rowwise() - model.mean.transpose()) * model.axes.transpose();
}

Mat inverse_transform(const PcaModel& model, const Mat& scores) {
    if (scores.cols() != model.components()) {
        throw ShapeError("score width " + std::to_string(scores.cols()) +
                         " does not match component count " +
                         std::to_string(model.components()));
    }
    return (scores * model.axes).rowwise() + model.mean.transpose();
}

namespace {
void check_scale_range(const PcaModel& model) {
    if (!(model.pca_max > model.pca_min)) {
        throw DataError("degenerate scale: pca_max must exceed pca_min");
    }
}
}  // namespace

Mat scale_scores(const PcaModel& model, const Mat& scores) {
    check_scale_range(model);
    return (scores.array() - model.pca_min) / (model.pca_max - model.pca_min);
}

Mat unscale_scores(const PcaModel& model, const Mat& scaled) {
    check_scale_range(model);
    return scaled.array() * (model.pca_max - model.pca_min) + model.pca_min;
}

std::optional<int> components_for_variance(const PcaModel& model, double eta) {
    double cumulative = 0.0;
    for (Index i = 0; i < model.explained_variance_ratio.size(); ++i) {
        cumulative += model.explained_variance_ratio[i];
        if (cumulative >= eta) return static_cast<int>(i) + 1;
    }
    return std::nullopt;
}

void FeatureAssignment::validate() const {
    const int nf = total();
    std::vector<int> seen(static_cast<std::size_t>(nf), 0);
    const std::size_t width = subsets.empty() ? 0 : subsets[0].size();
    for (const auto& subset : subsets) {
        if (subset.size() != width) throw ShapeError("assignment subsets have unequal sizes");
        for (int idx : subset) {
            if (idx < 0 || idx >= nf) throw ShapeError("assignment index out of range");
            if (seen[static_cast<std::size_t>(idx)]++) {
                throw ShapeError("assignment index " + std::to_string(idx) + " repeated");
            }
        }
    }
}

namespace {
void check_assignment_sizes(int n_features, int n_subgens, int n_qubits) {
    if (n_subgens < 1 || n_qubits < 1 || n_features != n_subgens * n_qubits) {
        throw ShapeError("n_features must equal n_subgens * n_qubits");
    }
}
}  // namespace

FeatureAssignment conventional_assignment(int n_features, int n_subgens, int n_qubits) {
    check_assignment_sizes(n_features, n_subgens, n_qubits);
    FeatureAssignment assignment;
    assignment.mode = AssignmentMode::Conventional;
    assignment.subsets.resize(static_cast<std::size_t>(n_subgens));
    for (int i = 0; i < n_subgens; ++i) {
        for (int q = 0; q < n_qubits; ++q) {
            assignment.subsets[static_cast<std::size_t>(i)].push_back(n_qubits * i + q);
        }
    }
    assignment.validate();
    return assignment;
}

FeatureAssignment balanced_assignment(int n_features, int n_subgens, int n_qubits) {
    check_assignment_sizes(n_features, n_subgens, n_qubits);
    FeatureAssignment assignment;
    assignment.mode = AssignmentMode::Balanced;
    assignment.subsets.resize(static_cast<std::size_t>(n_subgens));
    for (int i = 0; i < n_subgens; ++i) {
        auto& subset = assignment.subsets[static_cast<std::size_t>(i)];
        subset.push_back(i);
        const int block = (n_qubits - 1) * i;
        for (int j = 0; j < n_qubits - 1; ++j) {
            subset.push_back(n_features - 1 - block - j);
        }
    }
    assignment.validate();
    return assignment;
}

FeatureAssignment make_assignment(AssignmentMode mode, int n_features, int n_subgens,
                                  int n_qubits) {
    return mode == AssignmentMode::Balanced
               ? balanced_assignment(n_features, n_subgens, n_qubits)
               : conventional_assignment(n_features, n_subgens, n_qubits);
}

}  // namespace qigl
