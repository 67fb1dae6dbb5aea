#pragma once

#include "qigl/common.hpp"

#include <optional>
#include <vector>

namespace qigl {

// Principal-component model over flattened [0,1] pixel rows. Immutable
// after fit; transform/inverse_transform are pure.
struct PcaModel {
    Vec mean;                         // length d
    Mat axes;                         // k x d, orthonormal rows
    Vec singular_values;              // length k, nonincreasing
    Vec explained_variance_ratio;     // length k, sums to <= 1
    double pca_min = 0.0;             // global min of the training score matrix
    double pca_max = 0.0;             // global max

    Index dim() const { return mean.size(); }
    Index components() const { return axes.rows(); }
};

/// Mean-centers `data` (n x d) and keeps the top-k axes from a thin SVD.
/// Axis signs are fixed by making each row's largest-magnitude entry
/// positive so refits are deterministic.
PcaModel fit_pca(const Mat& data, int k);

/// Projects rows onto the principal axes: (data - mean) * axes^T.
Mat transform(const PcaModel& model, const Mat& data);

/// scores * axes + mean. No clamping; pixel clamping happens at image
/// emission, not here.
Mat inverse_transform(const PcaModel& model, const Mat& scores);

/// Affine map of scores to [0,1] using the global training bounds.
Mat scale_scores(const PcaModel& model, const Mat& scores);

/// Exact inverse of scale_scores; values outside [0,1] extend linearly.
Mat unscale_scores(const PcaModel& model, const Mat& scaled);

/// Smallest component count whose cumulative explained variance reaches
/// eta, or nullopt if the fitted k components do not get there.
std::optional<int> components_for_variance(const PcaModel& model, double eta);

enum class AssignmentMode { Conventional, Balanced };

// Partition of feature indices across sub-generators; subsets[i][q] is the
// canonical feature index produced by sub-generator i, qubit q.
struct FeatureAssignment {
    AssignmentMode mode = AssignmentMode::Balanced;
    std::vector<std::vector<int>> subsets;

    int n_subgens() const { return static_cast<int>(subsets.size()); }
    int n_qubits() const { return subsets.empty() ? 0 : static_cast<int>(subsets[0].size()); }
    int total() const { return n_subgens() * n_qubits(); }

    void validate() const;  // exact partition, uniform subset size
};

/// Sequential blocks: subset i = [n_qubits*i, ..., n_qubits*i + n_qubits - 1].
FeatureAssignment conventional_assignment(int n_features, int n_subgens, int n_qubits);

/// One top component per sub-generator, then the remaining indices dealt in
/// reverse order in blocks of (n_qubits - 1). For the 40/8/5 default this is
/// subset i = [i, 39-4i, 38-4i, 37-4i, 36-4i].
FeatureAssignment balanced_assignment(int n_features, int n_subgens, int n_qubits);

FeatureAssignment make_assignment(AssignmentMode mode, int n_features, int n_subgens,
                                  int n_qubits);

}  // namespace qigl
