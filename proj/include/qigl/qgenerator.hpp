#pragma once

#include "qigl/common.hpp"
#include "qigl/features.hpp"
#include "qigl/qcircuit.hpp"
#include "qigl/rng.hpp"

#include <vector>

namespace qigl {

struct SubGeneratorParams {
    Mat weights;  // depth x n_qubits, radians
};

// Ensemble of independent sub-generator circuits. Sub-generator i, qubit q
// produces the canonical feature assignment.subsets[i][q].
struct GeneratorEnsemble {
    std::vector<SubGeneratorParams> sub_generators;
    CircuitSpec circuit;
    FeatureAssignment assignment;

    int n_subgens() const { return static_cast<int>(sub_generators.size()); }
    int feature_count() const { return n_subgens() * circuit.n_qubits; }

    /// Zero-initialized weights unless `init_rng` is given, in which case
    /// angles start uniform in [-0.1, 0.1].
    static GeneratorEnsemble make(int n_subgens, int n_qubits, int depth, AssignmentMode mode,
                                  Rng* init_rng = nullptr);
};

// Per-sub-generator noise angles, each entry in [0, pi/2].
struct NoiseVector {
    Mat values;  // n_subgens x n_qubits
};

/// I.i.d. Uniform(0, pi/2) draws, independent per sub-generator and qubit.
std::vector<NoiseVector> sample_noise(const GeneratorEnsemble& ensemble, int batch, Rng& rng);

/// Runs every sub-generator (noise value used as both Rx and Ry encoding
/// angle) and places the expectations in canonical feature order.
Vec forward(const GeneratorEnsemble& ensemble, const NoiseVector& noise);

/// Raw sub-generator-major concatenation, before assignment reordering.
Vec forward_raw(const GeneratorEnsemble& ensemble, const NoiseVector& noise);

/// Parameter-shift Jacobian d m / d theta, feature_count x param_count.
/// Entry (f, p) = [m_f(theta_p + pi/2) - m_f(theta_p - pi/2)] / 2.
/// Block sparse: features only depend on their own sub-generator.
Mat parameter_shift_jacobian(const GeneratorEnsemble& ensemble, const NoiseVector& noise);

long generator_param_count(const GeneratorEnsemble& ensemble);

/// Parameter order used by the Jacobian, the optimizer, and checkpoints:
/// sub-generator major, then row-major (layer, qubit) within each grid.
Vec flatten_params(const GeneratorEnsemble& ensemble);
void set_params(GeneratorEnsemble& ensemble, const Vec& flat);

}  // namespace qigl
