#include "qigl/qgenerator.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace qigl {

namespace {

void check_noise_shape(const GeneratorEnsemble& ensemble, const NoiseVector& noise) {
    if (noise.values.rows() != ensemble.n_subgens() ||
        noise.values.cols() != ensemble.circuit.n_qubits) {
        throw ShapeError("noise shape must be n_subgens x n_qubits");
    }
}

}  // namespace

GeneratorEnsemble GeneratorEnsemble::make(int n_subgens, int n_qubits, int depth,
                                          AssignmentMode mode, Rng* init_rng) {
    GeneratorEnsemble ensemble;
    ensemble.circuit = CircuitSpec::chain(n_qubits, depth);
    ensemble.assignment = make_assignment(mode, n_subgens * n_qubits, n_subgens, n_qubits);
    ensemble.sub_generators.resize(static_cast<std::size_t>(n_subgens));
    for (auto& sub : ensemble.sub_generators) {
        sub.weights = Mat::Zero(depth, n_qubits);
        if (init_rng != nullptr) {
            for (Index l = 0; l < depth; ++l) {
                for (Index q = 0; q < n_qubits; ++q) {
                    sub.weights(l, q) = init_rng->uniform(-0.1, 0.1);
                }
            }
        }
    }
    return ensemble;
}

std::vector<NoiseVector> sample_noise(const GeneratorEnsemble& ensemble, int batch, Rng& rng) {
    if (batch < 1) throw ArgumentError("batch must be >= 1");
    const double half_pi = std::numbers::pi / 2.0;
    std::vector<NoiseVector> out(static_cast<std::size_t>(batch));
    for (auto& noise : out) {
        noise.values = Mat(ensemble.n_subgens(), ensemble.circuit.n_qubits);
        for (Index i = 0; i < noise.values.rows(); ++i) {
            for (Index q = 0; q < noise.values.cols(); ++q) {
                noise.values(i, q) = rng.uniform(0.0, half_pi);
            }
        }
    }
    return out;
}

Vec forward_raw(const GeneratorEnsemble& ensemble, const NoiseVector& noise) {
    check_noise_shape(ensemble, noise);
    const int nq = ensemble.circuit.n_qubits;
    Vec raw(ensemble.feature_count());
    for (int i = 0; i < ensemble.n_subgens(); ++i) {
        const Vec angles = noise.values.row(i).transpose();
        raw.segment(i * nq, nq) = run_circuit(ensemble.circuit, angles, angles,
                                              ensemble.sub_generators[static_cast<std::size_t>(i)].weights);
    }
    return raw;
}

Vec forward(const GeneratorEnsemble& ensemble, const NoiseVector& noise) {
    const Vec raw = forward_raw(ensemble, noise);
    const int nq = ensemble.circuit.n_qubits;
    Vec out(raw.size());
    for (int i = 0; i < ensemble.n_subgens(); ++i) {
        const auto& subset = ensemble.assignment.subsets[static_cast<std::size_t>(i)];
        for (int q = 0; q < nq; ++q) out[subset[static_cast<std::size_t>(q)]] = raw[i * nq + q];
    }
    return out;
}

Mat parameter_shift_jacobian(const GeneratorEnsemble& ensemble, const NoiseVector& noise) {
    check_noise_shape(ensemble, noise);
    const int nq = ensemble.circuit.n_qubits;
    const int depth = ensemble.circuit.depth;
    const int per_sub = depth * nq;
    const double shift = std::numbers::pi / 2.0;

    Mat jac = Mat::Zero(ensemble.feature_count(), generator_param_count(ensemble));
    const Index n_jobs = static_cast<Index>(ensemble.n_subgens()) * per_sub;
    // Each job owns one parameter column, so parallel evaluation stays
    // deterministic regardless of thread count.
    parallel_for(n_jobs, [&](Index job) {
        const int sub = static_cast<int>(job) / per_sub;
        const int within = static_cast<int>(job) % per_sub;
        const int layer = within / nq;
        const int qubit = within % nq;

        Mat weights = ensemble.sub_generators[static_cast<std::size_t>(sub)].weights;
        const Vec angles = noise.values.row(sub).transpose();

        weights(layer, qubit) += shift;
        const Vec plus = run_circuit(ensemble.circuit, angles, angles, weights);
        weights(layer, qubit) -= 2.0 * shift;
        const Vec minus = run_circuit(ensemble.circuit, angles, angles, weights);

        const Vec col = (plus - minus) / 2.0;
        const auto& subset = ensemble.assignment.subsets[static_cast<std::size_t>(sub)];
        const Index param = static_cast<Index>(sub) * per_sub + within;
        for (int q = 0; q < nq; ++q) {
            jac(subset[static_cast<std::size_t>(q)], param) = col[q];
        }
    });
    return jac;
}

long generator_param_count(const GeneratorEnsemble& ensemble) {
    return static_cast<long>(ensemble.n_subgens()) * ensemble.circuit.depth *
           ensemble.circuit.n_qubits;
}

Vec flatten_params(const GeneratorEnsemble& ensemble) {
    Vec flat(generator_param_count(ensemble));
    Index at = 0;
    for (const auto& sub : ensemble.sub_generators) {
        for (Index l = 0; l < sub.weights.rows(); ++l) {
            for (Index q = 0; q < sub.weights.cols(); ++q) flat[at++] = sub.weights(l, q);
        }
    }
    return flat;
}

void set_params(GeneratorEnsemble& ensemble, const Vec& flat) {
    if (flat.size() != generator_param_count(ensemble)) {
        throw ShapeError("flat parameter vector has wrong length");
    }
    Index at = 0;
    for (auto& sub : ensemble.sub_generators) {
        for (Index l = 0; l < sub.weights.rows(); ++l) {
            for (Index q = 0; q < sub.weights.cols(); ++q) sub.weights(l, q) = flat[at++];
        }
    }
}

}  // namespace qigl
