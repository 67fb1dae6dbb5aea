#pragma once

#include "qigl/common.hpp"

#include <utility>
#include <vector>

namespace qigl {

// Dense statevector over n qubits. Amplitude ordering is little-endian:
// qubit 0 is the least significant bit of the basis index.
struct StateVector {
    int n_qubits = 0;
    CVec amplitudes;

    Index dim() const { return amplitudes.size(); }
    double norm() const { return amplitudes.norm(); }
};

enum class GateKind { Rx, Ry, Cz };

struct GateOp {
    GateKind kind;
    int target = 0;
    int control = -1;    // CZ only
    double angle = 0.0;  // Rx/Ry only
};

// Fixed-topology ansatz: per-qubit Rx/Ry noise encoding, then `depth`
// repetitions of one Ry per qubit followed by the entangler CZ pairs.
struct CircuitSpec {
    int n_qubits = 0;
    int depth = 0;
    std::vector<std::pair<int, int>> entanglers;  // applied after every layer

    /// Linear nearest-neighbour chain (0-1, 1-2, ...).
    static CircuitSpec chain(int n_qubits, int depth);

    void validate() const;
};

StateVector init_zero_state(int n_qubits);

void apply_rx(StateVector& state, int target, double angle);
void apply_ry(StateVector& state, int target, double angle);
void apply_cz(StateVector& state, int control, int target);
void apply_gate(StateVector& state, const GateOp& op);

/// One Pauli-X expectation per qubit, each in [-1, 1]. Requires a
/// normalized state (norm deviation <= 1e-9).
Vec pauli_x_expectations(const StateVector& state);

/// The full gate list run_circuit executes, in order. Exposed so callers
/// can replay the exact sequence through an independent simulator.
std::vector<GateOp> build_circuit_gates(const CircuitSpec& spec, const Vec& rx_angles,
                                        const Vec& ry_angles, const Mat& weights);

/// Encodes (rx, ry) per qubit, applies the variational layers, and returns
/// the Pauli-X expectations. `weights` is depth x n_qubits.
Vec run_circuit(const CircuitSpec& spec, const Vec& rx_angles, const Vec& ry_angles,
                const Mat& weights);

}  // namespace qigl
