#include "qigl/qcircuit.hpp"

#include <cmath>
#include <string>

namespace qigl {

namespace {

constexpr int kMaxQubits = 24;

void check_target(const StateVector& state, int target) {
    if (target < 0 || target >= state.n_qubits) {
        throw ArgumentError("qubit index " + std::to_string(target) + " out of range for " +
                            std::to_string(state.n_qubits) + " qubits");
    }
}

// Applies [[u00 u01],[u10 u11]] to `target` over the amplitude pairs
// (i, i | mask). The outer loop walks indices with the target bit clear.
void apply_single_qubit(CVec& amps, int target, Complex u00, Complex u01, Complex u10,
                        Complex u11) {
    const Index n = amps.size();
    const Index mask = Index{1} << target;
    for (Index base = 0; base < n; ++base) {
        if (base & mask) continue;
        const Index flipped = base | mask;
        const Complex a = amps[base];
        const Complex b = amps[flipped];
        amps[base] = u00 * a + u01 * b;
        amps[flipped] = u10 * a + u11 * b;
    }
}

}  // namespace

CircuitSpec CircuitSpec::chain(int n_qubits, int depth) {
    CircuitSpec spec;
    spec.n_qubits = n_qubits;
    spec.depth = depth;
    for (int q = 0; q + 1 < n_qubits; ++q) spec.entanglers.emplace_back(q, q + 1);
    spec.validate();
    return spec;
}

void CircuitSpec::validate() const {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw ArgumentError("circuit qubit count must be in [1, 24]");
    }
    if (depth < 1) throw ArgumentError("circuit depth must be >= 1");
    for (const auto& [control, target] : entanglers) {
        if (control < 0 || control >= n_qubits || target < 0 || target >= n_qubits) {
            throw ArgumentError("entangler pair references an invalid qubit");
        }
        if (control == target) throw ArgumentError("entangler control equals target");
    }
}

StateVector init_zero_state(int n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw ArgumentError("n_qubits must be in [1, 24], got " + std::to_string(n_qubits));
    }
    StateVector state;
    state.n_qubits = n_qubits;
    state.amplitudes = CVec::Zero(Index{1} << n_qubits);
    state.amplitudes[0] = Complex(1.0, 0.0);
    return state;
}

void apply_rx(StateVector& state, int target, double angle) {
    check_target(state, target);
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    // exp(-i angle X / 2) = [[c, -i s], [-i s, c]]
    apply_single_qubit(state.amplitudes, target, Complex(c, 0), Complex(0, -s), Complex(0, -s),
                       Complex(c, 0));
}

void apply_ry(StateVector& state, int target, double angle) {
    check_target(state, target);
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    // exp(-i angle Y / 2) = [[c, -s], [s, c]]
    apply_single_qubit(state.amplitudes, target, Complex(c, 0), Complex(-s, 0), Complex(s, 0),
                       Complex(c, 0));
}

void apply_cz(StateVector& state, int control, int target) {
    check_target(state, control);
    check_target(state, target);
    if (control == target) throw ArgumentError("CZ control must differ from target");
    const Index both = (Index{1} << control) | (Index{1} << target);
    const Index n = state.amplitudes.size();
    for (Index i = 0; i < n; ++i) {
        if ((i & both) == both) state.amplitudes[i] = -state.amplitudes[i];
    }
}

void apply_gate(StateVector& state, const GateOp& op) {
    switch (op.kind) {
        case GateKind::Rx: apply_rx(state, op.target, op.angle); break;
        case GateKind::Ry: apply_ry(state, op.target, op.angle); break;
        case GateKind::Cz: apply_cz(state, op.control, op.target); break;
    }
}

Vec pauli_x_expectations(const StateVector& state) {
    if (std::abs(state.norm() - 1.0) > 1e-9) {
        throw StateError("state norm deviates from 1 by more than 1e-9");
    }
    Vec result = Vec::Zero(state.n_qubits);
    const Index n = state.amplitudes.size();
    for (int q = 0; q < state.n_qubits; ++q) {
        const Index mask = Index{1} << q;
        double acc = 0.0;
        // <X_q> = sum over pairs 2 Re(conj(psi_i0) psi_i1)
        for (Index base = 0; base < n; ++base) {
            if (base & mask) continue;
            acc += 2.0 * std::real(std::conj(state.amplitudes[base]) *
                                   state.amplitudes[base | mask]);
        }
        result[q] = acc;
    }
    return result;
}

std::vector<GateOp> build_circuit_gates(const CircuitSpec& spec, const Vec& rx_angles,
                                        const Vec& ry_angles, const Mat& weights) {
    spec.validate();
    if (rx_angles.size() != spec.n_qubits || ry_angles.size() != spec.n_qubits) {
        throw ShapeError("encoding angle count must equal n_qubits");
    }
    if (weights.rows() != spec.depth || weights.cols() != spec.n_qubits) {
        throw ShapeError("weights must be depth x n_qubits");
    }
    std::vector<GateOp> gates;
    gates.reserve(static_cast<std::size_t>(
        2 * spec.n_qubits + spec.depth * (spec.n_qubits + static_cast<int>(spec.entanglers.size()))));
    for (int q = 0; q < spec.n_qubits; ++q) {
        gates.push_back({GateKind::Rx, q, -1, rx_angles[q]});
        gates.push_back({GateKind::Ry, q, -1, ry_angles[q]});
    }
    for (int layer = 0; layer < spec.depth; ++layer) {
        for (int q = 0; q < spec.n_qubits; ++q) {
            gates.push_back({GateKind::Ry, q, -1, weights(layer, q)});
        }
        for (const auto& [control, target] : spec.entanglers) {
            gates.push_back({GateKind::Cz, target, control, 0.0});
        }
    }
    return gates;
}

Vec run_circuit(const CircuitSpec& spec, const Vec& rx_angles, const Vec& ry_angles,
                const Mat& weights) {
    const auto gates = build_circuit_gates(spec, rx_angles, ry_angles, weights);
    StateVector state = init_zero_state(spec.n_qubits);
    for (const auto& gate : gates) apply_gate(state, gate);
    return pauli_x_expectations(state);
}

}  // namespace qigl
