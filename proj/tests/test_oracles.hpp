// Independent reference implementations used only by tests. The dense-matrix
// simulator builds full 2^n x 2^n unitaries via Kronecker products and never
// shares code with the library's in-place gate kernels.
#pragma once

#include "qigl/qcircuit.hpp"
#include "qigl/qgenerator.hpp"
#include "qigl/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <vector>

namespace qigl::test {

using CMat = Eigen::MatrixXcd;

inline CMat kron(const CMat& a, const CMat& b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

// Little-endian embedding: qubit 0 is the least significant bit, so the
// single-qubit factor sits at the low end of the Kronecker chain.
inline CMat embed_single(int n_qubits, int target, const CMat& u) {
    const CMat high = CMat::Identity(Index{1} << (n_qubits - 1 - target),
                                     Index{1} << (n_qubits - 1 - target));
    const CMat low = CMat::Identity(Index{1} << target, Index{1} << target);
    return kron(kron(high, u), low);
}

inline CMat rx_matrix(double angle) {
    const double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
    CMat u(2, 2);
    u << Complex(c, 0), Complex(0, -s), Complex(0, -s), Complex(c, 0);
    return u;
}

inline CMat ry_matrix(double angle) {
    const double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
    CMat u(2, 2);
    u << Complex(c, 0), Complex(-s, 0), Complex(s, 0), Complex(c, 0);
    return u;
}

inline CMat cz_matrix(int n_qubits, int control, int target) {
    const Index dim = Index{1} << n_qubits;
    CMat u = CMat::Zero(dim, dim);
    const Index both = (Index{1} << control) | (Index{1} << target);
    for (Index i = 0; i < dim; ++i) {
        u(i, i) = ((i & both) == both) ? Complex(-1, 0) : Complex(1, 0);
    }
    return u;
}

inline CMat gate_matrix(int n_qubits, const GateOp& op) {
    switch (op.kind) {
        case GateKind::Rx: return embed_single(n_qubits, op.target, rx_matrix(op.angle));
        case GateKind::Ry: return embed_single(n_qubits, op.target, ry_matrix(op.angle));
        case GateKind::Cz: return cz_matrix(n_qubits, op.control, op.target);
    }
    return CMat::Identity(Index{1} << n_qubits, Index{1} << n_qubits);
}

inline CMat pauli_x_full(int n_qubits, int q) {
    CMat x(2, 2);
    x << Complex(0, 0), Complex(1, 0), Complex(1, 0), Complex(0, 0);
    return embed_single(n_qubits, q, x);
}

/// Replays a gate list through dense matrix-vector products.
inline CVec dense_replay(int n_qubits, const std::vector<GateOp>& gates) {
    CVec psi = CVec::Zero(Index{1} << n_qubits);
    psi[0] = Complex(1, 0);
    for (const auto& op : gates) psi = gate_matrix(n_qubits, op) * psi;
    return psi;
}

inline Vec dense_expectations(int n_qubits, const CVec& psi) {
    Vec out(n_qubits);
    for (int q = 0; q < n_qubits; ++q) {
        out[q] = std::real(psi.dot(pauli_x_full(n_qubits, q) * psi));
    }
    return out;
}

inline CVec random_state(int n_qubits, Rng& rng) {
    CVec psi(Index{1} << n_qubits);
    for (Index i = 0; i < psi.size(); ++i) {
        psi[i] = Complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    }
    psi /= psi.norm();
    return psi;
}

/// Central finite differences of forward() over the flattened angles.
inline Mat fd_jacobian(const GeneratorEnsemble& ensemble, const NoiseVector& noise, double h) {
    GeneratorEnsemble work = ensemble;
    const Vec base = flatten_params(work);
    Mat jac(work.feature_count(), base.size());
    for (Index p = 0; p < base.size(); ++p) {
        Vec theta = base;
        theta[p] = base[p] + h;
        set_params(work, theta);
        const Vec plus = forward(work, noise);
        theta[p] = base[p] - h;
        set_params(work, theta);
        const Vec minus = forward(work, noise);
        jac.col(p) = (plus - minus) / (2.0 * h);
    }
    return jac;
}

}  // namespace qigl::test
