#include "qigl/critic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qigl {

namespace {

// Keeps sigmoid outputs strictly inside (0, 1) even at saturating inputs.
constexpr double kSigmoidEps = 1e-15;

double sigmoid(double x) {
    const double p = 1.0 / (1.0 + std::exp(-x));
    return std::clamp(p, kSigmoidEps, 1.0 - kSigmoidEps);
}

void fill_uniform(Rng& rng, Mat& m, double lo, double hi) {
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(lo, hi);
    }
}

void fill_uniform(Rng& rng, Vec& v, double lo, double hi) {
    for (Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(lo, hi);
}

}  // namespace

CriticParams CriticParams::zeros(int in, int h1, int h2) {
    CriticParams p;
    p.w1 = Mat::Zero(h1, in);
    p.b1 = Vec::Zero(h1);
    p.w2 = Mat::Zero(h2, h1);
    p.b2 = Vec::Zero(h2);
    p.w3 = Mat::Zero(1, h2);
    p.b3 = Vec::Zero(1);
    return p;
}

CriticParams CriticParams::init(Rng& rng, int in, int h1, int h2) {
    CriticParams p = zeros(in, h1, h2);
    fill_uniform(rng, p.w1, -0.1, 0.1);
    fill_uniform(rng, p.b1, -0.1, 0.1);
    fill_uniform(rng, p.w2, -0.1, 0.1);
    fill_uniform(rng, p.b2, -0.1, 0.1);
    fill_uniform(rng, p.w3, -0.1, 0.1);
    fill_uniform(rng, p.b3, -0.1, 0.1);
    return p;
}

Vec critic_forward(const CriticParams& params, const Mat& features) {
    if (features.cols() != params.input_dim()) {
        throw ShapeError("critic input width " + std::to_string(features.cols()) +
                         " does not match expected " + std::to_string(params.input_dim()));
    }
    Mat a1 = ((features * params.w1.transpose()).rowwise() + params.b1.transpose())
                 .cwiseMax(0.0);
    Mat a2 = ((a1 * params.w2.transpose()).rowwise() + params.b2.transpose()).cwiseMax(0.0);
    Vec scores = (a2 * params.w3.transpose()).col(0).array() + params.b3[0];
    if (params.head == CriticHead::Sigmoid) {
        for (Index i = 0; i < scores.size(); ++i) scores[i] = sigmoid(scores[i]);
    }
    return scores;
}

CriticBackwardResult critic_backward(const CriticParams& params, const Mat& features,
                                     const Vec& upstream) {
    if (features.cols() != params.input_dim()) {
        throw ShapeError("critic input width mismatch in backward pass");
    }
    if (upstream.size() != features.rows()) {
        throw ShapeError("upstream gradient count must match batch size");
    }

    // Forward with cached pre-activations.
    Mat z1 = (features * params.w1.transpose()).rowwise() + params.b1.transpose();
    Mat a1 = z1.cwiseMax(0.0);
    Mat z2 = (a1 * params.w2.transpose()).rowwise() + params.b2.transpose();
    Mat a2 = z2.cwiseMax(0.0);
    Vec z3 = (a2 * params.w3.transpose()).col(0).array() + params.b3[0];

    Vec d3 = upstream;
    if (params.head == CriticHead::Sigmoid) {
        for (Index i = 0; i < d3.size(); ++i) {
            const double p = sigmoid(z3[i]);
            d3[i] *= p * (1.0 - p);
        }
    }

    CriticBackwardResult out;
    out.grads.w3 = d3.transpose() * a2;  // 1 x h2
    out.grads.b3 = Vec::Constant(1, d3.sum());

    Mat d2 = d3 * params.w3;                                   // batch x h2
    d2 = d2.cwiseProduct((z2.array() > 0.0).cast<double>().matrix());
    out.grads.w2 = d2.transpose() * a1;
    out.grads.b2 = d2.colwise().sum().transpose();

    Mat d1 = d2 * params.w2;                                   // batch x h1
    d1 = d1.cwiseProduct((z1.array() > 0.0).cast<double>().matrix());
    out.grads.w1 = d1.transpose() * features;
    out.grads.b1 = d1.colwise().sum().transpose();

    out.input_grads = d1 * params.w1;  // batch x in
    return out;
}

void clip_weights(CriticParams& params, double c) {
    if (!(c > 0.0)) throw ArgumentError("clip bound must be positive");
    auto clamp_mat = [c](Mat& m) { m = m.cwiseMax(-c).cwiseMin(c); };
    auto clamp_vec = [c](Vec& v) { v = v.cwiseMax(-c).cwiseMin(c); };
    clamp_mat(params.w1);
    clamp_vec(params.b1);
    clamp_mat(params.w2);
    clamp_vec(params.b2);
    clamp_mat(params.w3);
    clamp_vec(params.b3);
}

double max_abs_param(const CriticParams& params) {
    double m = 0.0;
    m = std::max(m, params.w1.cwiseAbs().maxCoeff());
    m = std::max(m, params.b1.cwiseAbs().maxCoeff());
    m = std::max(m, params.w2.cwiseAbs().maxCoeff());
    m = std::max(m, params.b2.cwiseAbs().maxCoeff());
    m = std::max(m, params.w3.cwiseAbs().maxCoeff());
    m = std::max(m, params.b3.cwiseAbs().maxCoeff());
    return m;
}

long critic_param_count(const CriticParams& params) {
    return static_cast<long>(params.w1.size() + params.b1.size() + params.w2.size() +
                             params.b2.size() + params.w3.size() + params.b3.size());
}

}  // namespace qigl
