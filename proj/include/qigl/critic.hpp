#pragma once

#include "qigl/common.hpp"
#include "qigl/rng.hpp"

namespace qigl {

enum class CriticHead { Linear, Sigmoid };

// Three dense layers: in -> h1 (ReLU) -> h2 (ReLU) -> 1, then an identity
// head for Wasserstein training or a sigmoid head for the BCE variant.
// Weight matrices are stored out x in.
struct CriticParams {
    Mat w1;
    Vec b1;
    Mat w2;
    Vec b2;
    Mat w3;
    Vec b3;
    CriticHead head = CriticHead::Linear;

    Index input_dim() const { return w1.cols(); }

    static CriticParams zeros(int in = 40, int h1 = 64, int h2 = 16);
    /// Entries drawn uniformly from [-0.1, 0.1].
    static CriticParams init(Rng& rng, int in = 40, int h1 = 64, int h2 = 16);
};

struct CriticGrads {
    Mat w1;
    Vec b1;
    Mat w2;
    Vec b2;
    Mat w3;
    Vec b3;
};

/// Batch scores, one per row of `features` (batch x input_dim).
Vec critic_forward(const CriticParams& params, const Mat& features);

struct CriticBackwardResult {
    CriticGrads grads;
    Mat input_grads;  // batch x input_dim, d score / d feature scaled by upstream
};

/// Reverse-mode gradients for `sum_i upstream[i] * score_i`. The ReLU
/// subgradient at 0 is 0. In sigmoid mode the head derivative is included.
CriticBackwardResult critic_backward(const CriticParams& params, const Mat& features,
                                     const Vec& upstream);

/// Clamps every weight and bias to [-c, c]. Idempotent.
void clip_weights(CriticParams& params, double c);

double max_abs_param(const CriticParams& params);

long critic_param_count(const CriticParams& params);

}  // namespace qigl
