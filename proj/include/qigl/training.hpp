#pragma once

#include "qigl/common.hpp"
#include "qigl/critic.hpp"
#include "qigl/qgenerator.hpp"
#include "qigl/rng.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace qigl {

enum class LossMode { Wasserstein, Bce };

struct TrainConfig {
    int epochs = 50;
    int batch_size = 8;
    double lr_generator = 0.3;
    double lr_critic = 0.05;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double clip_c = 0.01;
    int critic_steps_per_gen_step = 5;
    LossMode loss_mode = LossMode::Wasserstein;
    AssignmentMode assignment_mode = AssignmentMode::Balanced;
    bool he_enabled = false;
    std::uint64_t seed = 0;

    void validate() const;
};

// One first/second-moment pair per parameter tensor plus a shared step
// counter.
struct AdamState {
    std::vector<Vec> m;
    std::vector<Vec> v;
    long step = 0;

    static AdamState for_sizes(const std::vector<Index>& sizes);
};

/// L_D = -mean(real_scores) + mean(fake_scores).
double critic_loss(const Vec& real_scores, const Vec& fake_scores);

/// L_G = -mean(fake_scores).
double generator_loss(const Vec& fake_scores);

/// (critic loss, generator loss) for the BCE variant. Probabilities are
/// clamped to [1e-7, 1 - 1e-7] before the logs; the generator term is the
/// non-saturating -mean(log fake_probs).
std::pair<double, double> bce_losses(const Vec& real_probs, const Vec& fake_probs);

/// Bias-corrected Adam update of one flat tensor, in place.
void adam_step(Vec& params, const Vec& grads, Vec& m, Vec& v, long step, double lr,
               double beta1, double beta2, double eps);

/// Generator loss and its gradient w.r.t. the flattened circuit angles for
/// a fixed noise batch, chained through the critic and the parameter-shift
/// Jacobian. Exposed for gradient verification.
std::pair<double, Vec> generator_loss_and_grad(const GeneratorEnsemble& ensemble,
                                               const CriticParams& critic,
                                               const std::vector<NoiseVector>& noise,
                                               LossMode mode);

struct StepRecord {
    double critic_loss = 0.0;     // mean over the critic updates in this step
    double generator_loss = 0.0;
};

/// One adversarial round: critic_steps_per_gen_step critic updates on
/// `real_batch` (rows of scaled scores) with fresh fake batches, weight
/// clipping in Wasserstein mode, then one generator update.
StepRecord train_step(const Mat& real_batch, GeneratorEnsemble& ensemble, CriticParams& critic,
                      const TrainConfig& config, AdamState& gen_opt, AdamState& critic_opt,
                      Rng& rng);

struct EpochRecord {
    int epoch = 0;
    double critic_loss = 0.0;
    double generator_loss = 0.0;
    double frechet = 0.0;
    double wall_seconds = 0.0;
};

/// Shuffled mini-batch epochs of train_step over `real_scaled`. After each
/// epoch the feature-space Frechet distance against the full real matrix is
/// measured with `eval_samples` generated rows (on an evaluation stream
/// derived from the seed, so the training stream is untouched) and
/// `on_epoch` is invoked. Returns the per-epoch records; epochs == 0 yields
/// an empty history.
std::vector<EpochRecord> train(const Mat& real_scaled, GeneratorEnsemble& ensemble,
                               CriticParams& critic, const TrainConfig& config,
                               AdamState& gen_opt, AdamState& critic_opt, Rng& rng,
                               int eval_samples, int start_epoch = 0,
                               const std::function<void(const EpochRecord&)>& on_epoch = {});

AdamState make_generator_opt_state(const GeneratorEnsemble& ensemble);
AdamState make_critic_opt_state(const CriticParams& critic);

// Classical reference generator: latent(100) -> 1024 (LeakyReLU 0.2) ->
// out (Tanh). 144,424 parameters at the 100/1024/40 defaults.
struct BaselineGeneratorParams {
    Mat w1;
    Vec b1;
    Mat w2;
    Vec b2;

    static BaselineGeneratorParams zeros(int latent = 100, int hidden = 1024, int out = 40);
    static BaselineGeneratorParams init(Rng& rng, int latent = 100, int hidden = 1024,
                                        int out = 40);
};

Mat baseline_forward(const BaselineGeneratorParams& params, const Mat& latent);
long baseline_param_count(const BaselineGeneratorParams& params);

}  // namespace qigl
