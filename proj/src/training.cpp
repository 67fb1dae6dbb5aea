#include "qigl/training.hpp"

#include "qigl/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

namespace qigl {

namespace {

constexpr double kProbFloor = 1e-7;

void check_finite_loss(double value, const char* what, const GeneratorEnsemble& ensemble,
                       const CriticParams& critic) {
    if (std::isfinite(value)) return;
    throw DivergenceError(std::string("non-finite ") + what + " loss (" +
                          std::to_string(value) + "); max |generator param| = " +
                          std::to_string(flatten_params(ensemble).cwiseAbs().maxCoeff()) +
                          ", max |critic param| = " + std::to_string(max_abs_param(critic)));
}

// The critic's tensors in optimizer/checkpoint order.
template <typename Params, typename Fn>
void for_each_critic_tensor(Params& p, Fn&& fn) {
    fn(p.w1);
    fn(p.b1);
    fn(p.w2);
    fn(p.b2);
    fn(p.w3);
    fn(p.b3);
}

void adam_step_critic(CriticParams& params, const CriticGrads& grads, AdamState& state,
                      const TrainConfig& config) {
    state.step += 1;
    std::size_t slot = 0;
    auto apply = [&](auto& param, const auto& grad) {
        Eigen::Map<Vec> p(param.data(), param.size());
        Eigen::Map<const Vec> g(grad.data(), grad.size());
        Vec gv = g;
        Vec pv = p;
        adam_step(pv, gv, state.m[slot], state.v[slot], state.step, config.lr_critic,
                  config.adam_beta1, config.adam_beta2, config.adam_eps);
        p = pv;
        ++slot;
    };
    apply(params.w1, grads.w1);
    apply(params.b1, grads.b1);
    apply(params.w2, grads.w2);
    apply(params.b2, grads.b2);
    apply(params.w3, grads.w3);
    apply(params.b3, grads.b3);
}

Mat batch_forward_scaled(const GeneratorEnsemble& ensemble, const std::vector<NoiseVector>& noise) {
    Mat fake(static_cast<Index>(noise.size()), ensemble.feature_count());
    parallel_for(static_cast<Index>(noise.size()), [&](Index i) {
        const Vec m = forward(ensemble, noise[static_cast<std::size_t>(i)]);
        fake.row(i) = ((m.array() + 1.0) / 2.0).transpose();
    });
    return fake;
}

void accumulate(CriticGrads& into, const CriticGrads& add) {
    into.w1 += add.w1;
    into.b1 += add.b1;
    into.w2 += add.w2;
    into.b2 += add.b2;
    into.w3 += add.w3;
    into.b3 += add.b3;
}

}  // namespace

void TrainConfig::validate() const {
    if (epochs < 0) throw ArgumentError("epochs must be >= 0");
    if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
    if (!(lr_generator > 0.0) || !(lr_critic > 0.0)) {
        throw ArgumentError("learning rates must be positive");
    }
    if (!(adam_beta1 > 0.0 && adam_beta1 < adam_beta2 && adam_beta2 < 1.0)) {
        throw ArgumentError("need 0 < beta1 < beta2 < 1");
    }
    if (!(adam_eps > 0.0)) throw ArgumentError("adam_eps must be positive");
    if (!(clip_c > 0.0)) throw ArgumentError("clip_c must be positive");
    if (critic_steps_per_gen_step < 1) throw ArgumentError("critic_steps_per_gen_step must be >= 1");
}

AdamState AdamState::for_sizes(const std::vector<Index>& sizes) {
    AdamState state;
    state.m.reserve(sizes.size());
    state.v.reserve(sizes.size());
    for (Index size : sizes) {
        state.m.push_back(Vec::Zero(size));
        state.v.push_back(Vec::Zero(size));
    }
    return state;
}

double critic_loss(const Vec& real_scores, const Vec& fake_scores) {
    if (real_scores.size() == 0 || fake_scores.size() == 0) {
        throw ArgumentError("critic_loss needs nonempty score batches");
    }
    return -real_scores.mean() + fake_scores.mean();
}

double generator_loss(const Vec& fake_scores) {
    if (fake_scores.size() == 0) throw ArgumentError("generator_loss needs a nonempty batch");
    return -fake_scores.mean();
}

std::pair<double, double> bce_losses(const Vec& real_probs, const Vec& fake_probs) {
    if (real_probs.size() == 0 || fake_probs.size() == 0) {
        throw ArgumentError("bce_losses needs nonempty batches");
    }
    auto clamp = [](const Vec& p) {
        return p.cwiseMax(kProbFloor).cwiseMin(1.0 - kProbFloor);
    };
    const Vec real = clamp(real_probs);
    const Vec fake = clamp(fake_probs);
    const double critic = -real.array().log().mean() - (1.0 - fake.array()).log().mean();
    const double generator = -fake.array().log().mean();
    return {critic, generator};
}

void adam_step(Vec& params, const Vec& grads, Vec& m, Vec& v, long step, double lr,
               double beta1, double beta2, double eps) {
    if (params.size() != grads.size() || params.size() != m.size() ||
        params.size() != v.size()) {
        throw ShapeError("adam_step tensor sizes disagree");
    }
    if (step < 1) throw ArgumentError("adam step counter must be >= 1");
    m = beta1 * m + (1.0 - beta1) * grads;
    v = beta2 * v + (1.0 - beta2) * grads.cwiseProduct(grads);
    const double bias1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double bias2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    params.array() -=
        lr * (m.array() / bias1) / ((v.array() / bias2).sqrt() + eps);
}

std::pair<double, Vec> generator_loss_and_grad(const GeneratorEnsemble& ensemble,
                                               const CriticParams& critic,
                                               const std::vector<NoiseVector>& noise,
                                               LossMode mode) {
    const auto batch = static_cast<Index>(noise.size());
    if (batch == 0) throw ArgumentError("generator update needs a nonempty noise batch");

    // Per-sample Jacobians fill independent slots; safe to parallelize.
    std::vector<Mat> jacobians(noise.size());
    Mat fake(batch, ensemble.feature_count());
    parallel_for(batch, [&](Index i) {
        const auto& z = noise[static_cast<std::size_t>(i)];
        const Vec m = forward(ensemble, z);
        fake.row(i) = ((m.array() + 1.0) / 2.0).transpose();
        jacobians[static_cast<std::size_t>(i)] = parameter_shift_jacobian(ensemble, z);
    });

    const Vec scores = critic_forward(critic, fake);
    double loss = 0.0;
    Vec upstream(batch);
    if (mode == LossMode::Wasserstein) {
        loss = generator_loss(scores);
        upstream.setConstant(-1.0 / static_cast<double>(batch));
    } else {
        const Vec probs = scores.cwiseMax(kProbFloor).cwiseMin(1.0 - kProbFloor);
        loss = -probs.array().log().mean();
        upstream = (-1.0 / static_cast<double>(batch)) * probs.cwiseInverse();
    }

    const Mat feature_grads = critic_backward(critic, fake, upstream).input_grads;
    Vec grad = Vec::Zero(generator_param_count(ensemble));
    for (Index i = 0; i < batch; ++i) {
        // d feature / d m = 1/2 from the (m + 1) / 2 map.
        grad += jacobians[static_cast<std::size_t>(i)].transpose() *
                (feature_grads.row(i).transpose() * 0.5);
    }
    return {loss, grad};
}

StepRecord train_step(const Mat& real_batch, GeneratorEnsemble& ensemble, CriticParams& critic,
                      const TrainConfig& config, AdamState& gen_opt, AdamState& critic_opt,
                      Rng& rng) {
    if (real_batch.rows() == 0) throw ArgumentError("train_step needs a nonempty real batch");
    if (real_batch.cols() != ensemble.feature_count()) {
        throw ShapeError("real batch width does not match the generator's feature count");
    }
    const Index batch = real_batch.rows();
    const double inv_batch = 1.0 / static_cast<double>(batch);

    StepRecord record;
    for (int t = 0; t < config.critic_steps_per_gen_step; ++t) {
        const auto noise = sample_noise(ensemble, static_cast<int>(batch), rng);
        const Mat fake = batch_forward_scaled(ensemble, noise);
        const Vec real_scores = critic_forward(critic, real_batch);
        const Vec fake_scores = critic_forward(critic, fake);

        Vec real_upstream(batch);
        Vec fake_upstream(batch);
        double loss = 0.0;
        if (config.loss_mode == LossMode::Wasserstein) {
            loss = critic_loss(real_scores, fake_scores);
            real_upstream.setConstant(-inv_batch);
            fake_upstream.setConstant(inv_batch);
        } else {
            loss = bce_losses(real_scores, fake_scores).first;
            const Vec rp = real_scores.cwiseMax(kProbFloor).cwiseMin(1.0 - kProbFloor);
            const Vec fp = fake_scores.cwiseMax(kProbFloor).cwiseMin(1.0 - kProbFloor);
            real_upstream = -inv_batch * rp.cwiseInverse();
            fake_upstream = inv_batch * (1.0 - fp.array()).inverse();
        }
        check_finite_loss(loss, "critic", ensemble, critic);

        CriticGrads grads = critic_backward(critic, real_batch, real_upstream).grads;
        accumulate(grads, critic_backward(critic, fake, fake_upstream).grads);
        adam_step_critic(critic, grads, critic_opt, config);
        if (config.loss_mode == LossMode::Wasserstein) clip_weights(critic, config.clip_c);

        record.critic_loss += loss / config.critic_steps_per_gen_step;
    }

    const auto gen_noise = sample_noise(ensemble, static_cast<int>(batch), rng);
    auto [gen_loss, gen_grad] = generator_loss_and_grad(ensemble, critic, gen_noise,
                                                        config.loss_mode);
    check_finite_loss(gen_loss, "generator", ensemble, critic);

    Vec params = flatten_params(ensemble);
    gen_opt.step += 1;
    adam_step(params, gen_grad, gen_opt.m[0], gen_opt.v[0], gen_opt.step, config.lr_generator,
              config.adam_beta1, config.adam_beta2, config.adam_eps);
    set_params(ensemble, params);

    record.generator_loss = gen_loss;
    return record;
}

std::vector<EpochRecord> train(const Mat& real_scaled, GeneratorEnsemble& ensemble,
                               CriticParams& critic, const TrainConfig& config,
                               AdamState& gen_opt, AdamState& critic_opt, Rng& rng,
                               int eval_samples, int start_epoch,
                               const std::function<void(const EpochRecord&)>& on_epoch) {
    config.validate();
    if (real_scaled.rows() == 0) throw DataError("training dataset is empty");
    if (real_scaled.cols() != ensemble.feature_count()) {
        throw ShapeError("real feature width does not match the generator");
    }

    std::vector<EpochRecord> records;
    std::vector<Index> order(static_cast<std::size_t>(real_scaled.rows()));
    std::iota(order.begin(), order.end(), Index{0});

    for (int epoch = start_epoch; epoch < config.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        rng.shuffle(order);

        EpochRecord record;
        record.epoch = epoch + 1;
        int steps = 0;
        for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(config.batch_size)) {
            const auto count = std::min<std::size_t>(config.batch_size, order.size() - at);
            Mat batch(static_cast<Index>(count), real_scaled.cols());
            for (std::size_t r = 0; r < count; ++r) batch.row(static_cast<Index>(r)) = real_scaled.row(order[at + r]);

            const StepRecord step = train_step(batch, ensemble, critic, config, gen_opt,
                                               critic_opt, rng);
            record.critic_loss += step.critic_loss;
            record.generator_loss += step.generator_loss;
            ++steps;
        }
        if (steps > 0) {
            record.critic_loss /= steps;
            record.generator_loss /= steps;
        }

        Rng eval_rng = Rng::derive(config.seed, 0xe5a1ULL + static_cast<std::uint64_t>(epoch));
        record.frechet = generated_vs_real_frechet(ensemble, real_scaled, eval_samples, eval_rng);
        record.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        records.push_back(record);
        if (on_epoch) on_epoch(record);
    }
    return records;
}

AdamState make_generator_opt_state(const GeneratorEnsemble& ensemble) {
    return AdamState::for_sizes({static_cast<Index>(generator_param_count(ensemble))});
}

AdamState make_critic_opt_state(const CriticParams& critic) {
    std::vector<Index> sizes;
    for_each_critic_tensor(critic, [&](const auto& tensor) { sizes.push_back(tensor.size()); });
    return AdamState::for_sizes(sizes);
}

BaselineGeneratorParams BaselineGeneratorParams::zeros(int latent, int hidden, int out) {
    BaselineGeneratorParams p;
    p.w1 = Mat::Zero(hidden, latent);
    p.b1 = Vec::Zero(hidden);
    p.w2 = Mat::Zero(out, hidden);
    p.b2 = Vec::Zero(out);
    return p;
}

BaselineGeneratorParams BaselineGeneratorParams::init(Rng& rng, int latent, int hidden,
                                                      int out) {
    BaselineGeneratorParams p = zeros(latent, hidden, out);
    auto fill = [&](auto& tensor) {
        for (Index i = 0; i < tensor.size(); ++i) tensor.data()[i] = rng.uniform(-0.1, 0.1);
    };
    fill(p.w1);
    fill(p.b1);
    fill(p.w2);
    fill(p.b2);
    return p;
}

Mat baseline_forward(const BaselineGeneratorParams& params, const Mat& latent) {
    if (latent.cols() != params.w1.cols()) {
        throw ShapeError("baseline latent width must be " + std::to_string(params.w1.cols()));
    }
    Mat z1 = (latent * params.w1.transpose()).rowwise() + params.b1.transpose();
    // LeakyReLU, slope 0.2
    Mat a1 = z1.cwiseMax(0.0) + 0.2 * z1.cwiseMin(0.0);
    Mat z2 = (a1 * params.w2.transpose()).rowwise() + params.b2.transpose();
    return z2.array().tanh();
}

long baseline_param_count(const BaselineGeneratorParams& params) {
    return static_cast<long>(params.w1.size() + params.b1.size() + params.w2.size() +
                             params.b2.size());
}

}  // namespace qigl
