#ifndef LUMLOSS_TRAINER_HPP
#define LUMLOSS_TRAINER_HPP

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "checkpoint.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "losses.hpp"
#include "metrics.hpp"
#include "rng.hpp"
#include "tinynet.hpp"

namespace lumloss {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void validate() const {
        if (!(lr > 0.0)) throw InvalidInput("adam lr must be positive");
        if (!(beta1 > 0.0 && beta1 < 1.0)) throw InvalidInput("adam beta1 must lie in (0, 1)");
        if (!(beta2 > 0.0 && beta2 < 1.0)) throw InvalidInput("adam beta2 must lie in (0, 1)");
        if (!(eps > 0.0)) throw InvalidInput("adam eps must be positive");
    }
};

/// First and second moment estimates for one parameter tensor.
struct AdamMoments {
    std::vector<double> m;
    std::vector<double> v;

    explicit AdamMoments(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/**
 * One bias-corrected Adam update of `params` in place. `step` is the
 * 1-based update count. A non-finite gradient aborts before anything is
 * modified, naming the tensor.
 */
inline void adam_step(std::span<double> params, std::span<const double> grads, AdamMoments& state, std::uint64_t step,
                      const AdamConfig& cfg, const std::string& name = "parameters") {
    if (params.size() != grads.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
        throw InvalidInput("adam_step: size mismatch for " + name);
    }
    if (step == 0) {
        throw InvalidInput("adam_step: step count is 1-based");
    }
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!std::isfinite(grads[i])) {
            throw NumericalError("non-finite gradient in " + name + " at element " + std::to_string(i));
        }
    }
    const double t = static_cast<double>(step);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = state.m[i] / c1;
        const double v_hat = state.v[i] / c2;
        params[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
}

/// Adam state for every tensor of a TinyNet.
struct NetAdamState {
    std::uint64_t step = 0;
    std::vector<AdamMoments> kernels;
    std::vector<AdamMoments> bias;

    explicit NetAdamState(const TinyNet& net) {
        for (const auto& l : net.layers) {
            kernels.emplace_back(l.kernels.size());
            bias.emplace_back(l.bias.size());
        }
    }
};

inline void adam_step(TinyNet& net, const GradTape& grads, NetAdamState& state, const AdamConfig& cfg) {
    if (grads.layers.size() != net.layers.size() || state.kernels.size() != net.layers.size()) {
        throw InvalidInput("adam_step: gradient tape does not match the network");
    }
    ++state.step;
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        const std::string name = "layer " + std::to_string(li);
        adam_step(net.layers[li].kernels, grads.layers[li].kernels, state.kernels[li], state.step, cfg, name + " kernels");
        adam_step(net.layers[li].bias, grads.layers[li].bias, state.bias[li], state.step, cfg, name + " bias");
    }
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        for (double v : net.layers[li].kernels) {
            if (!std::isfinite(v)) throw NumericalError("non-finite parameter in layer " + std::to_string(li) + " after update");
        }
    }
}

struct TrainConfig {
    LossSpec loss{};
    std::size_t steps = 1200;
    std::size_t batch_size = 8;
    AdamConfig adam{};
    std::uint64_t seed = 1;
    double sigma_max = 25.0;
    std::size_t patch_size = 24;
    std::size_t train_count = 64;
    std::size_t train_height = 40;
    std::size_t train_width = 40;
    NetShape net{};
    std::size_t checkpoint_every = 0;
    std::size_t val_every = 0;
    std::size_t val_count = 4;
    double val_sigma = 15.0;

    void validate() const {
        loss.validate();
        adam.validate();
        if (batch_size == 0) throw InvalidInput("batch_size must be positive");
        if (!(sigma_max >= 0.0)) throw InvalidInput("sigma_max must be >= 0");
        if (train_count == 0) throw InvalidInput("train_count must be positive");
        if (patch_size == 0 || patch_size > std::min(train_height, train_width)) {
            throw InvalidInput("patch_size must be positive and fit inside the training images");
        }
    }

    BlindTrainSpec blind() const {
        return {sigma_max, patch_size, steps * batch_size, mix_seed(train_seed(seed), 1)};
    }

    std::uint64_t corpus_seed() const { return mix_seed(train_seed(seed), 0); }
    std::uint64_t init_seed() const { return mix_seed(train_seed(seed), 2); }
    std::uint64_t validation_seed() const { return mix_seed(eval_seed(seed), 0); }
};

/// A freshly initialized network for cfg; identical for every loss variant.
inline TinyNet initial_net(const TrainConfig& cfg) {
    TinyNet net = make_tinynet(cfg.net);
    init_tinynet(net, cfg.init_seed());
    return net;
}

struct StepRecord {
    std::size_t step = 0;
    double loss = 0.0;
    double ms = 0.0;
    std::optional<double> val_psnr;
    std::optional<double> val_ssim;
};

struct TrainLog {
    std::vector<StepRecord> steps;

    /// step,loss,ms,val_psnr,val_ssim; validation fields empty when absent.
    std::string to_csv() const {
        std::ostringstream os;
        os << "step,loss,ms,val_psnr,val_ssim\n";
        char buf[160];
        for (const auto& r : steps) {
            std::snprintf(buf, sizeof buf, "%zu,%.8f,%.3f,", r.step, r.loss, r.ms);
            os << buf;
            if (r.val_psnr) {
                std::snprintf(buf, sizeof buf, "%.4f,%.4f", *r.val_psnr, *r.val_ssim);
                os << buf;
            } else {
                os << ",";
            }
            os << "\n";
        }
        return os.str();
    }
};

struct TrainHooks {
    std::filesystem::path checkpoint_path;
    std::string checkpoint_label;
    std::function<void(const StepRecord&)> on_step;
};

struct TrainResult {
    TinyNet net;
    TrainLog log;
};

namespace detail {

inline void write_checkpoint_atomically(const TinyNet& net, const std::filesystem::path& path, const std::string& label) {
    auto tmp = path;
    tmp += ".tmp";
    save_checkpoint(net, tmp, label);
    std::filesystem::rename(tmp, path);
}

struct ValidationSet {
    std::vector<Image> clean;
    std::vector<Image> noisy;
};

inline ValidationSet make_validation_set(const TrainConfig& cfg) {
    ValidationSet v;
    v.clean = gen_clean(cfg.validation_seed(), cfg.val_count, cfg.train_height, cfg.train_width);
    for (std::size_t i = 0; i < v.clean.size(); ++i) {
        v.noisy.push_back(add_noise(v.clean[i], {cfg.val_sigma, mix_seed(cfg.validation_seed(), 1000 + i)}));
    }
    return v;
}

}

/**
 * Minimizes cfg.loss between net(noisy patch) and the clean patch over
 * cfg.steps Adam updates, each on cfg.batch_size blind pairs. Per-item
 * gradients are summed in item order, so the run is fully determined by
 * (net, cfg). A NaN loss throws NumericalError; the last checkpoint on disk
 * is left untouched.
 */
inline TrainResult train(TinyNet net, const TrainConfig& cfg, const TrainHooks& hooks = {}) {
    cfg.validate();
    net.validate();
    TrainResult result{std::move(net), {}};
    if (cfg.steps == 0) {
        return result;
    }
    TinyNet& model = result.net;
    auto stream = make_blind_batches(gen_clean(cfg.corpus_seed(), cfg.train_count, cfg.train_height, cfg.train_width),
                                     cfg.blind());
    const std::optional<detail::ValidationSet> val =
        cfg.val_every > 0 && cfg.val_count > 0 ? std::optional(detail::make_validation_set(cfg)) : std::nullopt;
    NetAdamState adam(model);
    const auto t0 = std::chrono::steady_clock::now();
    const double inv_batch = 1.0 / static_cast<double>(cfg.batch_size);

    for (std::size_t step = 1; step <= cfg.steps; ++step) {
        GradTape total = GradTape::zeros_like(model);
        double loss_sum = 0.0;
        for (std::size_t b = 0; b < cfg.batch_size; ++b) {
            auto pair = stream.next();
            NetOutput fwd = net_forward(model, pair->noisy);
            LossOutput loss = eval_loss(cfg.loss, fwd.denoised, pair->clean);
            if (!std::isfinite(loss.value)) {
                throw NumericalError("non-finite loss at step " + std::to_string(step));
            }
            loss_sum += loss.value;
            total.accumulate(net_backward(model, fwd.cache, loss.grad));
        }
        for (auto& l : total.layers) {
            for (double& g : l.kernels) g *= inv_batch;
            for (double& g : l.bias) g *= inv_batch;
        }
        adam_step(model, total, adam, cfg.adam);

        StepRecord rec;
        rec.step = step;
        rec.loss = loss_sum * inv_batch;
        rec.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        if (val && (step % cfg.val_every == 0 || step == cfg.steps)) {
            double p = 0.0, s = 0.0;
            for (std::size_t i = 0; i < val->clean.size(); ++i) {
                const Image out = clamp01(denoise(model, val->noisy[i]));
                p += psnr(out, val->clean[i]);
                s += ssim(out, val->clean[i]);
            }
            rec.val_psnr = p / static_cast<double>(val->clean.size());
            rec.val_ssim = s / static_cast<double>(val->clean.size());
        }
        result.log.steps.push_back(rec);
        if (hooks.on_step) hooks.on_step(rec);
        if (!hooks.checkpoint_path.empty() && cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0) {
            detail::write_checkpoint_atomically(model, hooks.checkpoint_path, hooks.checkpoint_label);
        }
    }
    if (!hooks.checkpoint_path.empty()) {
        detail::write_checkpoint_atomically(model, hooks.checkpoint_path, hooks.checkpoint_label);
    }
    return result;
}

/// Plain gradient descent on the pixels of a copy of `init`.
inline Image optimize_pixels(const Image& init, const Image& target, const LossSpec& loss, std::size_t steps, double lr) {
    require_same_shape(init, target, "optimize_pixels");
    Image x = init;
    for (std::size_t s = 0; s < steps; ++s) {
        const LossOutput out = eval_loss(loss, x, target);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] -= lr * out.grad[i];
        }
    }
    return x;
}

}

#endif
