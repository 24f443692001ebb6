#ifndef LUMLOSS_GRADCHECK_HPP
#define LUMLOSS_GRADCHECK_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "image.hpp"
#include "losses.hpp"
#include "rng.hpp"
#include "tinynet.hpp"

// Central finite-difference checks of analytic gradients.
//
// Relative error is |analytic - numeric| / max(|analytic|, |numeric|, 1e-6).
// Elements where a perturbation could cross a non-differentiable point
// (L1 kinks, ReLU hinges) are skipped and counted.

namespace lumloss {

struct GradCheckStats {
    std::size_t checked = 0;
    std::size_t skipped = 0;
    std::size_t failures = 0;
    double max_rel_error = 0.0;

    bool ok() const { return failures == 0 && checked > 0; }

    void merge(const GradCheckStats& o) {
        checked += o.checked;
        skipped += o.skipped;
        failures += o.failures;
        max_rel_error = std::max(max_rel_error, o.max_rel_error);
    }
};

inline double grad_rel_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

using LossFn = std::function<LossOutput(const Image&, const Image&)>;
using KinkFn = std::function<bool(const Image& pred, const Image& target, std::size_t element)>;

inline constexpr double kFiniteDiffStep = 1e-5;
inline constexpr double kKinkMargin = 1e-3;

/// Checks d(loss)/d(pred) element by element.
inline GradCheckStats check_loss_gradient(const LossFn& loss, const Image& pred, const Image& target, double tol,
                                          const KinkFn& near_kink = {}, double step = kFiniteDiffStep) {
    GradCheckStats st;
    const Image analytic = loss(pred, target).grad;
    Image probe = pred;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (near_kink && near_kink(pred, target, i)) {
            ++st.skipped;
            continue;
        }
        probe[i] = pred[i] + step;
        const double up = loss(probe, target).value;
        probe[i] = pred[i] - step;
        const double down = loss(probe, target).value;
        probe[i] = pred[i];
        const double err = grad_rel_error(analytic[i], (up - down) / (2.0 * step));
        ++st.checked;
        st.max_rel_error = std::max(st.max_rel_error, err);
        if (!(err < tol)) ++st.failures;
    }
    return st;
}

inline bool near_pixel_kink(const Image& pred, const Image& target, std::size_t i) {
    return std::abs(pred[i] - target[i]) <= kKinkMargin;
}

inline bool near_luminance_kink(const Image& pred, const Image& target, std::size_t i, const LuminanceWeights& w = {}) {
    const std::size_t p = i / 3;
    const double gp = w.dot(pred[3 * p], pred[3 * p + 1], pred[3 * p + 2]);
    const double gt = w.dot(target[3 * p], target[3 * p + 1], target[3 * p + 2]);
    return std::abs(gp - gt) <= kKinkMargin;
}

/// Kink predicate matching the non-smooth parts of a LossSpec.
inline KinkFn kinks_for(const LossSpec& spec) {
    return [spec](const Image& p, const Image& t, std::size_t i) {
        switch (spec.kind) {
        case LossKind::L2: return false;
        case LossKind::L1: return near_pixel_kink(p, t, i);
        case LossKind::LuminanceL1:
            return (spec.pixel_base == PixelBase::L1 && near_pixel_kink(p, t, i)) ||
                   (spec.lambda != 0.0 && near_luminance_kink(p, t, i, spec.weights));
        }
        return false;
    };
}

namespace detail {

// Sign pattern of every non-smooth quantity along the forward path.
inline std::vector<signed char> kink_signature(const TinyNet& net, const Image& input, const Image& target,
                                               const LossSpec& spec) {
    const NetOutput out = net_forward(net, input);
    std::vector<signed char> sig;
    for (const auto& z : out.cache.preacts) {
        for (double v : z.data()) sig.push_back(v > 0.0 ? 1 : 0);
    }
    auto sgn = [](double d) -> signed char { return d > 0.0 ? 1 : (d < 0.0 ? -1 : 0); };
    for (std::size_t i = 0; i < target.size(); ++i) sig.push_back(sgn(out.denoised[i] - target[i]));
    if (spec.kind == LossKind::LuminanceL1) {
        const Image gp = to_grayscale(out.denoised, spec.weights);
        const Image gt = to_grayscale(target, spec.weights);
        for (std::size_t i = 0; i < gp.size(); ++i) sig.push_back(sgn(gp[i] - gt[i]));
    }
    return sig;
}

}

/**
 * End-to-end check of net_backward: every kernel weight and bias is
 * perturbed by +-step and the loss of net(input) against target is
 * differenced. A parameter is skipped when the perturbation flips any
 * ReLU or L1 sign, since the central difference then straddles a kink.
 */
inline GradCheckStats check_net_gradient(TinyNet net, const Image& input, const Image& target, const LossSpec& spec,
                                         double tol, double step = kFiniteDiffStep) {
    GradCheckStats st;
    const NetOutput fwd = net_forward(net, input);
    const GradTape tape = net_backward(net, fwd.cache, eval_loss(spec, fwd.denoised, target).grad);
    const auto base_sig = detail::kink_signature(net, input, target, spec);
    auto loss_at = [&]() { return eval_loss(spec, net_forward(net, input).denoised, target).value; };

    auto probe = [&](double& param, double analytic) {
        const double orig = param;
        param = orig + step;
        const double up = loss_at();
        const bool up_same = detail::kink_signature(net, input, target, spec) == base_sig;
        param = orig - step;
        const double down = loss_at();
        const bool down_same = detail::kink_signature(net, input, target, spec) == base_sig;
        param = orig;
        if (!up_same || !down_same) {
            ++st.skipped;
            return;
        }
        const double err = grad_rel_error(analytic, (up - down) / (2.0 * step));
        ++st.checked;
        st.max_rel_error = std::max(st.max_rel_error, err);
        if (!(err < tol)) ++st.failures;
    };
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        for (std::size_t i = 0; i < net.layers[li].kernels.size(); ++i) probe(net.layers[li].kernels[i], tape.layers[li].kernels[i]);
        for (std::size_t i = 0; i < net.layers[li].bias.size(); ++i) probe(net.layers[li].bias[i], tape.layers[li].bias[i]);
    }
    return st;
}

inline Image random_image(Rng& rng, std::size_t h, std::size_t w, std::size_t c, double lo = 0.0, double hi = 1.0) {
    Image img(h, w, c);
    for (double& v : img.data()) v = rng.uniform(lo, hi);
    return img;
}

inline std::string format_lambda(double lambda) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", lambda);
    return buf;
}

struct SuiteEntry {
    std::string name;
    double tolerance = 0.0;
    GradCheckStats stats;
    double ms = 0.0;
};

/// Loss gradients on 10 random 8x8x3 pairs per loss.
inline std::vector<SuiteEntry> run_loss_gradient_suite(std::uint64_t seed, std::size_t pairs = 10) {
    struct Case {
        std::string name;
        LossFn fn;
        KinkFn kinks;
        double tol;
    };
    std::vector<Case> cases;
    cases.push_back({"l1_loss", l1_loss, kinks_for(LossSpec::l1()), 1e-4});
    cases.push_back({"l2_loss", l2_loss, kinks_for(LossSpec::l2()), 1e-6});
    cases.push_back({"luminance_term", [](const Image& p, const Image& t) { return luminance_term(p, t); },
                     [](const Image& p, const Image& t, std::size_t i) { return near_luminance_kink(p, t, i); }, 1e-4});
    for (double lambda : {0.5, 1.0, 2.0}) {
        const LossSpec spec = LossSpec::luminance_l1(lambda);
        cases.push_back({"luminance_l1_loss(lambda=" + format_lambda(lambda) + ")",
                         [spec](const Image& p, const Image& t) { return luminance_l1_loss(p, t, spec); },
                         kinks_for(spec), 1e-4});
    }
    std::vector<SuiteEntry> out;
    for (std::size_t ci = 0; ci < cases.size(); ++ci) {
        const auto t0 = std::chrono::steady_clock::now();
        SuiteEntry e{cases[ci].name, cases[ci].tol, {}, 0.0};
        Rng rng(mix_seed(seed, ci));
        for (std::size_t k = 0; k < pairs; ++k) {
            const Image pred = random_image(rng, 8, 8, 3);
            const Image target = random_image(rng, 8, 8, 3);
            e.stats.merge(check_loss_gradient(cases[ci].fn, pred, target, cases[ci].tol, cases[ci].kinks));
        }
        e.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(std::move(e));
    }
    return out;
}

/// Seeded 2-layer (3 -> 16 -> 3) net on an 8x8 input, through luminance_l1_loss.
inline SuiteEntry run_net_gradient_suite(std::uint64_t seed, double lambda = 1.0) {
    const auto t0 = std::chrono::steady_clock::now();
    TinyNet net = make_tinynet({.hidden_layers = 0, .channels = 16, .kernel = 3, .residual = true});
    init_tinynet(net, mix_seed(seed, 100), 1.0);
    Rng rng(mix_seed(seed, 101));
    for (auto& l : net.layers) {
        for (double& b : l.bias) b = rng.uniform(-0.1, 0.1);
    }
    const Image input = random_image(rng, 8, 8, 3);
    const Image target = random_image(rng, 8, 8, 3);
    SuiteEntry e{"tinynet end-to-end (luminance_l1_loss, lambda=" + format_lambda(lambda) + ")", 1e-4, {}, 0.0};
    e.stats = check_net_gradient(net, input, target, LossSpec::luminance_l1(lambda), 1e-4);
    e.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return e;
}

}

#endif
