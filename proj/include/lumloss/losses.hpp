#ifndef LUMLOSS_LOSSES_HPP
#define LUMLOSS_LOSSES_HPP

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "errors.hpp"
#include "image.hpp"

namespace lumloss {

/// A scalar loss and its gradient with respect to the prediction.
struct LossOutput {
    double value = 0.0;
    Image grad;
};

enum class LossKind { L1, L2, LuminanceL1 };
enum class PixelBase { L1, L2 };

struct LossSpec {
    LossKind kind = LossKind::L1;
    double lambda = 1.0;
    PixelBase pixel_base = PixelBase::L1;
    LuminanceWeights weights{};

    static LossSpec l1() { return {}; }
    static LossSpec l2() { return {LossKind::L2}; }
    static LossSpec luminance_l1(double lambda = 1.0, PixelBase base = PixelBase::L1) {
        return {LossKind::LuminanceL1, lambda, base};
    }

    void validate() const {
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
            throw InvalidInput("loss lambda must be a finite value >= 0");
        }
    }

    /// Column label used in reports: l1, l2, luml1, or luml1-lam<λ>[-l2].
    std::string label() const {
        switch (kind) {
        case LossKind::L1: return "l1";
        case LossKind::L2: return "l2";
        case LossKind::LuminanceL1: break;
        }
        std::string s = "luml1";
        if (lambda != 1.0) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "-lam%g", lambda);
            s += buf;
        }
        if (pixel_base == PixelBase::L2) {
            s += "-l2";
        }
        return s;
    }
};

inline std::string_view to_string(LossKind k) {
    switch (k) {
    case LossKind::L1: return "l1";
    case LossKind::L2: return "l2";
    case LossKind::LuminanceL1: return "luml1";
    }
    return "?";
}

inline std::string_view to_string(PixelBase b) { return b == PixelBase::L1 ? "l1" : "l2"; }

inline LossKind parse_loss_kind(std::string_view s) {
    if (s == "l1") return LossKind::L1;
    if (s == "l2") return LossKind::L2;
    if (s == "luml1") return LossKind::LuminanceL1;
    throw InvalidInput("unknown loss '" + std::string(s) + "' (expected l1, l2 or luml1)");
}

inline PixelBase parse_pixel_base(std::string_view s) {
    if (s == "l1") return PixelBase::L1;
    if (s == "l2") return PixelBase::L2;
    throw InvalidInput("unknown pixel_base '" + std::string(s) + "' (expected l1 or l2)");
}

namespace detail {

inline double sign(double d) { return d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0); }

}

/// Mean absolute error. Subgradient uses sign(0) = 0.
inline LossOutput l1_loss(const Image& pred, const Image& target) {
    require_same_shape(pred, target, "l1_loss");
    const double n = static_cast<double>(pred.size());
    LossOutput out{0.0, Image(pred.height(), pred.width(), pred.channels())};
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        sum += std::abs(d);
        out.grad[i] = detail::sign(d) / n;
    }
    out.value = sum / n;
    return out;
}

/// Mean squared error.
inline LossOutput l2_loss(const Image& pred, const Image& target) {
    require_same_shape(pred, target, "l2_loss");
    const double n = static_cast<double>(pred.size());
    LossOutput out{0.0, Image(pred.height(), pred.width(), pred.channels())};
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        sum += d * d;
        out.grad[i] = 2.0 * d / n;
    }
    out.value = sum / n;
    return out;
}

/**
 * Mean absolute difference between the luminance projections of two RGB
 * images, averaged over the H*W grayscale pixels. The gradient is pushed
 * back onto the RGB channels through grayscale_backward.
 */
inline LossOutput luminance_term(const Image& pred, const Image& target, const LuminanceWeights& w = {}) {
    require_same_shape(pred, target, "luminance_term");
    require_channels(pred, 3, "luminance_term");
    const Image gp = to_grayscale(pred, w);
    const Image gt = to_grayscale(target, w);
    const double m = static_cast<double>(gp.size());
    Image grad_gray(gp.height(), gp.width(), 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < gp.size(); ++i) {
        const double d = gp[i] - gt[i];
        sum += std::abs(d);
        grad_gray[i] = detail::sign(d) / m;
    }
    return {sum / m, grayscale_backward(grad_gray, w)};
}

/// pixel_base(pred, target) + lambda * luminance_term(pred, target).
inline LossOutput luminance_l1_loss(const Image& pred, const Image& target, const LossSpec& spec) {
    if (spec.kind != LossKind::LuminanceL1) {
        throw InvalidInput("luminance_l1_loss called with a non-luminance loss spec");
    }
    spec.validate();
    require_same_shape(pred, target, "luminance_l1_loss");
    require_channels(pred, 3, "luminance_l1_loss");
    LossOutput out = spec.pixel_base == PixelBase::L1 ? l1_loss(pred, target) : l2_loss(pred, target);
    if (spec.lambda == 0.0) {
        return out;
    }
    const LossOutput lum = luminance_term(pred, target, spec.weights);
    out.value += spec.lambda * lum.value;
    for (std::size_t i = 0; i < out.grad.size(); ++i) {
        out.grad[i] += spec.lambda * lum.grad[i];
    }
    return out;
}

inline LossOutput eval_loss(const LossSpec& spec, const Image& pred, const Image& target) {
    spec.validate();
    switch (spec.kind) {
    case LossKind::L1: return l1_loss(pred, target);
    case LossKind::L2: return l2_loss(pred, target);
    case LossKind::LuminanceL1: return luminance_l1_loss(pred, target, spec);
    }
    throw InvalidInput("unknown loss kind");
}

}

#endif
