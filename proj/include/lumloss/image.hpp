#ifndef LUMLOSS_IMAGE_HPP
#define LUMLOSS_IMAGE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace lumloss {

/**
 * Dense H x W x C feature map, row-major with interleaved channels:
 * element (y, x, c) lives at ((y * width) + x) * channels + c.
 *
 * Used directly for network activations (any channel count). Pixel data
 * goes through Image, which restricts channels to 1 or 3.
 */
class Tensor {
public:
    Tensor() = default;

    Tensor(std::size_t height, std::size_t width, std::size_t channels, double fill = 0.0)
        : height_(height), width_(width), channels_(channels), data_(height * width * channels, fill) {
        if (height == 0 || width == 0 || channels == 0) {
            throw InvalidInput("tensor dimensions must be positive, got " + shape_string(height, width, channels));
        }
    }

    Tensor(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> data)
        : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
        if (height == 0 || width == 0 || channels == 0) {
            throw InvalidInput("tensor dimensions must be positive, got " + shape_string(height, width, channels));
        }
        if (data_.size() != height * width * channels) {
            throw InvalidInput("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                               shape_string(height, width, channels));
        }
        for (double v : data_) {
            if (!std::isfinite(v)) {
                throw InvalidInput("tensor data contains a non-finite value");
            }
        }
    }

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t channels() const { return channels_; }
    std::size_t pixels() const { return height_ * width_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(std::size_t y, std::size_t x, std::size_t c) { return data_[(y * width_ + x) * channels_ + c]; }
    double at(std::size_t y, std::size_t x, std::size_t c) const { return data_[(y * width_ + x) * channels_ + c]; }

    bool same_shape(const Tensor& other) const {
        return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
    }

    std::string shape() const { return shape_string(height_, width_, channels_); }

    friend bool operator==(const Tensor&, const Tensor&) = default;

    static std::string shape_string(std::size_t h, std::size_t w, std::size_t c) {
        return std::to_string(h) + "x" + std::to_string(w) + "x" + std::to_string(c);
    }

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::size_t channels_ = 0;
    std::vector<double> data_;
};

/// A Tensor with 1 (grayscale) or 3 (RGB) channels, nominal range [0,1].
class Image : public Tensor {
public:
    Image() = default;

    Image(std::size_t height, std::size_t width, std::size_t channels, double fill = 0.0)
        : Tensor(height, width, channels, fill) {
        check_channels();
    }

    Image(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> data)
        : Tensor(height, width, channels, std::move(data)) {
        check_channels();
    }

    explicit Image(Tensor t) : Tensor(std::move(t)) { check_channels(); }

    friend bool operator==(const Image&, const Image&) = default;

private:
    void check_channels() const {
        if (channels() != 1 && channels() != 3) {
            throw InvalidInput("image must have 1 or 3 channels, got " + std::to_string(channels()));
        }
    }
};

/// Grayscale projection coefficients applied to (R, G, B).
struct LuminanceWeights {
    std::array<double, 3> w{0.2989, 0.5870, 0.1140};

    LuminanceWeights() = default;
    LuminanceWeights(double r, double g, double b) : w{r, g, b} {
        if (r < 0.0 || g < 0.0 || b < 0.0) {
            throw InvalidInput("luminance weights must be nonnegative");
        }
    }

    double dot(double r, double g, double b) const { return w[0] * r + w[1] * g + w[2] * b; }
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b)) {
        throw InvalidInput(std::string(what) + ": shape mismatch " + a.shape() + " vs " + b.shape());
    }
}

inline void require_channels(const Tensor& t, std::size_t channels, const char* what) {
    if (t.channels() != channels) {
        throw InvalidInput(std::string(what) + ": expected " + std::to_string(channels) + " channels, got " +
                           std::to_string(t.channels()));
    }
}

/// Per-pixel dot product with the luminance weights. Not renormalized:
/// the weights sum to 0.9999, so white maps to 0.9999.
inline Image to_grayscale(const Image& img, const LuminanceWeights& w = {}) {
    require_channels(img, 3, "to_grayscale");
    Image out(img.height(), img.width(), 1);
    auto src = img.data();
    auto dst = out.data();
    for (std::size_t p = 0; p < out.size(); ++p) {
        dst[p] = w.dot(src[3 * p], src[3 * p + 1], src[3 * p + 2]);
    }
    return out;
}

/// Adjoint of to_grayscale: spreads a 1-channel gradient back onto RGB.
inline Image grayscale_backward(const Image& grad_out, const LuminanceWeights& w = {}) {
    require_channels(grad_out, 1, "grayscale_backward");
    Image out(grad_out.height(), grad_out.width(), 3);
    auto src = grad_out.data();
    auto dst = out.data();
    for (std::size_t p = 0; p < src.size(); ++p) {
        dst[3 * p] = src[p] * w.w[0];
        dst[3 * p + 1] = src[p] * w.w[1];
        dst[3 * p + 2] = src[p] * w.w[2];
    }
    return out;
}

inline Image clamp01(Image img) {
    for (double& v : img.data()) {
        v = std::clamp(v, 0.0, 1.0);
    }
    return img;
}

inline double dot(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

}

#endif
