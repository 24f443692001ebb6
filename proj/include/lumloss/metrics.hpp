#ifndef LUMLOSS_METRICS_HPP
#define LUMLOSS_METRICS_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "image.hpp"

namespace lumloss {

inline double mse(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mse");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s / static_cast<double>(a.size());
}

/// Peak signal-to-noise ratio in dB. Identical inputs give +infinity.
inline double psnr(const Tensor& a, const Tensor& b, double max_val = 1.0) {
    const double err = mse(a, b);
    if (err == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(max_val * max_val / err);
}

struct SsimParams {
    std::size_t window_size = 11;
    double gaussian_sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;

    double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
    double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }

    void validate() const {
        if (window_size < 3 || window_size % 2 == 0) {
            throw InvalidInput("ssim window size must be odd and >= 3, got " + std::to_string(window_size));
        }
        if (!(gaussian_sigma > 0.0)) {
            throw InvalidInput("ssim gaussian sigma must be positive");
        }
        if (!(c1() > 0.0) || !(c2() > 0.0)) {
            throw InvalidInput("ssim stabilizing constants must be positive");
        }
    }
};

namespace detail {

// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
inline std::vector<double> gaussian_taps(std::size_t size, double sigma) {
    std::vector<double> taps(size);
    const double center = static_cast<double>(size / 2);
    double total = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
        const double d = static_cast<double>(i) - center;
        taps[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
        total += taps[i];
    }
    for (double& t : taps) {
        t /= total;
    }
    return taps;
}

// Valid-region separable filter of a single-channel plane.
inline std::vector<double> filter_valid(const std::vector<double>& plane, std::size_t h, std::size_t w,
                                        const std::vector<double>& taps) {
    const std::size_t k = taps.size();
    const std::size_t oh = h - k + 1;
    const std::size_t ow = w - k + 1;
    std::vector<double> rows(h * ow, 0.0);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
            double s = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                s += taps[i] * plane[y * w + x + i];
            }
            rows[y * ow + x] = s;
        }
    }
    std::vector<double> out(oh * ow, 0.0);
    for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
            double s = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                s += taps[i] * rows[(y + i) * ow + x];
            }
            out[y * ow + x] = s;
        }
    }
    return out;
}

}

/**
 * Mean SSIM over every valid window position (no padding), with
 * Gaussian-weighted local means, variances and covariance.
 *
 * RGB inputs are compared on their luminance projection.
 */
inline double ssim(const Image& a, const Image& b, const SsimParams& p = {}) {
    require_same_shape(a, b, "ssim");
    p.validate();
    if (a.channels() == 3) {
        return ssim(to_grayscale(a), to_grayscale(b), p);
    }
    const std::size_t h = a.height();
    const std::size_t w = a.width();
    if (h < p.window_size || w < p.window_size) {
        throw InvalidInput("ssim: image " + a.shape() + " is smaller than the " + std::to_string(p.window_size) +
                           "x" + std::to_string(p.window_size) + " window");
    }
    const auto taps = detail::gaussian_taps(p.window_size, p.gaussian_sigma);
    std::vector<double> x(a.values());
    std::vector<double> y(b.values());
    std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    const auto mu_x = detail::filter_valid(x, h, w, taps);
    const auto mu_y = detail::filter_valid(y, h, w, taps);
    const auto e_xx = detail::filter_valid(xx, h, w, taps);
    const auto e_yy = detail::filter_valid(yy, h, w, taps);
    const auto e_xy = detail::filter_valid(xy, h, w, taps);
    const double c1 = p.c1();
    const double c2 = p.c2();
    double total = 0.0;
    for (std::size_t i = 0; i < mu_x.size(); ++i) {
        const double mxy = mu_x[i] * mu_y[i];
        const double mxx = mu_x[i] * mu_x[i];
        const double myy = mu_y[i] * mu_y[i];
        const double var_x = e_xx[i] - mxx;
        const double var_y = e_yy[i] - myy;
        const double cov = e_xy[i] - mxy;
        total += ((2.0 * mxy + c1) * (2.0 * cov + c2)) / ((mxx + myy + c1) * (var_x + var_y + c2));
    }
    return total / static_cast<double>(mu_x.size());
}

}

#endif
