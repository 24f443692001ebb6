#ifndef LUMLOSS_DATASET_HPP
#define LUMLOSS_DATASET_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "image.hpp"
#include "rng.hpp"

namespace lumloss {

/// Additive Gaussian noise. sigma_255 is on the 0-255 intensity scale.
struct NoiseSpec {
    double sigma_255 = 0.0;
    std::uint64_t seed = 0;

    double sigma() const { return sigma_255 / 255.0; }
};

/// Blind training draws: every patch gets its own sigma ~ U(0, sigma_max_255).
struct BlindTrainSpec {
    double sigma_max_255 = 25.0;
    std::size_t patch_size = 24;
    std::size_t count = 1;
    std::uint64_t seed = 0;
};

namespace detail {

inline double random_channel_pair(Rng& rng, double& end) {
    const double start = rng.uniform();
    const double span = rng.uniform(0.3, 0.5);
    end = start > 0.5 ? start - span : start + span;
    return start;
}

inline Image gen_one(Rng& rng, std::size_t h, std::size_t w) {
    Image img(h, w, 3);
    const double hd = static_cast<double>(h);
    const double wd = static_cast<double>(w);

    // Smooth background ramp along a random direction.
    const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double dx = std::cos(theta);
    const double dy = std::sin(theta);
    double from[3], to[3];
    for (int c = 0; c < 3; ++c) {
        from[c] = random_channel_pair(rng, to[c]);
    }
    const double extent = std::abs(dx) * wd + std::abs(dy) * hd;
    const double origin = std::min(0.0, dx * wd) + std::min(0.0, dy * hd);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const double t = (dx * static_cast<double>(x) + dy * static_cast<double>(y) - origin) / extent;
            for (int c = 0; c < 3; ++c) {
                img.at(y, x, c) = from[c] + (to[c] - from[c]) * t;
            }
        }
    }

    // Flat rectangles and discs with hard edges.
    const std::uint64_t shapes = 2 + rng.below(4);
    for (std::uint64_t s = 0; s < shapes; ++s) {
        double color[3] = {rng.uniform(), rng.uniform(), rng.uniform()};
        const double alpha = rng.uniform(0.6, 1.0);
        const bool disc = rng.below(3) == 0;
        const double cy = rng.uniform(0.0, hd);
        const double cx = rng.uniform(0.0, wd);
        const double ry = rng.uniform(0.1, 0.35) * hd;
        const double rx = disc ? ry : rng.uniform(0.1, 0.35) * wd;
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                const double oy = static_cast<double>(y) - cy;
                const double ox = static_cast<double>(x) - cx;
                const bool inside = disc ? (oy * oy + ox * ox <= ry * ry) : (std::abs(oy) <= ry && std::abs(ox) <= rx);
                if (inside) {
                    for (int c = 0; c < 3; ++c) {
                        img.at(y, x, c) = (1.0 - alpha) * img.at(y, x, c) + alpha * color[c];
                    }
                }
            }
        }
    }

    // Band-limited texture: a few low-frequency plane waves per channel.
    for (int c = 0; c < 3; ++c) {
        for (int k = 0; k < 3; ++k) {
            const double period = rng.uniform(6.0, 20.0);
            const double dir = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const double fy = std::sin(dir) * 2.0 * std::numbers::pi / period;
            const double fx = std::cos(dir) * 2.0 * std::numbers::pi / period;
            const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const double amp = rng.uniform(0.01, 0.04);
            for (std::size_t y = 0; y < h; ++y) {
                for (std::size_t x = 0; x < w; ++x) {
                    img.at(y, x, c) += amp * std::sin(fy * static_cast<double>(y) + fx * static_cast<double>(x) + phase);
                }
            }
        }
    }
    return clamp01(std::move(img));
}

}

/**
 * Procedural clean RGB images: a colour ramp, a few flat shapes with hard
 * edges, and low-frequency texture. Image i is drawn from its own stream
 * seeded by mix_seed(seed, i), so any subset can be regenerated alone.
 */
inline std::vector<Image> gen_clean(std::uint64_t seed, std::size_t count, std::size_t h, std::size_t w) {
    if (h < 16 || w < 16) {
        throw InvalidInput("gen_clean: images must be at least 16x16, got " + std::to_string(h) + "x" +
                           std::to_string(w));
    }
    std::vector<Image> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(mix_seed(seed, i));
        out.push_back(detail::gen_one(rng, h, w));
    }
    return out;
}

/// img + N(0, (sigma_255/255)^2) per element. The result is not clamped.
inline Image add_noise(const Image& img, const NoiseSpec& spec) {
    if (!(spec.sigma_255 >= 0.0) || !std::isfinite(spec.sigma_255)) {
        throw InvalidInput("add_noise: sigma must be a finite value >= 0");
    }
    Image out = img;
    if (spec.sigma_255 == 0.0) {
        return out;
    }
    Rng rng(spec.seed);
    const double sigma = spec.sigma();
    for (double& v : out.data()) {
        v += sigma * rng.normal();
    }
    return out;
}

/// A noisy/clean training pair. Carries no noise level: training is blind.
struct BlindPair {
    Image noisy;
    Image clean;
};

/// One planned crop; internal to the patch stream.
struct PatchDraw {
    std::size_t image = 0;
    std::size_t y = 0;
    std::size_t x = 0;
    double sigma_255 = 0.0;
    std::uint64_t noise_seed = 0;
};

/// Plans random crops and noise levels from a single seeded sequence.
class PatchSampler {
public:
    PatchSampler(const std::vector<Image>& clean, const BlindTrainSpec& spec) : clean_(clean), spec_(spec), rng_(spec.seed) {
        if (clean.empty()) {
            throw InvalidInput("blind batches need at least one clean image");
        }
        if (spec.patch_size == 0) {
            throw InvalidInput("patch size must be positive");
        }
        if (!(spec.sigma_max_255 >= 0.0)) {
            throw InvalidInput("sigma_max must be >= 0");
        }
        for (const auto& img : clean) {
            if (spec.patch_size > std::min(img.height(), img.width())) {
                throw InvalidInput("patch size " + std::to_string(spec.patch_size) + " exceeds image " + img.shape());
            }
        }
    }

    PatchDraw draw() {
        PatchDraw d;
        d.image = static_cast<std::size_t>(rng_.below(clean_.size()));
        const Image& img = clean_[d.image];
        d.y = static_cast<std::size_t>(rng_.below(img.height() - spec_.patch_size + 1));
        d.x = static_cast<std::size_t>(rng_.below(img.width() - spec_.patch_size + 1));
        d.sigma_255 = rng_.uniform(0.0, spec_.sigma_max_255);
        d.noise_seed = rng_.next_u64();
        return d;
    }

private:
    const std::vector<Image>& clean_;
    BlindTrainSpec spec_;
    Rng rng_;
};

inline Image crop(const Image& img, std::size_t y0, std::size_t x0, std::size_t h, std::size_t w) {
    if (y0 + h > img.height() || x0 + w > img.width()) {
        throw InvalidInput("crop window outside image " + img.shape());
    }
    Image out(h, w, img.channels());
    const std::size_t c = img.channels();
    for (std::size_t y = 0; y < h; ++y) {
        const double* src = img.data().data() + ((y0 + y) * img.width() + x0) * c;
        std::copy(src, src + w * c, out.data().data() + y * w * c);
    }
    return out;
}

/// Emits exactly spec.count blind (noisy, clean) patch pairs, then nullopt.
class BlindPatchStream {
public:
    BlindPatchStream(std::vector<Image> clean, const BlindTrainSpec& spec)
        : clean_(std::move(clean)), spec_(spec), sampler_(clean_, spec_) {}

    BlindPatchStream(const BlindPatchStream&) = delete;
    BlindPatchStream& operator=(const BlindPatchStream&) = delete;

    std::optional<BlindPair> next() {
        if (emitted_ >= spec_.count) {
            return std::nullopt;
        }
        ++emitted_;
        const PatchDraw d = sampler_.draw();
        Image patch = crop(clean_[d.image], d.y, d.x, spec_.patch_size, spec_.patch_size);
        Image noisy = add_noise(patch, {d.sigma_255, d.noise_seed});
        return BlindPair{std::move(noisy), std::move(patch)};
    }

    std::size_t remaining() const { return spec_.count - emitted_; }

private:
    std::vector<Image> clean_;
    BlindTrainSpec spec_;
    PatchSampler sampler_;
    std::size_t emitted_ = 0;
};

inline BlindPatchStream make_blind_batches(std::vector<Image> clean, const BlindTrainSpec& spec) {
    return BlindPatchStream(std::move(clean), spec);
}

}

#endif
