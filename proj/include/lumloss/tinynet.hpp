#ifndef LUMLOSS_TINYNET_HPP
#define LUMLOSS_TINYNET_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "errors.hpp"
#include "image.hpp"
#include "rng.hpp"

namespace lumloss {

/// Same-padded 2-D convolution layer. kernels are laid out [out][in][k][k].
struct ConvLayer {
    std::size_t in_ch = 0;
    std::size_t out_ch = 0;
    std::size_t k = 3;
    std::vector<double> kernels;
    std::vector<double> bias;

    ConvLayer() = default;
    ConvLayer(std::size_t in, std::size_t out, std::size_t ksize = 3)
        : in_ch(in), out_ch(out), k(ksize), kernels(out * in * ksize * ksize, 0.0), bias(out, 0.0) {
        if (in == 0 || out == 0) {
            throw InvalidInput("conv layer channel counts must be positive");
        }
        if (ksize % 2 == 0) {
            throw InvalidInput("conv kernel size must be odd, got " + std::to_string(ksize));
        }
    }

    std::size_t kernel_index(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) const {
        return ((o * in_ch + i) * k + ky) * k + kx;
    }
    double& weight(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) { return kernels[kernel_index(o, i, ky, kx)]; }
    double weight(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) const { return kernels[kernel_index(o, i, ky, kx)]; }

    std::size_t parameter_count() const { return kernels.size() + bias.size(); }

    friend bool operator==(const ConvLayer&, const ConvLayer&) = default;
};

struct ConvGrads {
    Tensor input;
    std::vector<double> kernels;
    std::vector<double> bias;
};

namespace detail {

// [out][in][ky][kx] -> [ky][kx][in][out], so the innermost loop runs over
// output channels contiguously.
inline std::vector<double> tap_major(const ConvLayer& layer) {
    const std::size_t k = layer.k;
    std::vector<double> t(layer.kernels.size());
    for (std::size_t o = 0; o < layer.out_ch; ++o) {
        for (std::size_t i = 0; i < layer.in_ch; ++i) {
            for (std::size_t ky = 0; ky < k; ++ky) {
                for (std::size_t kx = 0; kx < k; ++kx) {
                    t[((ky * k + kx) * layer.in_ch + i) * layer.out_ch + o] = layer.weight(o, i, ky, kx);
                }
            }
        }
    }
    return t;
}

}

/// Cross-correlation with zero same-padding; output has the input's spatial size.
inline Tensor conv_forward(const Tensor& x, const ConvLayer& layer) {
    if (x.channels() != layer.in_ch) {
        throw InvalidInput("conv_forward: input has " + std::to_string(x.channels()) + " channels, layer expects " +
                           std::to_string(layer.in_ch));
    }
    const std::size_t h = x.height(), w = x.width(), k = layer.k, r = k / 2;
    const std::size_t cin = layer.in_ch, cout = layer.out_ch;
    const auto wt = detail::tap_major(layer);
    Tensor out(h, w, cout);
    const double* in = x.data().data();
    double* dst = out.data().data();
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t xx = 0; xx < w; ++xx) {
            double* o = dst + (y * w + xx) * cout;
            for (std::size_t c = 0; c < cout; ++c) {
                o[c] = layer.bias[c];
            }
            for (std::size_t ky = 0; ky < k; ++ky) {
                if (y + ky < r || y + ky - r >= h) continue;
                const std::size_t iy = y + ky - r;
                for (std::size_t kx = 0; kx < k; ++kx) {
                    if (xx + kx < r || xx + kx - r >= w) continue;
                    const std::size_t ix = xx + kx - r;
                    const double* px = in + (iy * w + ix) * cin;
                    const double* tap = wt.data() + (ky * k + kx) * cin * cout;
                    for (std::size_t i = 0; i < cin; ++i) {
                        const double v = px[i];
                        const double* wrow = tap + i * cout;
                        for (std::size_t c = 0; c < cout; ++c) {
                            o[c] += v * wrow[c];
                        }
                    }
                }
            }
        }
    }
    return out;
}

/// Exact gradients of conv_forward(input, layer) given dL/d(output).
inline ConvGrads conv_backward(const Tensor& grad_out, const Tensor& input, const ConvLayer& layer) {
    if (input.channels() != layer.in_ch || grad_out.channels() != layer.out_ch ||
        grad_out.height() != input.height() || grad_out.width() != input.width()) {
        throw InvalidInput("conv_backward: gradient " + grad_out.shape() + " does not match forward shapes (input " +
                           input.shape() + ", out_ch " + std::to_string(layer.out_ch) + ")");
    }
    const std::size_t h = input.height(), w = input.width(), k = layer.k, r = k / 2;
    const std::size_t cin = layer.in_ch, cout = layer.out_ch;
    const auto wt = detail::tap_major(layer);
    std::vector<double> gwt(wt.size(), 0.0);
    ConvGrads g{Tensor(h, w, cin), std::vector<double>(layer.kernels.size(), 0.0), std::vector<double>(cout, 0.0)};
    const double* in = input.data().data();
    const double* go = grad_out.data().data();
    double* gin = g.input.data().data();
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t xx = 0; xx < w; ++xx) {
            const double* gpx = go + (y * w + xx) * cout;
            for (std::size_t c = 0; c < cout; ++c) {
                g.bias[c] += gpx[c];
            }
            for (std::size_t ky = 0; ky < k; ++ky) {
                if (y + ky < r || y + ky - r >= h) continue;
                const std::size_t iy = y + ky - r;
                for (std::size_t kx = 0; kx < k; ++kx) {
                    if (xx + kx < r || xx + kx - r >= w) continue;
                    const std::size_t ix = xx + kx - r;
                    const std::size_t off = (iy * w + ix) * cin;
                    const double* px = in + off;
                    double* gpx_in = gin + off;
                    const std::size_t tap = (ky * k + kx) * cin * cout;
                    for (std::size_t i = 0; i < cin; ++i) {
                        const double v = px[i];
                        const double* wrow = wt.data() + tap + i * cout;
                        double* grow = gwt.data() + tap + i * cout;
                        double acc = 0.0;
                        for (std::size_t c = 0; c < cout; ++c) {
                            grow[c] += v * gpx[c];
                            acc += wrow[c] * gpx[c];
                        }
                        gpx_in[i] += acc;
                    }
                }
            }
        }
    }
    for (std::size_t o = 0; o < cout; ++o) {
        for (std::size_t i = 0; i < cin; ++i) {
            for (std::size_t ky = 0; ky < k; ++ky) {
                for (std::size_t kx = 0; kx < k; ++kx) {
                    g.kernels[layer.kernel_index(o, i, ky, kx)] = gwt[((ky * k + kx) * cin + i) * cout + o];
                }
            }
        }
    }
    return g;
}

inline Tensor relu_forward(Tensor x) {
    for (double& v : x.data()) {
        v = v > 0.0 ? v : 0.0;
    }
    return x;
}

/// Passes gradient where the pre-activation is strictly positive.
inline Tensor relu_backward(Tensor grad, const Tensor& preact) {
    require_same_shape(grad, preact, "relu_backward");
    for (std::size_t i = 0; i < grad.size(); ++i) {
        if (!(preact[i] > 0.0)) {
            grad[i] = 0.0;
        }
    }
    return grad;
}

struct NetShape {
    std::size_t hidden_layers = 3;
    std::size_t channels = 16;
    std::size_t kernel = 3;
    bool residual = true;
};

/**
 * Conv/ReLU stack 3 -> C -> ... -> C -> 3 that estimates the noise field.
 * In residual mode the denoised output is input minus that estimate.
 */
struct TinyNet {
    std::vector<ConvLayer> layers;
    bool residual = true;

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.parameter_count();
        return n;
    }

    void validate() const {
        if (layers.empty()) {
            throw InvalidInput("network has no layers");
        }
        if (layers.front().in_ch != 3 || layers.back().out_ch != 3) {
            throw InvalidInput("network must map 3 channels to 3 channels");
        }
        for (std::size_t i = 1; i < layers.size(); ++i) {
            if (layers[i].in_ch != layers[i - 1].out_ch) {
                throw InvalidInput("layer " + std::to_string(i) + " input channels do not match previous layer output");
            }
        }
    }

    friend bool operator==(const TinyNet&, const TinyNet&) = default;
};

/// All-zero parameters; in residual mode this is the identity map.
inline TinyNet make_tinynet(const NetShape& shape = {}) {
    if (shape.channels == 0) {
        throw InvalidInput("network width must be positive");
    }
    TinyNet net;
    net.residual = shape.residual;
    net.layers.emplace_back(3, shape.channels, shape.kernel);
    for (std::size_t i = 0; i < shape.hidden_layers; ++i) {
        net.layers.emplace_back(shape.channels, shape.channels, shape.kernel);
    }
    net.layers.emplace_back(shape.channels, 3, shape.kernel);
    return net;
}

/// He-normal weights, zero biases; the output layer is scaled by 1e-3 so the
/// residual net starts close to the identity.
inline void init_tinynet(TinyNet& net, std::uint64_t seed, double last_layer_scale = 1e-3) {
    Rng rng(seed);
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        auto& l = net.layers[li];
        double std_dev = std::sqrt(2.0 / static_cast<double>(l.in_ch * l.k * l.k));
        if (li + 1 == net.layers.size()) {
            std_dev *= last_layer_scale;
        }
        for (double& v : l.kernels) {
            v = std_dev * rng.normal();
        }
        std::fill(l.bias.begin(), l.bias.end(), 0.0);
    }
}

/// Activations kept from net_forward for the backward pass.
struct NetCache {
    std::vector<Tensor> layer_inputs;  // input to each conv layer
    std::vector<Tensor> preacts;       // conv outputs feeding each ReLU
};

struct NetOutput {
    Image denoised;
    Image noise_estimate;
    NetCache cache;
};

struct LayerGrads {
    std::vector<double> kernels;
    std::vector<double> bias;
};

/// Parameter gradients (shapes mirror the layers) plus the input gradient.
struct GradTape {
    std::vector<LayerGrads> layers;
    Tensor input;

    static GradTape zeros_like(const TinyNet& net) {
        GradTape t;
        for (const auto& l : net.layers) {
            t.layers.push_back({std::vector<double>(l.kernels.size(), 0.0), std::vector<double>(l.bias.size(), 0.0)});
        }
        return t;
    }

    void accumulate(const GradTape& other) {
        for (std::size_t li = 0; li < layers.size(); ++li) {
            for (std::size_t i = 0; i < layers[li].kernels.size(); ++i) layers[li].kernels[i] += other.layers[li].kernels[i];
            for (std::size_t i = 0; i < layers[li].bias.size(); ++i) layers[li].bias[i] += other.layers[li].bias[i];
        }
    }
};

inline NetOutput net_forward(const TinyNet& net, const Image& noisy) {
    require_channels(noisy, 3, "net_forward");
    net.validate();
    NetOutput out;
    Tensor act = noisy;
    const std::size_t n = net.layers.size();
    for (std::size_t li = 0; li < n; ++li) {
        Tensor z = conv_forward(act, net.layers[li]);
        out.cache.layer_inputs.push_back(std::move(act));
        if (li + 1 < n) {
            act = relu_forward(z);
            out.cache.preacts.push_back(std::move(z));
        } else {
            act = std::move(z);
        }
    }
    out.noise_estimate = Image(std::move(act));
    if (net.residual) {
        out.denoised = noisy;
        for (std::size_t i = 0; i < noisy.size(); ++i) {
            out.denoised[i] -= out.noise_estimate[i];
        }
    } else {
        out.denoised = out.noise_estimate;
    }
    return out;
}

/// Backpropagates dL/d(denoised) through the stack and the residual path.
inline GradTape net_backward(const TinyNet& net, const NetCache& cache, const Image& grad_denoised) {
    const std::size_t n = net.layers.size();
    if (cache.layer_inputs.size() != n || cache.preacts.size() + 1 != n) {
        throw std::logic_error("net_backward: cache was produced by a network with a different depth");
    }
    for (std::size_t li = 0; li < n; ++li) {
        if (cache.layer_inputs[li].channels() != net.layers[li].in_ch ||
            !(cache.layer_inputs[li].height() == grad_denoised.height() &&
              cache.layer_inputs[li].width() == grad_denoised.width())) {
            throw std::logic_error("net_backward: stale or mismatched cache at layer " + std::to_string(li));
        }
    }
    require_channels(grad_denoised, 3, "net_backward");

    GradTape tape;
    tape.layers.resize(n);
    Tensor grad = grad_denoised;
    if (net.residual) {
        for (double& v : grad.data()) v = -v;
    }
    for (std::size_t li = n; li-- > 0;) {
        if (li + 1 < n) {
            grad = relu_backward(std::move(grad), cache.preacts[li]);
        }
        ConvGrads g = conv_backward(grad, cache.layer_inputs[li], net.layers[li]);
        tape.layers[li] = {std::move(g.kernels), std::move(g.bias)};
        grad = std::move(g.input);
    }
    if (net.residual) {
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += grad_denoised[i];
    }
    tape.input = std::move(grad);
    return tape;
}

/// Inference only.
inline Image denoise(const TinyNet& net, const Image& noisy) { return net_forward(net, noisy).denoised; }

}

#endif
