#ifndef LUMLOSS_CONFIG_HPP
#define LUMLOSS_CONFIG_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "image_io.hpp"
#include "losses.hpp"
#include "trainer.hpp"

// Plain-text "key = value" configuration. '#' starts a comment; blank lines
// are ignored; a repeated key is an error.

namespace lumloss {

using KeyValues = std::map<std::string, std::string, std::less<>>;

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}

inline KeyValues parse_key_values(std::string_view text, const std::string& name = "config") {
    KeyValues kv;
    std::size_t lineno = 0;
    while (!text.empty()) {
        ++lineno;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw InvalidInput(name + ":" + std::to_string(lineno) + ": expected key=value");
        }
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string value(detail::trim(line.substr(eq + 1)));
        if (key.empty()) {
            throw InvalidInput(name + ":" + std::to_string(lineno) + ": empty key");
        }
        if (!kv.emplace(key, value).second) {
            throw InvalidInput(name + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
    }
    return kv;
}

inline KeyValues read_key_values(const std::filesystem::path& path) {
    const auto bytes = detail::read_file(path);
    return parse_key_values(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), path.string());
}

inline double parse_double(std::string_view s, std::string_view key) {
    s = detail::trim(s);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw InvalidInput("'" + std::string(key) + "': expected a number, got '" + std::string(s) + "'");
    }
    return v;
}

inline std::uint64_t parse_u64(std::string_view s, std::string_view key) {
    s = detail::trim(s);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw InvalidInput("'" + std::string(key) + "': expected a nonnegative integer, got '" + std::string(s) + "'");
    }
    return v;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto p = s.find(sep, start);
        out.emplace_back(detail::trim(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start)));
        if (p == std::string_view::npos) break;
        start = p + 1;
    }
    return out;
}

/// "HxW" -> {H, W}.
inline std::pair<std::size_t, std::size_t> parse_size(std::string_view s, std::string_view key) {
    const auto parts = split(s, 'x');
    if (parts.size() != 2) {
        throw InvalidInput("'" + std::string(key) + "': expected HxW, got '" + std::string(s) + "'");
    }
    return {parse_u64(parts[0], key), parse_u64(parts[1], key)};
}

/**
 * Comma-separated numbers. "a,b,...,c" expands to the arithmetic
 * progression a, b, ..., c with step b - a.
 */
inline std::vector<double> parse_number_list(std::string_view s, std::string_view key) {
    const auto parts = split(s, ',');
    std::vector<double> out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (parts[i] == "..." || parts[i] == "\xE2\x80\xA6") {
            if (out.size() < 2 || i + 1 != parts.size() - 1) {
                throw InvalidInput("'" + std::string(key) + "': '...' needs two leading terms and one final term");
            }
            const double step = out[out.size() - 1] - out[out.size() - 2];
            const double last = parse_double(parts[i + 1], key);
            if (!(step > 0.0) || last < out.back()) {
                throw InvalidInput("'" + std::string(key) + "': '...' needs an increasing progression");
            }
            const std::size_t base = out.size() - 1;
            for (std::size_t n = 1;; ++n) {
                const double v = out[base] + step * static_cast<double>(n);
                if (v > last + 1e-9 * std::abs(last)) break;
                out.push_back(v);
            }
            if (std::abs(out.back() - last) > 1e-9 * std::max(1.0, std::abs(last))) {
                throw InvalidInput("'" + std::string(key) + "': final term is not on the progression");
            }
            return out;
        }
        out.push_back(parse_double(parts[i], key));
    }
    return out;
}

/// "l1", "l2", "luml1", "luml1:<lambda>", or "luml1:<lambda>:<pixel_base>".
inline LossSpec parse_loss_spec(std::string_view s) {
    const auto parts = split(s, ':');
    LossSpec spec;
    spec.kind = parse_loss_kind(parts[0]);
    if (parts.size() > 1) {
        if (spec.kind != LossKind::LuminanceL1) {
            throw InvalidInput("loss '" + std::string(s) + "': only luml1 takes parameters");
        }
        spec.lambda = parse_double(parts[1], "lambda");
    }
    if (parts.size() > 2) spec.pixel_base = parse_pixel_base(parts[2]);
    if (parts.size() > 3) throw InvalidInput("loss '" + std::string(s) + "': too many fields");
    spec.validate();
    return spec;
}

inline bool parse_bool(std::string_view s, std::string_view key) {
    if (s == "1" || s == "true" || s == "on") return true;
    if (s == "0" || s == "false" || s == "off") return false;
    throw InvalidInput("'" + std::string(key) + "': expected a boolean, got '" + std::string(s) + "'");
}

/**
 * Applies one TrainConfig key. Returns false when the key is not a
 * training key so callers can layer their own keys on top.
 */
inline bool apply_train_key(TrainConfig& cfg, std::string_view key, std::string_view value) {
    if (key == "loss") {
        const LossSpec parsed = parse_loss_spec(value);
        cfg.loss.kind = parsed.kind;
        if (value.find(':') != std::string_view::npos) {
            cfg.loss.lambda = parsed.lambda;
            cfg.loss.pixel_base = parsed.pixel_base;
        }
    } else if (key == "lambda") {
        cfg.loss.lambda = parse_double(value, key);
    } else if (key == "pixel_base") {
        cfg.loss.pixel_base = parse_pixel_base(value);
    } else if (key == "steps") {
        cfg.steps = parse_u64(value, key);
    } else if (key == "batch_size") {
        cfg.batch_size = parse_u64(value, key);
    } else if (key == "lr") {
        cfg.adam.lr = parse_double(value, key);
    } else if (key == "adam_beta1") {
        cfg.adam.beta1 = parse_double(value, key);
    } else if (key == "adam_beta2") {
        cfg.adam.beta2 = parse_double(value, key);
    } else if (key == "adam_eps") {
        cfg.adam.eps = parse_double(value, key);
    } else if (key == "seed") {
        cfg.seed = parse_u64(value, key);
    } else if (key == "sigma_max") {
        cfg.sigma_max = parse_double(value, key);
    } else if (key == "patch_size") {
        cfg.patch_size = parse_u64(value, key);
    } else if (key == "train_count") {
        cfg.train_count = parse_u64(value, key);
    } else if (key == "train_size") {
        std::tie(cfg.train_height, cfg.train_width) = parse_size(value, key);
    } else if (key == "hidden_layers") {
        cfg.net.hidden_layers = parse_u64(value, key);
    } else if (key == "channels") {
        cfg.net.channels = parse_u64(value, key);
    } else if (key == "kernel") {
        cfg.net.kernel = parse_u64(value, key);
    } else if (key == "residual") {
        cfg.net.residual = parse_bool(value, key);
    } else if (key == "checkpoint_every") {
        cfg.checkpoint_every = parse_u64(value, key);
    } else if (key == "val_every") {
        cfg.val_every = parse_u64(value, key);
    } else if (key == "val_count") {
        cfg.val_count = parse_u64(value, key);
    } else if (key == "val_sigma") {
        cfg.val_sigma = parse_double(value, key);
    } else {
        return false;
    }
    return true;
}

inline TrainConfig train_config_from(const KeyValues& kv) {
    TrainConfig cfg;
    for (const auto& [k, v] : kv) {
        if (!apply_train_key(cfg, k, v)) {
            throw InvalidInput("unknown training config key '" + k + "'");
        }
    }
    cfg.validate();
    return cfg;
}

/// Canonical "key=value" dump; the inverse of train_config_from.
inline std::string to_key_values(const TrainConfig& cfg) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "loss=%s\nlambda=%.17g\npixel_base=%s\nsteps=%zu\nbatch_size=%zu\nlr=%.17g\nadam_beta1=%.17g\n"
                  "adam_beta2=%.17g\nadam_eps=%.17g\nseed=%llu\nsigma_max=%.17g\npatch_size=%zu\ntrain_count=%zu\n"
                  "train_size=%zux%zu\nhidden_layers=%zu\nchannels=%zu\nkernel=%zu\nresidual=%d\n"
                  "checkpoint_every=%zu\nval_every=%zu\nval_count=%zu\nval_sigma=%.17g\n",
                  std::string(to_string(cfg.loss.kind)).c_str(), cfg.loss.lambda,
                  std::string(to_string(cfg.loss.pixel_base)).c_str(), cfg.steps, cfg.batch_size, cfg.adam.lr,
                  cfg.adam.beta1, cfg.adam.beta2, cfg.adam.eps, static_cast<unsigned long long>(cfg.seed),
                  cfg.sigma_max, cfg.patch_size, cfg.train_count, cfg.train_height, cfg.train_width,
                  cfg.net.hidden_layers, cfg.net.channels, cfg.net.kernel, cfg.net.residual ? 1 : 0,
                  cfg.checkpoint_every, cfg.val_every, cfg.val_count, cfg.val_sigma);
    return buf;
}

}

#endif
