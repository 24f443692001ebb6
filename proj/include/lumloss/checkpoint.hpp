#ifndef LUMLOSS_CHECKPOINT_HPP
#define LUMLOSS_CHECKPOINT_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <sstream>
#include <string>
#include <string_view>

#include "errors.hpp"
#include "image_io.hpp"
#include "tinynet.hpp"

// LUMNET1 checkpoint layout:
//
//   LUMNET1
//   residual <0|1>
//   label <text>
//   layers <L>
//   conv <in> <out> <k>        (L lines)
//   payload <bytes>
//   <payload: per layer, kernels [out][in][k][k] then bias, float32 LE>
//   <FNV-1a 64 of the payload, uint64 LE>

namespace lumloss {

inline constexpr std::string_view kNetMagic = "LUMNET1\n";

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

struct Checkpoint {
    TinyNet net;
    std::string label;
};

inline std::string encode_checkpoint(const TinyNet& net, const std::string& label = "") {
    net.validate();
    std::string payload;
    auto put = [&payload](double v) {
        const float f = static_cast<float>(v);
        char b[4];
        std::memcpy(b, &f, 4);
        payload.append(b, 4);
    };
    for (const auto& l : net.layers) {
        for (double v : l.kernels) put(v);
        for (double v : l.bias) put(v);
    }
    std::ostringstream os;
    os << kNetMagic << "residual " << (net.residual ? 1 : 0) << "\n";
    os << "label " << (label.empty() ? "-" : label) << "\n";
    os << "layers " << net.layers.size() << "\n";
    for (const auto& l : net.layers) {
        os << "conv " << l.in_ch << " " << l.out_ch << " " << l.k << "\n";
    }
    os << "payload " << payload.size() << "\n";
    std::string out = os.str() + payload;
    const std::uint64_t sum = fnv1a64(payload);
    char b[8];
    std::memcpy(b, &sum, 8);
    out.append(b, 8);
    return out;
}

/// Checksum stored in the trailing 8 bytes of an encoded checkpoint.
inline std::uint64_t checkpoint_checksum(std::string_view encoded) {
    if (encoded.size() < 8) {
        throw FormatError("checkpoint too short");
    }
    std::uint64_t v;
    std::memcpy(&v, encoded.data() + encoded.size() - 8, 8);
    return v;
}

inline Checkpoint decode_checkpoint(std::span<const unsigned char> bytes, const std::string& name = "checkpoint") {
    if (bytes.size() < kNetMagic.size() || std::memcmp(bytes.data(), kNetMagic.data(), kNetMagic.size()) != 0) {
        throw FormatError(name + ": missing LUMNET1 magic at byte offset 0");
    }
    std::size_t pos = kNetMagic.size();
    auto line = [&]() {
        const std::size_t start = pos;
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        if (pos >= bytes.size()) {
            throw FormatError(name + ": unterminated header line at byte offset " + std::to_string(start));
        }
        std::string s(reinterpret_cast<const char*>(bytes.data()) + start, pos - start);
        ++pos;
        return std::pair{s, start};
    };
    auto fields = [&](const std::string& key, std::size_t count) {
        auto [text, at] = line();
        std::istringstream is(text);
        std::string k;
        is >> k;
        if (k != key) {
            throw FormatError(name + ": expected '" + key + "' at byte offset " + std::to_string(at));
        }
        std::vector<std::string> out(count);
        for (auto& f : out) {
            if (!(is >> f)) {
                throw FormatError(name + ": malformed '" + key + "' line at byte offset " + std::to_string(at));
            }
        }
        return std::pair{out, at};
    };
    auto to_size = [&](const std::string& s, std::size_t at) -> std::size_t {
        std::size_t v = 0;
        if (s.empty() || s.size() > 9) {
            throw FormatError(name + ": bad integer '" + s + "' at byte offset " + std::to_string(at));
        }
        for (char c : s) {
            if (c < '0' || c > '9') {
                throw FormatError(name + ": bad integer '" + s + "' at byte offset " + std::to_string(at));
            }
            v = v * 10 + static_cast<std::size_t>(c - '0');
        }
        return v;
    };

    Checkpoint ck;
    {
        auto [f, at] = fields("residual", 1);
        ck.net.residual = to_size(f[0], at) != 0;
    }
    {
        auto [text, at] = line();
        if (text.rfind("label ", 0) != 0) {
            throw FormatError(name + ": expected 'label' at byte offset " + std::to_string(at));
        }
        ck.label = text.substr(6);
        if (ck.label == "-") ck.label.clear();
    }
    std::size_t nlayers;
    {
        auto [f, at] = fields("layers", 1);
        nlayers = to_size(f[0], at);
        if (nlayers == 0 || nlayers > 1024) {
            throw FormatError(name + ": unreasonable layer count at byte offset " + std::to_string(at));
        }
    }
    std::size_t expected = 0;
    for (std::size_t i = 0; i < nlayers; ++i) {
        auto [f, at] = fields("conv", 3);
        try {
            ck.net.layers.emplace_back(to_size(f[0], at), to_size(f[1], at), to_size(f[2], at));
        } catch (const InvalidInput& e) {
            throw FormatError(name + ": " + e.what() + " at byte offset " + std::to_string(at));
        }
        expected += 4 * ck.net.layers.back().parameter_count();
    }
    {
        auto [f, at] = fields("payload", 1);
        if (to_size(f[0], at) != expected) {
            throw FormatError(name + ": payload size does not match layer shapes at byte offset " + std::to_string(at));
        }
    }
    if (bytes.size() - pos < expected + 8) {
        throw FormatError(name + ": truncated payload at byte offset " + std::to_string(pos));
    }
    if (bytes.size() - pos > expected + 8) {
        throw FormatError(name + ": trailing bytes after checksum at byte offset " + std::to_string(pos + expected + 8));
    }
    const std::string_view payload(reinterpret_cast<const char*>(bytes.data()) + pos, expected);
    std::uint64_t stored;
    std::memcpy(&stored, bytes.data() + pos + expected, 8);
    const std::uint64_t actual = fnv1a64(payload);
    if (stored != actual) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "stored %016llx, computed %016llx", static_cast<unsigned long long>(stored),
                      static_cast<unsigned long long>(actual));
        throw CorruptCheckpoint(name + ": checksum mismatch (" + buf + ") over payload at byte offset " +
                                std::to_string(pos));
    }
    std::size_t off = 0;
    auto get = [&]() {
        float f;
        std::memcpy(&f, payload.data() + off, 4);
        off += 4;
        if (!std::isfinite(f)) {
            throw FormatError(name + ": non-finite parameter at byte offset " + std::to_string(pos + off - 4));
        }
        return static_cast<double>(f);
    };
    for (auto& l : ck.net.layers) {
        for (double& v : l.kernels) v = get();
        for (double& v : l.bias) v = get();
    }
    try {
        ck.net.validate();
    } catch (const InvalidInput& e) {
        throw FormatError(name + ": " + e.what());
    }
    return ck;
}

inline void save_checkpoint(const TinyNet& net, const std::filesystem::path& path, const std::string& label = "") {
    detail::write_file(path, encode_checkpoint(net, label));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    const auto bytes = detail::read_file(path);
    return decode_checkpoint(bytes, path.string());
}

}

#endif
