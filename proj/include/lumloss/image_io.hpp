#ifndef LUMLOSS_IMAGE_IO_HPP
#define LUMLOSS_IMAGE_IO_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "image.hpp"

// Binary PNM (P6 RGB / P5 gray, maxval 255) and the LUMF1 raw-float format:
//
//   "LUMF1\n" "<H> <W> <C>\n" then H*W*C little-endian float32 values.

namespace lumloss {

inline constexpr std::string_view kLumfMagic = "LUMF1\n";

namespace detail {

static_assert(std::endian::native == std::endian::little, "LUMF1/LUMNET1 I/O assumes a little-endian host");

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open '" + path.string() + "' for reading");
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw FormatError("cannot open '" + path.string() + "' for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw FormatError("write to '" + path.string() + "' failed");
    }
}

inline bool is_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Cursor over an ASCII header with PNM-style whitespace and '#' comments.
class HeaderReader {
public:
    HeaderReader(std::span<const unsigned char> bytes, std::string what, std::size_t start)
        : bytes_(bytes), what_(std::move(what)), pos_(start) {}

    std::size_t offset() const { return pos_; }

    [[noreturn]] void fail(const std::string& msg) const {
        throw FormatError(what_ + ": " + msg + " at byte offset " + std::to_string(pos_));
    }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (is_space(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
                    ++pos_;
                }
            } else {
                break;
            }
        }
    }

    std::size_t read_uint() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size()) {
            fail("unexpected end of header");
        }
        if (bytes_[pos_] < '0' || bytes_[pos_] > '9') {
            fail("expected a decimal integer");
        }
        std::size_t v = 0;
        while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
            v = v * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
            if (v > (std::size_t{1} << 30)) {
                fail("integer too large");
            }
            ++pos_;
        }
        return v;
    }

    // PNM: exactly one whitespace byte separates the header from the payload.
    void expect_single_space() {
        if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) {
            fail("expected whitespace before payload");
        }
        ++pos_;
    }

    void expect_byte(unsigned char c) {
        if (pos_ >= bytes_.size() || bytes_[pos_] != c) {
            fail(std::string("expected '") + (c == '\n' ? std::string("\\n") : std::string(1, char(c))) + "'");
        }
        ++pos_;
    }

private:
    std::span<const unsigned char> bytes_;
    std::string what_;
    std::size_t pos_;
};

inline std::size_t checked_product(std::size_t h, std::size_t w, std::size_t c, const HeaderReader& hdr) {
    if (h == 0 || w == 0) {
        hdr.fail("zero image dimension");
    }
    return h * w * c;
}

}

inline Image decode_pnm(std::span<const unsigned char> bytes, const std::string& name = "pnm") {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '6' && bytes[1] != '5')) {
        throw FormatError(name + ": not a binary PNM (expected P6 or P5) at byte offset 0");
    }
    const std::size_t channels = bytes[1] == '6' ? 3 : 1;
    detail::HeaderReader hdr(bytes, name, 2);
    const std::size_t width = hdr.read_uint();
    const std::size_t height = hdr.read_uint();
    const std::size_t maxval_offset = (hdr.skip_space_and_comments(), hdr.offset());
    const std::size_t maxval = hdr.read_uint();
    if (maxval != 255) {
        throw FormatError(name + ": unsupported maxval " + std::to_string(maxval) + " at byte offset " +
                          std::to_string(maxval_offset));
    }
    hdr.expect_single_space();
    const std::size_t n = detail::checked_product(height, width, channels, hdr);
    const std::size_t start = hdr.offset();
    if (bytes.size() - start < n) {
        throw FormatError(name + ": truncated payload, expected " + std::to_string(n) + " bytes, found " +
                          std::to_string(bytes.size() - start) + " at byte offset " + std::to_string(start));
    }
    std::vector<double> data(n);
    for (std::size_t i = 0; i < n; ++i) {
        data[i] = bytes[start + i] / 255.0;
    }
    return Image(height, width, channels, std::move(data));
}

/// P6 for RGB, P5 for grayscale. Values are clamped to [0,1] and rounded.
inline std::string encode_pnm(const Image& img) {
    std::string out = (img.channels() == 3 ? "P6\n" : "P5\n") + std::to_string(img.width()) + " " +
                      std::to_string(img.height()) + "\n255\n";
    const std::size_t header = out.size();
    out.resize(header + img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double v = std::clamp(img[i], 0.0, 1.0);
        out[header + i] = static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
    }
    return out;
}

inline Image decode_lumf(std::span<const unsigned char> bytes, const std::string& name = "lumf") {
    if (bytes.size() < kLumfMagic.size() ||
        std::memcmp(bytes.data(), kLumfMagic.data(), kLumfMagic.size()) != 0) {
        throw FormatError(name + ": missing LUMF1 magic at byte offset 0");
    }
    detail::HeaderReader hdr(bytes, name, kLumfMagic.size());
    const std::size_t h = hdr.read_uint();
    hdr.expect_byte(' ');
    const std::size_t w = hdr.read_uint();
    hdr.expect_byte(' ');
    const std::size_t c = hdr.read_uint();
    hdr.expect_byte('\n');
    if (c != 1 && c != 3) {
        hdr.fail("unsupported channel count " + std::to_string(c));
    }
    const std::size_t n = detail::checked_product(h, w, c, hdr);
    const std::size_t start = hdr.offset();
    if ((bytes.size() - start) / 4 < n) {
        throw FormatError(name + ": truncated payload, expected " + std::to_string(4 * n) + " bytes, found " +
                          std::to_string(bytes.size() - start) + " at byte offset " + std::to_string(start));
    }
    std::vector<double> data(n);
    for (std::size_t i = 0; i < n; ++i) {
        float f;
        std::memcpy(&f, bytes.data() + start + 4 * i, 4);
        if (!std::isfinite(f)) {
            throw FormatError(name + ": non-finite value at byte offset " + std::to_string(start + 4 * i));
        }
        data[i] = f;
    }
    return Image(h, w, c, std::move(data));
}

inline std::string encode_lumf(const Image& img) {
    std::string out(kLumfMagic);
    out += std::to_string(img.height()) + " " + std::to_string(img.width()) + " " + std::to_string(img.channels()) + "\n";
    const std::size_t header = out.size();
    out.resize(header + 4 * img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        const float f = static_cast<float>(img[i]);
        std::memcpy(out.data() + header + 4 * i, &f, 4);
    }
    return out;
}

inline bool has_lumf_extension(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    return ext == ".lumf" || ext == ".LUMF";
}

/// Reads a P6/P5 PNM or LUMF1 file; the format is detected from the magic bytes.
inline Image load_image(const std::filesystem::path& path) {
    const auto bytes = detail::read_file(path);
    const std::string name = path.string();
    if (bytes.size() >= kLumfMagic.size() && std::memcmp(bytes.data(), kLumfMagic.data(), kLumfMagic.size()) == 0) {
        return decode_lumf(bytes, name);
    }
    return decode_pnm(bytes, name);
}

/// Writes LUMF1 when the extension is .lumf, PNM otherwise.
inline void save_image(const Image& img, const std::filesystem::path& path) {
    detail::write_file(path, has_lumf_extension(path) ? encode_lumf(img) : encode_pnm(img));
}

}

#endif
