// File formats. Two of them:
//
//  - raw image: 8-byte magic "DCVIMG1\n", two u32 dimensions, then rows*cols
//    f64 pixels, everything little-endian, row-major. Bit-exact roundtrip is
//    the contract; reruns are compared byte-for-byte at this level.
//  - PGM (P5, maxval 65535, big-endian samples) for eyeballing. Lossy,
//    one-way: the full range of the image is mapped linearly onto [0, 65535].
//
// Read errors are distinct types so callers (and tests) can tell a wrong
// file from a damaged one from a hostile header.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "deconv/image.hpp"

namespace deconv {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr char kImageMagic[8] = {'D', 'C', 'V', 'I', 'M', 'G', '1',
                                        '\n'};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BadMagicError : IoError {
    using IoError::IoError;
};
struct TruncatedError : IoError {
    using IoError::IoError;
};
struct DimOverflowError : IoError {
    using IoError::IoError;
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(char((bits >> (8 * i)) & 0xff));
}

inline std::uint32_t get_u32(const unsigned char* p) {
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
           std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

inline double get_f64(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = bits << 8 | p[i];
    return std::bit_cast<double>(bits);
}

}  // namespace detail

inline void write_image(const std::string& path, const Image& img) {
    std::string buf;
    buf.reserve(16 + 8 * img.count());
    buf.append(kImageMagic, 8);
    detail::put_u32(buf, std::uint32_t(img.size()));
    detail::put_u32(buf, std::uint32_t(img.size()));
    for (double v : img) detail::put_f64(buf, v);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f || !f.write(buf.data(), std::streamsize(buf.size())))
        throw IoError("cannot write " + path);
}

inline Image read_image(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    std::string buf((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
    if (buf.size() < 16)
        throw TruncatedError(path + ": shorter than the 16-byte header");
    if (std::memcmp(buf.data(), kImageMagic, 8) != 0)
        throw BadMagicError(path + ": not a raw image file (bad magic)");
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
    std::uint32_t rows = detail::get_u32(p + 8);
    std::uint32_t cols = detail::get_u32(p + 12);
    if (rows != cols)
        throw DimOverflowError(path + ": non-square image (" +
                               std::to_string(rows) + "x" +
                               std::to_string(cols) +
                               "); only square grids are supported");
    if (rows == 0 || rows > 1u << 15)
        throw DimOverflowError(path + ": dimension " + std::to_string(rows) +
                               " out of range");
    std::size_t need = 16 + 8 * std::size_t(rows) * std::size_t(cols);
    if (buf.size() < need)
        throw TruncatedError(path + ": expected " + std::to_string(need) +
                             " bytes, found " + std::to_string(buf.size()));
    Image img(static_cast<int>(rows));
    for (std::size_t k = 0; k < img.count(); ++k)
        img.data()[k] = detail::get_f64(p + 16 + 8 * k);
    return img;
}

// 16-bit PGM, full range mapped onto [0, 65535]; constant images come out
// black. Export only; there is no reader.
inline void write_pgm(const std::string& path, const Image& img) {
    double lo = img.data()[0], hi = img.data()[0];
    for (double v : img) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double scale = hi > lo ? 65535.0 / (hi - lo) : 0.0;
    std::string buf = "P5\n" + std::to_string(img.size()) + " " +
                      std::to_string(img.size()) + "\n65535\n";
    for (double v : img) {
        auto q = std::uint16_t((v - lo) * scale + 0.5);
        buf.push_back(char(q >> 8));
        buf.push_back(char(q & 0xff));
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f || !f.write(buf.data(), std::streamsize(buf.size())))
        throw IoError("cannot write " + path);
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f || !f.write(content.data(), std::streamsize(content.size())))
        throw IoError("cannot write " + path);
}

}  // namespace deconv
