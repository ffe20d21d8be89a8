#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include <zlib.h>

#include "deval/color.hpp"
#include "deval/errors.hpp"

namespace deval {

// Decoded PNG pixels, 8-bit, 3 (RGB) or 4 (RGBA) channels, row-major.
struct Pixmap {
    int width = 0;
    int height = 0;
    int channels = 3;
    std::vector<std::uint8_t> data;

    const std::uint8_t* at(int x, int y) const {
        return data.data() + (static_cast<std::size_t>(y) * width + x) * channels;
    }
};

namespace detail {

inline void put_u32be(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>(v & 0xFF));
}

inline std::uint32_t get_u32be(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) |
           (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | p[3];
}

inline void put_chunk(std::string& out, const char type[4], const std::string& payload) {
    put_u32be(out, static_cast<std::uint32_t>(payload.size()));
    const std::size_t crc_start = out.size();
    out.append(type, 4);
    out += payload;
    const auto* p = reinterpret_cast<const Bytef*>(out.data() + crc_start);
    const uLong crc = ::crc32(0L, p, static_cast<uInt>(4 + payload.size()));
    put_u32be(out, static_cast<std::uint32_t>(crc));
}

inline int paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

} // namespace detail

// Encodes 8-bit RGB pixels as a PNG (color type 2, filter None, zlib
// deflate). Row-major, 3 bytes per pixel.
inline std::string encode_png_rgb(int width, int height, const std::uint8_t* rgb) {
    if (width <= 0 || height <= 0) throw ValidationError("png: image must be non-empty");
    static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    std::string out(reinterpret_cast<const char*>(sig), 8);

    std::string ihdr;
    detail::put_u32be(ihdr, static_cast<std::uint32_t>(width));
    detail::put_u32be(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // color type: truecolor
    ihdr.push_back(0);  // compression
    ihdr.push_back(0);  // filter method
    ihdr.push_back(0);  // no interlace
    detail::put_chunk(out, "IHDR", ihdr);

    const std::size_t stride = static_cast<std::size_t>(width) * 3;
    std::vector<std::uint8_t> raw((stride + 1) * static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) {
        std::uint8_t* row = raw.data() + static_cast<std::size_t>(y) * (stride + 1);
        row[0] = 0; // filter: None
        std::memcpy(row + 1, rgb + static_cast<std::size_t>(y) * stride, stride);
    }

    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(bound);
    if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()),
                  Z_DEFAULT_COMPRESSION) != Z_OK) {
        throw IoError("png: deflate failed");
    }
    detail::put_chunk(out, "IDAT",
                      std::string(reinterpret_cast<const char*>(compressed.data()), bound));
    detail::put_chunk(out, "IEND", "");
    return out;
}

// Decodes an 8-bit non-interlaced truecolor PNG (RGB or RGBA). This covers
// everything this library writes plus typical asset exports; other color
// types are rejected with a clear error.
inline Pixmap decode_png(const std::string& bytes) {
    static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    if (bytes.size() < 8 || std::memcmp(bytes.data(), sig, 8) != 0) {
        throw ParseError("png: bad signature");
    }
    const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data());
    std::size_t pos = 8;
    Pixmap img;
    std::string idat;
    bool saw_ihdr = false, saw_iend = false;

    while (pos + 12 <= bytes.size() && !saw_iend) {
        const std::uint32_t len = detail::get_u32be(p + pos);
        if (pos + 12 + len > bytes.size()) throw ParseError("png: truncated chunk");
        const char* type = bytes.data() + pos + 4;
        const std::uint8_t* payload = p + pos + 8;
        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) throw ParseError("png: bad IHDR");
            img.width = static_cast<int>(detail::get_u32be(payload));
            img.height = static_cast<int>(detail::get_u32be(payload + 4));
            const int depth = payload[8], color = payload[9], interlace = payload[12];
            if (depth != 8) throw ParseError("png: only 8-bit depth supported");
            if (color == 2) {
                img.channels = 3;
            } else if (color == 6) {
                img.channels = 4;
            } else {
                throw ParseError("png: only RGB/RGBA color types supported");
            }
            if (interlace != 0) throw ParseError("png: interlacing not supported");
            if (img.width <= 0 || img.height <= 0) throw ParseError("png: bad dimensions");
            saw_ihdr = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.append(reinterpret_cast<const char*>(payload), len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            saw_iend = true;
        }
        pos += 12 + len;
    }
    if (!saw_ihdr || idat.empty()) throw ParseError("png: missing IHDR or IDAT");

    const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels;
    const std::size_t raw_size = (stride + 1) * static_cast<std::size_t>(img.height);
    std::vector<std::uint8_t> raw(raw_size);
    uLongf out_len = static_cast<uLongf>(raw_size);
    const int zrc = uncompress(raw.data(), &out_len,
                               reinterpret_cast<const Bytef*>(idat.data()),
                               static_cast<uLong>(idat.size()));
    if (zrc != Z_OK || out_len != raw_size) throw ParseError("png: inflate failed");

    img.data.assign(stride * static_cast<std::size_t>(img.height), 0);
    const int bpp = img.channels;
    std::vector<std::uint8_t> prev(stride, 0);
    for (int y = 0; y < img.height; ++y) {
        const std::uint8_t* src = raw.data() + static_cast<std::size_t>(y) * (stride + 1);
        const std::uint8_t filter = src[0];
        std::uint8_t* dst = img.data.data() + static_cast<std::size_t>(y) * stride;
        for (std::size_t i = 0; i < stride; ++i) {
            const int x = src[1 + i];
            const int a = i >= static_cast<std::size_t>(bpp) ? dst[i - bpp] : 0;
            const int b = prev[i];
            const int c = i >= static_cast<std::size_t>(bpp) ? prev[i - bpp] : 0;
            int v;
            switch (filter) {
                case 0: v = x; break;
                case 1: v = x + a; break;
                case 2: v = x + b; break;
                case 3: v = x + (a + b) / 2; break;
                case 4: v = x + detail::paeth(a, b, c); break;
                default: throw ParseError("png: unknown filter type");
            }
            dst[i] = static_cast<std::uint8_t>(v & 0xFF);
        }
        std::memcpy(prev.data(), dst, stride);
    }
    return img;
}

} // namespace deval
