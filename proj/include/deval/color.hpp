#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "deval/errors.hpp"

namespace deval {

struct Color {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    bool operator==(const Color&) const = default;
};

inline constexpr Color kWhite{255, 255, 255};
inline constexpr Color kBlack{0, 0, 0};

namespace detail {
inline int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}
} // namespace detail

// Parses "#RRGGBB" (case-insensitive hex digits).
inline Color parse_hex_color(const std::string& s) {
    if (s.size() != 7 || s[0] != '#') {
        throw ValidationError("color must be #RRGGBB, got \"" + s + "\"");
    }
    int v[6];
    for (int i = 0; i < 6; ++i) {
        v[i] = detail::hex_digit(s[static_cast<std::size_t>(i) + 1]);
        if (v[i] < 0) throw ValidationError("color must be #RRGGBB, got \"" + s + "\"");
    }
    return Color{static_cast<std::uint8_t>(v[0] * 16 + v[1]),
                 static_cast<std::uint8_t>(v[2] * 16 + v[3]),
                 static_cast<std::uint8_t>(v[4] * 16 + v[5])};
}

inline std::string to_hex(const Color& c) {
    static const char* digits = "0123456789ABCDEF";
    std::string s = "#______";
    s[1] = digits[c.r >> 4];
    s[2] = digits[c.r & 0xF];
    s[3] = digits[c.g >> 4];
    s[4] = digits[c.g & 0xF];
    s[5] = digits[c.b >> 4];
    s[6] = digits[c.b & 0xF];
    return s;
}

// Weighted luminance of gamma-encoded sRGB on the 0..255 scale
// (ITU-R BT.709 weights). Used by raster region statistics.
inline double bt709_luminance(const Color& c) {
    return 0.2126 * c.r + 0.7152 * c.g + 0.0722 * c.b;
}

// WCAG relative luminance in [0, 1]: channels on the 0..255 scale are
// linearized first. Real-valued channels are accepted so region means
// can be fed in directly.
inline double wcag_relative_luminance(double r8, double g8, double b8) {
    auto lin = [](double u8) {
        const double s = u8 / 255.0;
        return s <= 0.03928 ? s / 12.92 : std::pow((s + 0.055) / 1.055, 2.4);
    };
    return 0.2126 * lin(r8) + 0.7152 * lin(g8) + 0.0722 * lin(b8);
}

inline double wcag_relative_luminance(const Color& c) {
    return wcag_relative_luminance(c.r, c.g, c.b);
}

// WCAG contrast ratio between two relative luminances, in [1, 21].
inline double wcag_contrast_ratio(double lum_a, double lum_b) {
    const double lighter = std::max(lum_a, lum_b);
    const double darker = std::min(lum_a, lum_b);
    return (lighter + 0.05) / (darker + 0.05);
}

inline double wcag_contrast_ratio(const Color& a, const Color& b) {
    return wcag_contrast_ratio(wcag_relative_luminance(a), wcag_relative_luminance(b));
}

} // namespace deval
