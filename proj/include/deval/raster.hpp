#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "deval/color.hpp"
#include "deval/document.hpp"
#include "deval/errors.hpp"
#include "deval/geometry.hpp"
#include "deval/png_io.hpp"

namespace deval {

struct RasterImage {
    int width = 0;
    int height = 0;
    std::vector<Color> pixels; // row-major

    RasterImage() = default;
    RasterImage(int w, int h, Color fill = kWhite)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

    Color& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    const Color& at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }

    bool operator==(const RasterImage&) const = default;
};

// True where the pixel center lies inside at least one element bbox.
struct OccupancyMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    OccupancyMask() = default;
    OccupancyMask(int w, int h)
        : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

    bool test(int x, int y) const {
        return bits[static_cast<std::size_t>(y) * width + x] != 0;
    }
    void set(int x, int y) { bits[static_cast<std::size_t>(y) * width + x] = 1; }
    long long popcount() const {
        long long n = 0;
        for (std::uint8_t b : bits) n += b;
        return n;
    }
};

namespace detail {

// Pixel columns whose centers fall inside [lo, hi), clamped to [0, limit).
struct PixelSpan {
    int begin = 0;
    int end = 0;
};

inline PixelSpan pixel_span(double lo, double hi, int limit) {
    int b = static_cast<int>(std::ceil(lo - 0.5));
    int e = static_cast<int>(std::ceil(hi - 0.5));
    b = std::max(b, 0);
    e = std::min(e, limit);
    if (e < b) e = b;
    return PixelSpan{b, e};
}

} // namespace detail

// Loads PNG assets referenced by documents, relative to a base directory.
class AssetLoader {
public:
    AssetLoader() = default;
    explicit AssetLoader(std::filesystem::path base_dir) : base_dir_(std::move(base_dir)) {}

    Pixmap load(const std::string& ref) const {
        const std::filesystem::path path =
            base_dir_.empty() ? std::filesystem::path(ref) : base_dir_ / ref;
        std::ifstream in(path, std::ios::binary);
        if (!in) throw RenderError("asset not found: " + path.string());
        std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
        try {
            return decode_png(bytes);
        } catch (const ParseError& e) {
            throw RenderError("asset " + path.string() + ": " + e.what());
        }
    }

private:
    std::filesystem::path base_dir_;
};

namespace detail {

inline void blit_rect(RasterImage& img, const Rect& r, Color c) {
    const PixelSpan xs = pixel_span(r.left(), r.right(), img.width);
    const PixelSpan ys = pixel_span(r.top(), r.bottom(), img.height);
    for (int y = ys.begin; y < ys.end; ++y) {
        for (int x = xs.begin; x < xs.end; ++x) img.at(x, y) = c;
    }
}

// Nearest-neighbor scale of the pixmap into the bbox; RGBA assets are
// alpha-composited over whatever is already painted.
inline void blit_pixmap(RasterImage& img, const Rect& r, const Pixmap& pm) {
    const PixelSpan xs = pixel_span(r.left(), r.right(), img.width);
    const PixelSpan ys = pixel_span(r.top(), r.bottom(), img.height);
    for (int y = ys.begin; y < ys.end; ++y) {
        const double v = (y + 0.5 - r.top()) / r.h;
        int sy = static_cast<int>(v * pm.height);
        sy = std::clamp(sy, 0, pm.height - 1);
        for (int x = xs.begin; x < xs.end; ++x) {
            const double u = (x + 0.5 - r.left()) / r.w;
            int sx = static_cast<int>(u * pm.width);
            sx = std::clamp(sx, 0, pm.width - 1);
            const std::uint8_t* s = pm.at(sx, sy);
            if (pm.channels == 4) {
                const int a = s[3];
                Color& dst = img.at(x, y);
                dst.r = static_cast<std::uint8_t>((s[0] * a + dst.r * (255 - a) + 127) / 255);
                dst.g = static_cast<std::uint8_t>((s[1] * a + dst.g * (255 - a) + 127) / 255);
                dst.b = static_cast<std::uint8_t>((s[2] * a + dst.b * (255 - a) + 127) / 255);
            } else {
                img.at(x, y) = Color{s[0], s[1], s[2]};
            }
        }
    }
}

} // namespace detail

// Deterministic flat rasterization: background first, then elements in
// ascending z (list order breaks ties). Text paints as a filled rectangle
// of its text color; glyphs are out of scope because every downstream
// metric only needs occupancy, contrast and spacing. Pixel centers are
// sampled with no anti-aliasing.
inline RasterImage render(const DesignDocument& doc,
                          const AssetLoader* assets = nullptr) {
    RasterImage img(doc.canvas.width, doc.canvas.height, doc.canvas.effective_background());

    if (doc.canvas.background_asset) {
        if (!assets) throw RenderError("asset not found: " + *doc.canvas.background_asset);
        detail::blit_pixmap(img, doc.canvas.rect(), assets->load(*doc.canvas.background_asset));
    }

    // stable sort keeps list order for equal z
    std::vector<const Element*> order;
    order.reserve(doc.elements.size());
    for (const Element& e : doc.elements) order.push_back(&e);
    std::stable_sort(order.begin(), order.end(),
                     [](const Element* a, const Element* b) { return a->z < b->z; });

    for (const Element* e : order) {
        if (e->kind == ElementKind::graphic && e->asset) {
            if (!assets) throw RenderError("asset not found: " + *e->asset);
            detail::blit_pixmap(img, e->bbox, assets->load(*e->asset));
        } else {
            detail::blit_rect(img, e->bbox, e->color.value_or(kBlack));
        }
    }
    return img;
}

inline OccupancyMask occupancy_mask(const DesignDocument& doc) {
    OccupancyMask mask(doc.canvas.width, doc.canvas.height);
    for (const Element& e : doc.elements) {
        const detail::PixelSpan xs = detail::pixel_span(e.bbox.left(), e.bbox.right(), mask.width);
        const detail::PixelSpan ys = detail::pixel_span(e.bbox.top(), e.bbox.bottom(), mask.height);
        for (int y = ys.begin; y < ys.end; ++y) {
            for (int x = xs.begin; x < xs.end; ++x) mask.set(x, y);
        }
    }
    return mask;
}

struct RegionStats {
    double mean_r = 0.0;
    double mean_g = 0.0;
    double mean_b = 0.0;
    double luminance_stddev = 0.0; // population stddev of BT.709 luminance
    long long pixel_count = 0;
};

// Statistics over pixels whose centers lie in rect ∩ canvas.
inline RegionStats region_stats(const RasterImage& img, const Rect& rect) {
    const detail::PixelSpan xs = detail::pixel_span(rect.left(), rect.right(), img.width);
    const detail::PixelSpan ys = detail::pixel_span(rect.top(), rect.bottom(), img.height);
    const long long n =
        static_cast<long long>(xs.end - xs.begin) * (ys.end - ys.begin);
    if (n <= 0) throw StatsError("region_stats: rect does not intersect the canvas");

    double sr = 0, sg = 0, sb = 0, sl = 0;
    for (int y = ys.begin; y < ys.end; ++y) {
        for (int x = xs.begin; x < xs.end; ++x) {
            const Color& c = img.at(x, y);
            sr += c.r;
            sg += c.g;
            sb += c.b;
            sl += bt709_luminance(c);
        }
    }
    RegionStats st;
    st.pixel_count = n;
    st.mean_r = sr / n;
    st.mean_g = sg / n;
    st.mean_b = sb / n;
    const double mean_l = sl / n;
    // two-pass variance: exact zero on uniform regions
    double var = 0.0;
    for (int y = ys.begin; y < ys.end; ++y) {
        for (int x = xs.begin; x < xs.end; ++x) {
            const double d = bt709_luminance(img.at(x, y)) - mean_l;
            var += d * d;
        }
    }
    st.luminance_stddev = std::sqrt(var / n);
    return st;
}

inline std::string encode_png(const RasterImage& img) {
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(img.width) * img.height * 3);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        rgb[i * 3] = img.pixels[i].r;
        rgb[i * 3 + 1] = img.pixels[i].g;
        rgb[i * 3 + 2] = img.pixels[i].b;
    }
    return encode_png_rgb(img.width, img.height, rgb.data());
}

inline RasterImage decode_png_image(const std::string& bytes) {
    const Pixmap pm = decode_png(bytes);
    RasterImage img(pm.width, pm.height);
    for (int y = 0; y < pm.height; ++y) {
        for (int x = 0; x < pm.width; ++x) {
            const std::uint8_t* s = pm.at(x, y);
            if (pm.channels == 4) {
                // composite over white, matching render's default background
                const int a = s[3];
                img.at(x, y) = Color{
                    static_cast<std::uint8_t>((s[0] * a + 255 * (255 - a) + 127) / 255),
                    static_cast<std::uint8_t>((s[1] * a + 255 * (255 - a) + 127) / 255),
                    static_cast<std::uint8_t>((s[2] * a + 255 * (255 - a) + 127) / 255)};
            } else {
                img.at(x, y) = Color{s[0], s[1], s[2]};
            }
        }
    }
    return img;
}

} // namespace deval
