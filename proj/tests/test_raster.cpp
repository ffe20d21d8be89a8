#include <catch2/catch.hpp>

#include "deval/csv.hpp"
#include "deval/png_io.hpp"
#include "deval/raster.hpp"
#include "testutil.hpp"

using namespace deval;
using namespace testutil;

TEST_CASE("background-only canvas renders solid", "[raster]") {
    const RasterImage img = render(make_doc(10, 10, {}));
    REQUIRE(img.width == 10);
    REQUIRE(img.height == 10);
    for (const Color& c : img.pixels) CHECK(c == kWhite);
}

TEST_CASE("axis-aligned fill covers exactly its pixels", "[raster]") {
    const RasterImage img =
        render(make_doc(10, 10, {graphic_el("g", 0, 0, 5, 10, "#000000")}));
    int black = 0, white = 0;
    for (const Color& c : img.pixels) {
        if (c == kBlack) ++black;
        else if (c == kWhite) ++white;
    }
    CHECK(black == 50);
    CHECK(white == 50);
}

TEST_CASE("higher z paints over lower z", "[raster]") {
    const DesignDocument doc = make_doc(
        20, 20,
        {graphic_el("red", 0, 0, 12, 12, "#FF0000", 0), graphic_el("blue", 6, 6, 12, 12, "#0000FF", 1)});
    const RasterImage img = render(doc);
    CHECK(img.at(8, 8) == parse_hex_color("#0000FF")); // intersection
    CHECK(img.at(2, 2) == parse_hex_color("#FF0000"));
    CHECK(img.at(16, 16) == parse_hex_color("#0000FF"));
    CHECK(img.at(18, 2) == kWhite);
}

TEST_CASE("painter's algorithm holds on random documents", "[raster][property]") {
    Sampler rng(5001);
    for (int trial = 0; trial < 25; ++trial) {
        const DesignDocument doc = random_document(rng, 6);
        const RasterImage img = render(doc);
        // probe a handful of pixels against the brute-force rule
        for (int probe = 0; probe < 40; ++probe) {
            const int px = rng.uniform_int(0, doc.canvas.width - 1);
            const int py = rng.uniform_int(0, doc.canvas.height - 1);
            const double cx = px + 0.5, cy = py + 0.5;
            const Element* top = nullptr;
            for (const Element& e : doc.elements) {
                const bool covers = cx >= e.bbox.left() && cx < e.bbox.right() &&
                                    cy >= e.bbox.top() && cy < e.bbox.bottom();
                if (covers && (top == nullptr || e.z >= top->z)) top = &e;
            }
            const Color expected =
                top ? top->color.value_or(kBlack) : doc.canvas.effective_background();
            REQUIRE(img.at(px, py) == expected);
        }
    }
}

TEST_CASE("occupancy mask basics", "[raster]") {
    CHECK(occupancy_mask(make_doc(8, 8, {})).popcount() == 0);
    CHECK(occupancy_mask(make_doc(8, 8, {graphic_el("g", 0, 0, 8, 8)})).popcount() == 64);
    // fully off-canvas element sets nothing
    CHECK(occupancy_mask(make_doc(8, 8, {graphic_el("g", 100, 100, 5, 5)})).popcount() == 0);
    // partially off-canvas clips
    CHECK(occupancy_mask(make_doc(8, 8, {graphic_el("g", -4, 0, 8, 8)})).popcount() == 32);
}

TEST_CASE("region_stats on uniform and split regions", "[raster]") {
    const RasterImage white = render(make_doc(10, 10, {}));
    const RegionStats uniform = region_stats(white, Rect{0, 0, 10, 10});
    CHECK(uniform.mean_r == 255.0);
    CHECK(uniform.mean_g == 255.0);
    CHECK(uniform.mean_b == 255.0);
    CHECK(uniform.luminance_stddev == 0.0);

    // half black / half white: population stddev of {0, 255} is 127.5
    const RasterImage split =
        render(make_doc(10, 10, {graphic_el("g", 0, 0, 5, 10, "#000000")}));
    const RegionStats st = region_stats(split, Rect{0, 0, 10, 10});
    CHECK(st.luminance_stddev == Approx(127.5));
    CHECK(st.mean_r == Approx(127.5));

    CHECK_THROWS_AS(region_stats(white, Rect{50, 50, 5, 5}), StatsError);
}

TEST_CASE("png round trip is pixel exact", "[raster][png]") {
    RasterImage one(1, 1, kWhite);
    const RasterImage decoded1 = decode_png_image(encode_png(one));
    CHECK(decoded1 == one);

    Sampler rng(5002);
    const DesignDocument doc = random_document(rng, 6);
    const RasterImage img = render(doc);
    const RasterImage decoded = decode_png_image(encode_png(img));
    REQUIRE(decoded == img);
}

TEST_CASE("png decoder rejects junk", "[raster][png]") {
    CHECK_THROWS_AS(decode_png("not a png"), ParseError);
    std::string bytes = encode_png(RasterImage(4, 4, kWhite));
    bytes.resize(bytes.size() / 2); // truncated
    CHECK_THROWS_AS(decode_png(bytes), ParseError);
}

TEST_CASE("missing assets raise render errors naming the path", "[raster]") {
    Element g = graphic_el("g", 0, 0, 5, 5);
    g.asset = "missing.png";
    const DesignDocument doc = make_doc(10, 10, {g});
    CHECK_THROWS_AS(render(doc), RenderError);
    const AssetLoader loader{"/nonexistent_dir"};
    CHECK_THROWS_WITH(render(doc, &loader), Catch::Contains("missing.png"));
}

namespace {
// Test-only RGBA PNG writer (color type 6, filter None) so the decoder's
// alpha path gets exercised with bytes this library did not produce.
std::string encode_rgba_png(int w, int h, const std::vector<std::uint8_t>& rgba) {
    static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    std::string out(reinterpret_cast<const char*>(sig), 8);
    std::string ihdr;
    detail::put_u32be(ihdr, static_cast<std::uint32_t>(w));
    detail::put_u32be(ihdr, static_cast<std::uint32_t>(h));
    ihdr += std::string("\x08\x06\x00\x00\x00", 5);
    detail::put_chunk(out, "IHDR", ihdr);
    const std::size_t stride = static_cast<std::size_t>(w) * 4;
    std::vector<std::uint8_t> raw((stride + 1) * static_cast<std::size_t>(h), 0);
    for (int y = 0; y < h; ++y) {
        std::uint8_t* row = raw.data() + static_cast<std::size_t>(y) * (stride + 1);
        row[0] = 0;
        std::memcpy(row + 1, rgba.data() + static_cast<std::size_t>(y) * stride, stride);
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(bound);
    REQUIRE(compress2(compressed.data(), &bound, raw.data(),
                      static_cast<uLong>(raw.size()), 6) == Z_OK);
    detail::put_chunk(out, "IDAT",
                      std::string(reinterpret_cast<const char*>(compressed.data()), bound));
    detail::put_chunk(out, "IEND", "");
    return out;
}
} // namespace

TEST_CASE("graphic assets blit scaled with alpha over background", "[raster]") {
    const auto dir = fresh_temp_dir("assets");
    // 1x1 pure red, scaled over a 4x4 box
    RasterImage red(1, 1, parse_hex_color("#FF0000"));
    write_file_atomic(dir / "red.png", encode_png(red));
    // 1x1 blue at 50% alpha
    write_file_atomic(dir / "blue50.png", encode_rgba_png(1, 1, {0, 0, 255, 128}));

    Element g = graphic_el("g", 0, 0, 4, 4);
    g.asset = "red.png";
    Element t = graphic_el("t", 4, 4, 4, 4);
    t.asset = "blue50.png";
    const DesignDocument doc = make_doc(8, 8, {g, t});
    const AssetLoader loader{dir};
    const RasterImage img = render(doc, &loader);
    CHECK(img.at(1, 1) == parse_hex_color("#FF0000"));
    CHECK(img.at(1, 6) == kWhite);
    // 50% blue over white: r = g = (0*128 + 255*127 + 127)/255 = 127, b stays 255
    const Color mixed = img.at(5, 5);
    CHECK(static_cast<int>(mixed.r) == 127);
    CHECK(static_cast<int>(mixed.g) == 127);
    CHECK(static_cast<int>(mixed.b) == 255);
}

TEST_CASE("canvas background asset fills the canvas before elements", "[raster]") {
    const auto dir = fresh_temp_dir("bg_asset");
    RasterImage teal(2, 2, parse_hex_color("#008080"));
    write_file_atomic(dir / "bg.png", encode_png(teal));

    DesignDocument doc;
    doc.canvas.width = 6;
    doc.canvas.height = 6;
    doc.canvas.background_asset = "bg.png";
    doc.elements.push_back(graphic_el("g", 0, 0, 2, 2, "#FF0000", 1));
    validate_document(doc);

    const AssetLoader loader{dir};
    const RasterImage img = render(doc, &loader);
    CHECK(img.at(1, 1) == parse_hex_color("#FF0000")); // element on top
    CHECK(img.at(4, 4) == parse_hex_color("#008080")); // asset background
    CHECK_THROWS_AS(render(doc), RenderError); // no loader, background unresolvable
}

TEST_CASE("encode refuses degenerate dimensions", "[raster][png]") {
    RasterImage zero;
    CHECK_THROWS_AS(encode_png(zero), ValidationError);
}
