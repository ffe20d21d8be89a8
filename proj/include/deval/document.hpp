#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "deval/color.hpp"
#include "deval/errors.hpp"
#include "deval/geometry.hpp"

namespace deval {

inline constexpr int kDocumentFormatVersion = 1;

enum class ElementKind { text, graphic };

inline std::string to_string(ElementKind k) {
    return k == ElementKind::text ? "text" : "graphic";
}

// Canvas background is either a solid color or a raster asset reference
// (path relative to the document file). Defaults to solid white.
struct Canvas {
    int width = 0;
    int height = 0;
    std::optional<Color> background_color;
    std::optional<std::string> background_asset;

    double diagonal() const {
        return std::hypot(static_cast<double>(width), static_cast<double>(height));
    }
    Rect rect() const {
        return Rect{0.0, 0.0, static_cast<double>(width), static_cast<double>(height)};
    }
    Color effective_background() const { return background_color.value_or(kWhite); }

    bool operator==(const Canvas&) const = default;
};

struct Element {
    std::string id;
    ElementKind kind = ElementKind::graphic;
    Rect bbox;
    int z = 0;
    std::optional<Color> color;          // required for text, optional fill for graphic
    std::optional<double> font_size;     // text only
    std::optional<std::string> content;  // text only
    std::optional<std::string> asset;    // graphic only

    bool is_text() const { return kind == ElementKind::text; }

    bool operator==(const Element&) const = default;
};

struct DesignDocument {
    Canvas canvas;
    std::vector<Element> elements;
    std::map<std::string, std::string> meta;

    bool operator==(const DesignDocument&) const = default;
};

namespace detail {

inline void check(bool ok, const std::string& field, const std::string& why) {
    if (!ok) throw ValidationError(field + ": " + why);
}

inline const nlohmann::json& require_key(const nlohmann::json& j, const char* key,
                                          const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) throw ValidationError(path + "." + key + ": missing");
    return *it;
}

} // namespace detail

// Checks every documented invariant; throws ValidationError naming the
// offending field. parse_document calls this, and callers constructing
// documents programmatically can call it directly.
inline void validate_document(const DesignDocument& doc) {
    detail::check(doc.canvas.width >= 1, "canvas.width", "must be >= 1");
    detail::check(doc.canvas.height >= 1, "canvas.height", "must be >= 1");

    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < doc.elements.size(); ++i) {
        const Element& e = doc.elements[i];
        const std::string path = "elements[" + std::to_string(i) + "]";
        detail::check(!e.id.empty(), path + ".id", "must be non-empty");
        if (!seen.insert(e.id).second) {
            throw ValidationError(path + ".id: duplicate element id \"" + e.id + "\"");
        }
        detail::check(e.bbox.w > 0.0, path + ".bbox.w", "must be > 0");
        detail::check(e.bbox.h > 0.0, path + ".bbox.h", "must be > 0");
        if (e.is_text()) {
            detail::check(e.font_size.has_value(), path + ".font_size",
                          "required for text elements");
            detail::check(*e.font_size > 0.0, path + ".font_size", "must be > 0");
            detail::check(e.color.has_value(), path + ".color",
                          "required for text elements");
            detail::check(e.content.has_value(), path + ".content",
                          "required for text elements");
            detail::check(!e.asset.has_value(), path + ".asset",
                          "not allowed on text elements");
        } else {
            detail::check(!e.font_size.has_value(), path + ".font_size",
                          "only allowed on text elements");
            detail::check(!e.content.has_value(), path + ".content",
                          "only allowed on text elements");
        }
    }
}

namespace detail {

inline double json_number(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number()) throw ValidationError(path + ": must be a number");
    return j.get<double>();
}

inline int json_int(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ValidationError(path + ": must be an integer");
    return j.get<int>();
}

inline std::string json_string(const nlohmann::json& j, const std::string& path) {
    if (!j.is_string()) throw ValidationError(path + ": must be a string");
    return j.get<std::string>();
}

inline Rect parse_bbox(const nlohmann::json& j, const std::string& path) {
    if (!j.is_object()) throw ValidationError(path + ": must be an object");
    Rect r;
    r.x = json_number(require_key(j, "x", path), path + ".x");
    r.y = json_number(require_key(j, "y", path), path + ".y");
    r.w = json_number(require_key(j, "w", path), path + ".w");
    r.h = json_number(require_key(j, "h", path), path + ".h");
    return r;
}

} // namespace detail

// Parses the documented JSON document format. Unknown extra keys are
// ignored; unknown format versions are rejected.
inline DesignDocument parse_document(const std::string& bytes) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        // Recover a line number from the byte offset for a friendlier message.
        std::size_t line = 1;
        const std::size_t upto = std::min(bytes.size(), static_cast<std::size_t>(e.byte));
        for (std::size_t i = 0; i < upto; ++i) {
            if (bytes[i] == '\n') ++line;
        }
        throw ParseError("document is not valid JSON (line " + std::to_string(line) +
                         "): " + e.what());
    }
    if (!j.is_object()) throw ValidationError("document: top level must be an object");

    const int version = detail::json_int(detail::require_key(j, "version", "document"),
                                         "version");
    if (version != kDocumentFormatVersion) {
        throw ValidationError("version: unsupported format version " +
                              std::to_string(version));
    }

    DesignDocument doc;
    const nlohmann::json& jc = detail::require_key(j, "canvas", "document");
    doc.canvas.width = detail::json_int(detail::require_key(jc, "width", "canvas"),
                                        "canvas.width");
    doc.canvas.height = detail::json_int(detail::require_key(jc, "height", "canvas"),
                                         "canvas.height");
    if (auto it = jc.find("background"); it != jc.end() && !it->is_null()) {
        const std::string bg = detail::json_string(*it, "canvas.background");
        if (!bg.empty() && bg[0] == '#') {
            doc.canvas.background_color = parse_hex_color(bg);
        } else if (!bg.empty()) {
            doc.canvas.background_asset = bg;
        } else {
            throw ValidationError("canvas.background: must not be empty");
        }
    }

    if (auto it = j.find("elements"); it != j.end()) {
        if (!it->is_array()) throw ValidationError("elements: must be an array");
        std::size_t i = 0;
        for (const nlohmann::json& je : *it) {
            const std::string path = "elements[" + std::to_string(i) + "]";
            if (!je.is_object()) throw ValidationError(path + ": must be an object");
            Element e;
            e.id = detail::json_string(detail::require_key(je, "id", path), path + ".id");
            const std::string kind =
                detail::json_string(detail::require_key(je, "kind", path), path + ".kind");
            if (kind == "text") {
                e.kind = ElementKind::text;
            } else if (kind == "graphic") {
                e.kind = ElementKind::graphic;
            } else {
                throw ValidationError(path + ".kind: must be \"text\" or \"graphic\"");
            }
            e.bbox = detail::parse_bbox(detail::require_key(je, "bbox", path),
                                        path + ".bbox");
            if (auto z = je.find("z"); z != je.end()) {
                e.z = detail::json_int(*z, path + ".z");
            }
            if (auto c = je.find("color"); c != je.end() && !c->is_null()) {
                try {
                    e.color = parse_hex_color(detail::json_string(*c, path + ".color"));
                } catch (const ValidationError& err) {
                    throw ValidationError(path + ".color: " + err.what());
                }
            }
            if (auto f = je.find("font_size"); f != je.end() && !f->is_null()) {
                e.font_size = detail::json_number(*f, path + ".font_size");
            }
            if (auto c = je.find("content"); c != je.end() && !c->is_null()) {
                e.content = detail::json_string(*c, path + ".content");
            }
            if (auto a = je.find("asset"); a != je.end() && !a->is_null()) {
                e.asset = detail::json_string(*a, path + ".asset");
            }
            doc.elements.push_back(std::move(e));
            ++i;
        }
    }

    if (auto it = j.find("meta"); it != j.end()) {
        if (!it->is_object()) throw ValidationError("meta: must be an object");
        for (const auto& [k, v] : it->items()) {
            doc.meta[k] = detail::json_string(v, "meta." + k);
        }
    }

    validate_document(doc);
    return doc;
}

// Canonical serialization: fixed key order, sorted meta keys, two-space
// indent, trailing newline. parse_document(serialize_document(d)) == d,
// and equal documents serialize to identical bytes.
inline std::string serialize_document(const DesignDocument& doc) {
    using ojson = nlohmann::ordered_json;
    ojson j;
    j["version"] = kDocumentFormatVersion;
    ojson jc;
    jc["width"] = doc.canvas.width;
    jc["height"] = doc.canvas.height;
    if (doc.canvas.background_color) {
        jc["background"] = to_hex(*doc.canvas.background_color);
    } else if (doc.canvas.background_asset) {
        jc["background"] = *doc.canvas.background_asset;
    }
    j["canvas"] = std::move(jc);
    ojson elems = ojson::array();
    for (const Element& e : doc.elements) {
        ojson je;
        je["id"] = e.id;
        je["kind"] = to_string(e.kind);
        je["bbox"] = ojson{{"x", e.bbox.x}, {"y", e.bbox.y}, {"w", e.bbox.w}, {"h", e.bbox.h}};
        je["z"] = e.z;
        if (e.color) je["color"] = to_hex(*e.color);
        if (e.font_size) je["font_size"] = *e.font_size;
        if (e.content) je["content"] = *e.content;
        if (e.asset) je["asset"] = *e.asset;
        elems.push_back(std::move(je));
    }
    j["elements"] = std::move(elems);
    ojson jm = ojson::object();
    for (const auto& [k, v] : doc.meta) jm[k] = v;
    j["meta"] = std::move(jm);
    return j.dump(2) + "\n";
}

} // namespace deval
