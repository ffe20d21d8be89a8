// Minimal library walkthrough: build a document in code, score all three
// principles, perturb it, and show the damage.

#include <iostream>

#include "deval/heuristics.hpp"
#include "deval/perturb.hpp"

using namespace deval;

int main() {
    DesignDocument doc;
    doc.canvas = Canvas{800, 600, parse_hex_color("#FFFFFF"), std::nullopt};

    auto text = [](std::string id, double x, double y, double w, double h) {
        Element e;
        e.id = std::move(id);
        e.kind = ElementKind::text;
        e.bbox = Rect{x, y, w, h};
        e.color = parse_hex_color("#222222");
        e.font_size = h * 0.8;
        e.content = "sample";
        return e;
    };
    doc.elements.push_back(text("headline", 80, 80, 400, 48));
    doc.elements.push_back(text("sub", 80, 160, 300, 32));
    doc.elements.push_back(text("body", 80, 240, 360, 32));

    Element logo;
    logo.id = "logo";
    logo.kind = ElementKind::graphic;
    logo.bbox = Rect{560, 440, 160, 100};
    logo.color = parse_hex_color("#3366CC");
    doc.elements.push_back(logo);

    validate_document(doc);

    const HeuristicConfig cfg;
    std::cout << "original:\n";
    for (Principle p : kAllPrinciples) {
        const PrincipleScore s = score_principle(doc, p, cfg);
        std::cout << "  " << to_string(p) << " = " << s.value << "\n";
        for (const ScoreComponent& c : s.components) {
            std::cout << "    " << c.name << ": " << c.normalized << " (w=" << c.weight
                      << ")\n";
        }
    }

    const auto [shaken, record] = perturb_x(doc, PerturbLevel::large, 42);
    std::cout << "\nafter a large x perturbation (seed " << record.seed << "):\n";
    for (Principle p : kAllPrinciples) {
        std::cout << "  " << to_string(p) << " = "
                  << score_principle(shaken, p, cfg).value << "\n";
    }
    return 0;
}
