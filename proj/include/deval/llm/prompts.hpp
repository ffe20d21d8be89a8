#pragma once

#include <string>

#include "deval/errors.hpp"
#include "deval/heuristics.hpp"

namespace deval {

// The judge prompts. The principle descriptions and the two scaffolds are
// frozen verbatim — spelling, spacing and all — because scores are only
// comparable across runs (and against prior results) when the prompt bytes
// are identical. Do not "fix" anything in the literals below.

inline const std::string& alignment_principle_prompt() {
    static const std::string text =
        "Correct alignment is an important aspect of design that has been modeled in other layout applications. \n"
        "Text and graphic elements are aligned on the page to indicate organizational ructure and aesthetics. \n"
        "Please evaluate the alignment of the input graphic design considering the following points.\n"
        "1. Alignment along with the horizontal and vertical direction is considered.\n"
        "2. The elements that align at a glance but slight misalignment are penalized because it is visually displeasing.\n"
        "3. Larger alignment groups (i.e., aligned elements that are distant from each other) are preferred as they produce simpler designs with more unity between elements.";
    return text;
}

inline const std::string& overlap_principle_prompt() {
    static const std::string text =
        "Overlapping elements are common in many designs and absent from others.\n"
        "Less or proper overlapping might be considered aesthetically pleasing, but others are not.\n"
        "Please consider the following points to evaluate the overlap.\n"
        "1. The three types of overlap, the overlap of elements on text, the overlap of text on graphics, and the overlap of graphics on other graphics, are considered.\n"
        "2. Hard-to-read text because of insufficient color contrast between a text and the background color is penalized.\n"
        "3. The graphic design that includes elements extending past the boundaries is also penalized.";
    return text;
}

inline const std::string& whitespace_principle_prompt() {
    static const std::string text =
        "White space in graphic designs is fundamental for readability and aesthetics.\n"
        "Element distance is also closely related to the principle of proximity, as elements placed near each other may appear to be related. \n"
        "White space also influences the overall design style; many modern designs use significant white space. White space 'trapped' between elements can also be distracting.\n"
        "Evaluate the white space considering the following points.\n"
        "1.A large ratio of white space that is not covered by design elements (e.g., graphics and tests) is preferred.\n"
        "2. However, the graphic design with a too large region of empty white space on the image is undesirable.\n"
        "3. The greater the distance between each element is preferred.\n"
        "4. Uniformed vertical spacing of each text element is preferred.\n"
        "5. Wider border margins for each element are preferred.";
    return text;
}

inline const std::string& principle_prompt(Principle p) {
    switch (p) {
        case Principle::alignment: return alignment_principle_prompt();
        case Principle::overlap: return overlap_principle_prompt();
        default: return whitespace_principle_prompt();
    }
}

inline constexpr const char* kPrincipleSlot = "[A design principle]";
inline constexpr const char* kImageSlot = "[image]";

inline const std::string& absolute_prompt_template() {
    static const std::string text =
        "You are an autonomous AI Assistant who aids designers by providing insightful, objective, and constructive critiques of graphic design projects. Your goals are: \"Deliver comprehensive and unbiased evaluations of graphic designs based on the following design principles.\"\n"
        "Grade seriously. The range of scores is from 1 to 10. A flawless design can earn 10 points, a mediocre design can only earn 7 points, a design with obvious shortcomings can only earn 4 points, and a very poor design can only earn 1-2 points.\n"
        "[A design principle]\n"
        "If the output is too long, it will be truncated. Only respond in JSON format, no other information. Example of output for a better graphic design:{\"score\": 6, explanation: \"(Please concisely explain the reason of the score.)\"}\n"
        "Please score the following images. [image]";
    return text;
}

inline const std::string& pairwise_prompt_template() {
    static const std::string text =
        "You are an autonomous AI Assistant who aids designers by providing insightful, objective, and constructive critiques of graphic design projects. Your goals are: \"Deliver comprehensive and unbiased evaluations of graphic designs based on the following design principles.\"\n"
        "[A design principle]\n"
        "If the output is too long, it will be truncated. Only respond in JSON format, no other information. Example of output for a better graphic design (a):{\"better_design\": \"a\", explanation: \"(Please concisely explain the reason of choice.)\"}\n"
        "If both images are the same quality, answer {\"better_design\": \"both\", explanation: \"(Please concisely explain the reason of choice.)\"}'\n"
        " Which of the following graphic designs has better quality regarding the above-described points? (a)[image] (b)[image]";
    return text;
}

namespace detail {
inline std::string replace_first(std::string text, const std::string& token,
                                 const std::string& value) {
    const std::size_t pos = text.find(token);
    if (pos == std::string::npos) {
        throw LlmError("prompt template is missing token " + token);
    }
    return text.replace(pos, token.size(), value);
}
} // namespace detail

// Full absolute-evaluation prompt for one principle. The [image] slot stays
// in the text; the request builder turns it into an image attachment.
inline std::string build_absolute_prompt(Principle p) {
    return detail::replace_first(absolute_prompt_template(), kPrincipleSlot,
                                 principle_prompt(p));
}

// Full pairwise prompt; two [image] slots mark where designs (a) and (b)
// attach.
inline std::string build_pairwise_prompt(Principle p) {
    return detail::replace_first(pairwise_prompt_template(), kPrincipleSlot,
                                 principle_prompt(p));
}

} // namespace deval
