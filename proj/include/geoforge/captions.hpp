#pragma once

#include <map>
#include <string>
#include <vector>

#include "geoforge/remote.hpp"

namespace geoforge {

struct CaptionBundle {
    std::string osm_caption;    // attribute counts rendered to text
    std::string wiki_caption;   // nearby-place descriptions
    std::string final_caption;  // recaptioned, truncated to token budget
    std::string city_name;
    bool fallback = false;  // true when the rule-based path produced final_caption
};

struct CaptionConfig {
    int token_budget = 64;         // final caption, whitespace tokens
    int input_char_budget = 4000;  // raw text truncated before the model call
    int wiki_max_entries = 3;
    std::string prompt_template =
        "Rewrite the following map-tile notes as one concise descriptive caption "
        "for a city tile of {city}. Notes: {osm} {wiki}";
};

// counts of key=value pairs -> "3 house buildings, 1 primary road, ..."
std::string render_osm_caption(const std::map<std::string, long>& counts);

std::string render_wiki_caption(const std::vector<WikiEntry>& entries, int max_entries);

// Deterministic offline caption; "city tile of {city}" when counts are empty.
std::string rule_based_caption(const std::map<std::string, long>& counts,
                               const std::string& city);

// Keeps the first `budget` whitespace-separated tokens.
std::string truncate_tokens(const std::string& text, int budget);

// Full caption path: render sources, recaption via the model when available,
// fall back to the rule-based summary otherwise (flagged).
CaptionBundle assemble_caption(const std::map<std::string, long>& counts,
                               const std::vector<WikiEntry>& wiki_entries,
                               const std::string& city, const LlmClient& llm,
                               const CaptionConfig& cfg);

}  // namespace geoforge
