#include "geoforge/captions.hpp"

#include <algorithm>
#include <cctype>

#include "geoforge/common.hpp"

namespace geoforge {

namespace {

// "building=house" x3 -> "3 house buildings"; unknown keys stay literal.
std::string humanize(const std::string& pair, long n) {
    auto eq = pair.find('=');
    std::string key = eq == std::string::npos ? pair : pair.substr(0, eq);
    std::string value = eq == std::string::npos ? "" : pair.substr(eq + 1);
    std::string noun;
    if (key == "building") noun = value == "yes" ? "building" : value + " building";
    else if (key == "highway") noun = value + " road";
    else if (key == "landuse" || key == "natural" || key == "leisure") noun = value + " area";
    else noun = pair + " feature";
    std::string s = std::to_string(n) + " " + noun;
    if (n != 1) s += "s";
    return s;
}

}  // namespace

std::string render_osm_caption(const std::map<std::string, long>& counts) {
    // order by count desc, then key asc, for a stable caption
    std::vector<std::pair<std::string, long>> items(counts.begin(), counts.end());
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::string out;
    for (const auto& [pair, n] : items) {
        if (!out.empty()) out += ", ";
        out += humanize(pair, n);
    }
    return out;
}

std::string render_wiki_caption(const std::vector<WikiEntry>& entries, int max_entries) {
    std::string out;
    int used = 0;
    for (const WikiEntry& e : entries) {
        if (used >= max_entries) break;
        std::string text = trim(e.extract.empty() ? e.title : e.title + ": " + e.extract);
        if (text.empty()) continue;
        if (!out.empty()) out += " ";
        out += text;
        ++used;
    }
    return out;
}

std::string rule_based_caption(const std::map<std::string, long>& counts,
                               const std::string& city) {
    std::string body = render_osm_caption(counts);
    if (body.empty()) return "city tile of " + city;
    return "city tile of " + city + " with " + body;
}

std::string truncate_tokens(const std::string& text, int budget) {
    if (budget <= 0) return "";
    std::string out;
    int tokens = 0;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n && tokens < budget) {
        while (i < n && std::isspace((unsigned char)text[i])) ++i;
        size_t start = i;
        while (i < n && !std::isspace((unsigned char)text[i])) ++i;
        if (i == start) break;
        if (!out.empty()) out += " ";
        out += text.substr(start, i - start);
        ++tokens;
    }
    return out;
}

namespace {

std::string substitute(std::string tmpl, const std::string& key, const std::string& value) {
    const std::string needle = "{" + key + "}";
    size_t pos;
    while ((pos = tmpl.find(needle)) != std::string::npos)
        tmpl.replace(pos, needle.size(), value);
    return tmpl;
}

}  // namespace

CaptionBundle assemble_caption(const std::map<std::string, long>& counts,
                               const std::vector<WikiEntry>& wiki_entries,
                               const std::string& city, const LlmClient& llm,
                               const CaptionConfig& cfg) {
    CaptionBundle b;
    b.city_name = city;
    b.osm_caption = render_osm_caption(counts);
    b.wiki_caption = render_wiki_caption(wiki_entries, cfg.wiki_max_entries);

    std::string raw = trim(b.osm_caption + " " + b.wiki_caption);
    if (raw.empty()) {
        b.final_caption = "city tile of " + city;
        b.fallback = true;
        return b;
    }
    if (llm.enabled()) {
        if ((int)raw.size() > cfg.input_char_budget) raw.resize(cfg.input_char_budget);
        std::string prompt = substitute(cfg.prompt_template, "city", city);
        prompt = substitute(prompt, "osm", truncate_tokens(b.osm_caption, cfg.input_char_budget));
        prompt = substitute(prompt, "wiki", b.wiki_caption.substr(
                                                0, std::min<size_t>(b.wiki_caption.size(),
                                                                    (size_t)cfg.input_char_budget)));
        try {
            b.final_caption = truncate_tokens(trim(llm.complete(prompt)), cfg.token_budget);
            if (!b.final_caption.empty()) return b;
        } catch (const std::exception&) {
            // fall through to the rule-based path
        }
    }
    b.final_caption = truncate_tokens(rule_based_caption(counts, city), cfg.token_budget);
    b.fallback = true;
    return b;
}

}  // namespace geoforge
