#include "geoforge/config.hpp"

#include <charconv>
#include <sstream>

#include "geoforge/common.hpp"

namespace geoforge {

Config Config::defaults() {
    Config c;
    c.values_ = {
        {"zoom", "15"},
        {"tile_pixels", "64"},
        {"seed", "0"},
        {"eval_fraction", "0.2"},
        {"city_name", ""},
        {"allowlist", ""},
        {"caption.token_budget", "64"},
        {"caption.input_char_budget", "4000"},
        {"caption.wiki_radius_m", "500"},
        {"caption.wiki_max_entries", "3"},
        {"caption.use_wiki", "false"},
        {"caption.use_llm", "false"},
        {"caption.llm_model", "recaption-small"},
        {"model.img_size", "64"},
        {"model.base_ch", "32"},
        {"model.cond_width", "128"},
        {"model.embed_dim", "64"},
        {"model.text_dim", "64"},
        {"schedule.T", "1000"},
        {"schedule.beta1", "0.0001"},
        {"schedule.betaT", "0.02"},
        {"train.steps", "1000"},
        {"train.batch", "8"},
        {"train.lr", "0.001"},
        {"train.log_every", "50"},
        {"train.ckpt_every", "500"},
        {"train.align_steps", "0"},
        {"sample.ddim_steps", "50"},
        {"assess.mapped_ratio", "1.6"},
        {"assess.partial_ratio", "5.0"},
        {"assess.mapped_fraction", "0.8"},
        {"assess.partial_fraction", "0.25"},
        {"eval.gn_count_mode", "per-tile-mean"},
        {"synth.style", "grid"},
        {"synth.block_min_m", "90"},
        {"synth.block_max_m", "170"},
        {"synth.density", "1.0"},
    };
    return c;
}

void Config::load_file(const std::string& path) {
    std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string s = trim(line);
        if (s.empty()) continue;
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        try {
            set(key, value);
        } catch (const DataError& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void Config::set_kv(const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw DataError("override '" + assignment + "' is not of the form key=value");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Config::set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw DataError("unknown config key '" + key + "'");
    it->second = value;
}

const std::string& Config::get_str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw DataError("unknown config key '" + key + "'");
    return it->second;
}

long Config::get_int(const std::string& key) const {
    const std::string& v = get_str(key);
    long out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw DataError("config key '" + key + "': '" + v + "' is not an integer");
    return out;
}

double Config::get_double(const std::string& key) const {
    const std::string& v = get_str(key);
    try {
        size_t pos = 0;
        double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw DataError("config key '" + key + "': '" + v + "' is not a number");
    }
}

bool Config::get_bool(const std::string& key) const {
    const std::string& v = lowercase(get_str(key));
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw DataError("config key '" + key + "': '" + get_str(key) + "' is not a boolean");
}

std::string Config::resolved() const {
    std::ostringstream out;
    for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
    return out.str();
}

}  // namespace geoforge
