#pragma once

#include <map>
#include <string>

namespace geoforge {

// Plain-text key-value configuration ("key = value", '#' comments). The key
// set is fixed up front; unknown keys fail fast so typos cannot silently
// fall back to defaults. Every run prints the resolved (post-override) map.
class Config {
public:
    static Config defaults();

    void load_file(const std::string& path);
    // "key=value" (CLI override form)
    void set_kv(const std::string& assignment);
    void set(const std::string& key, const std::string& value);

    const std::string& get_str(const std::string& key) const;
    long get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    // sorted "key = value" lines
    std::string resolved() const;

private:
    std::map<std::string, std::string> values_;
};

}  // namespace geoforge
