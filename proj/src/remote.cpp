#include "geoforge/remote.hpp"

#include <algorithm>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "geoforge/common.hpp"

namespace geoforge {

namespace fs = std::filesystem;
using json = nlohmann::json;

bool CacheStore::get(const std::string& key, std::string& out) const {
    if (!enabled()) return false;
    fs::path p = fs::path(dir) / (key + ".json");
    if (!fs::exists(p)) return false;
    out = read_text_file(p.string());
    return true;
}

void CacheStore::put(const std::string& key, const std::string& value) const {
    if (!enabled()) return;
    fs::create_directories(dir);
    fs::path final_path = fs::path(dir) / (key + ".json");
    fs::path tmp = final_path;
    tmp += ".tmp";
    write_text_file(tmp.string(), value);
    fs::rename(tmp, final_path);
}

std::string CacheStore::content_key(const std::string& ns, const std::string& payload) {
    uint64_t a = fnv1a64(payload);
    uint64_t b = fnv1a64(payload, 0x9e3779b97f4a7c15ull);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s-%016llx%016llx", ns.c_str(),
                  (unsigned long long)a, (unsigned long long)b);
    return buf;
}

UrlParts parse_url(const std::string& url) {
    UrlParts u;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw DataError("bad url (no scheme): " + url);
    u.scheme = url.substr(0, scheme_end);
    std::string rest = url.substr(scheme_end + 3);
    auto slash = rest.find('/');
    std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
    u.path = slash == std::string::npos ? "/" : rest.substr(slash);
    auto colon = hostport.find(':');
    if (colon == std::string::npos) {
        u.host = hostport;
        u.port = u.scheme == "https" ? 443 : 80;
    } else {
        u.host = hostport.substr(0, colon);
        u.port = std::stoi(hostport.substr(colon + 1));
    }
    if (u.host.empty()) throw DataError("bad url (no host): " + url);
    return u;
}

namespace {

// Per-host in-flight limiter; guards against flooding an endpoint when tiles
// are processed in parallel.
class InflightGate {
  public:
    InflightGate(const std::string& host, int limit) : host_(host), limit_(std::max(1, limit)) {
        std::unique_lock lk(mu());
        auto& st = state()[host_];
        cv().wait(lk, [&] { return st < limit_; });
        ++st;
    }
    ~InflightGate() {
        {
            std::lock_guard lk(mu());
            --state()[host_];
        }
        cv().notify_all();
    }

  private:
    static std::mutex& mu() {
        static std::mutex m;
        return m;
    }
    static std::condition_variable& cv() {
        static std::condition_variable c;
        return c;
    }
    static std::map<std::string, int>& state() {
        static std::map<std::string, int> s;
        return s;
    }
    std::string host_;
    int limit_;
};

std::string http_once(const UrlParts& u, const std::string& method, const std::string& body,
                      const std::string& content_type, const std::string& bearer) {
    if (u.scheme != "http")
        throw DataError("unsupported url scheme '" + u.scheme + "' (only http endpoints)");
    httplib::Client cli(u.host, u.port);
    cli.set_connection_timeout(5, 0);
    cli.set_read_timeout(30, 0);
    httplib::Headers headers;
    if (!bearer.empty()) headers.emplace("Authorization", "Bearer " + bearer);
    httplib::Result res = method == "POST"
                              ? cli.Post(u.path, headers, body, content_type)
                              : cli.Get(u.path, headers);
    if (!res) throw DataError("http transport error: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
        throw DataError("http status " + std::to_string(res->status));
    return res->body;
}

}  // namespace

std::string cached_http_request(const CacheStore& cache, const std::string& cache_ns,
                                const std::string& method, const std::string& url,
                                const std::string& body, const std::string& content_type,
                                const std::string& bearer, int max_retries,
                                int max_in_flight) {
    const std::string key = CacheStore::content_key(cache_ns, method + " " + url + "\n" + body);
    std::string cached;
    if (cache.get(key, cached)) return cached;

    UrlParts u = parse_url(url);
    std::string last_err = "no attempts made";
    for (int attempt = 0; attempt < std::max(1, max_retries); ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(100 * attempt));
        try {
            InflightGate gate(u.host, max_in_flight);
            std::string response = http_once(u, method, body, content_type, bearer);
            cache.put(key, response);
            return response;
        } catch (const std::exception& e) {
            last_err = e.what();
        }
    }
    throw DataError("request to " + url + " failed after " + std::to_string(max_retries) +
                    " attempts: " + last_err);
}

WikiClient::WikiClient(std::string base_url, CacheStore cache, int max_retries,
                       int max_in_flight)
    : base_url_(std::move(base_url)),
      cache_(std::move(cache)),
      max_retries_(max_retries),
      max_in_flight_(max_in_flight) {}

std::vector<WikiEntry> WikiClient::geosearch(LonLat center, double radius_m) const {
    if (radius_m <= 0) return {};
    if (!enabled()) throw DataError("wiki geosearch requested but no endpoint configured");

    char coord[96];
    std::snprintf(coord, sizeof(coord), "%.6f%%7C%.6f", center.lat, center.lon);
    std::string url = base_url_ +
                      "?action=query&format=json&generator=geosearch"
                      "&ggscoord=" + coord +
                      "&ggsradius=" + format_double(radius_m) +
                      "&ggslimit=50&prop=extracts%7Ccoordinates&explaintext=1&exintro=1"
                      "&codistancefrompoint=" + coord;
    std::string body =
        cached_http_request(cache_, "wiki", "GET", url, "", "", "", max_retries_, max_in_flight_);

    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("geosearch response is not json: ") + e.what());
    }
    std::vector<WikiEntry> out;
    if (doc.contains("query") && doc["query"].contains("pages")) {
        for (const auto& [_, page] : doc["query"]["pages"].items()) {
            WikiEntry e;
            e.title = page.value("title", "");
            e.extract = page.value("extract", "");
            if (page.contains("coordinates") && page["coordinates"].is_array() &&
                !page["coordinates"].empty())
                e.distance_m = page["coordinates"][0].value("dist", 0.0);
            out.push_back(std::move(e));
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const WikiEntry& a, const WikiEntry& b) {
        if (a.distance_m != b.distance_m) return a.distance_m < b.distance_m;
        return a.title < b.title;
    });
    return out;
}

LlmClient::LlmClient(std::string endpoint_url, std::string api_key, std::string model,
                     CacheStore cache, int max_retries, int max_in_flight)
    : endpoint_url_(std::move(endpoint_url)),
      api_key_(std::move(api_key)),
      model_(std::move(model)),
      cache_(std::move(cache)),
      max_retries_(max_retries),
      max_in_flight_(max_in_flight) {}

std::string LlmClient::complete(const std::string& prompt) const {
    if (!enabled()) throw DataError("llm completion requested but no endpoint configured");
    json req = {{"model", model_},
                {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
                {"temperature", 0}};
    std::string body = cached_http_request(cache_, "llm", "POST", endpoint_url_, req.dump(),
                                           "application/json", api_key_, max_retries_,
                                           max_in_flight_);
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("llm response is not json: ") + e.what());
    }
    try {
        return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw DataError(std::string("llm response missing choices[0].message.content: ") +
                        e.what());
    }
}

}  // namespace geoforge
