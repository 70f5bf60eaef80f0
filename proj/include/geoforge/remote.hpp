#pragma once

#include <string>
#include <vector>

#include "geoforge/tilegrid.hpp"

namespace geoforge {

// Content-addressed response cache on disk; empty dir disables it.
struct CacheStore {
    std::string dir;

    bool enabled() const { return !dir.empty(); }
    bool get(const std::string& key, std::string& out) const;
    void put(const std::string& key, const std::string& value) const;

    // Stable key for a namespaced payload (request identity), hex string.
    static std::string content_key(const std::string& ns, const std::string& payload);
};

struct UrlParts {
    std::string scheme, host, path;
    int port = 0;
};
UrlParts parse_url(const std::string& url);

struct WikiEntry {
    std::string title;
    std::string extract;
    double distance_m = 0;
};

// MediaWiki GeoSearch client (generator=geosearch + extracts), cache-first.
class WikiClient {
  public:
    WikiClient(std::string base_url, CacheStore cache, int max_retries = 3,
               int max_in_flight = 4);

    bool enabled() const { return !base_url_.empty(); }
    // Entries sorted by distance from center. radius_m == 0 → empty, no call.
    std::vector<WikiEntry> geosearch(LonLat center, double radius_m) const;

  private:
    std::string base_url_;
    CacheStore cache_;
    int max_retries_;
    int max_in_flight_;
};

// Chat-completion client; POSTs {model, messages} and returns the reply text.
class LlmClient {
  public:
    LlmClient(std::string endpoint_url, std::string api_key, std::string model,
              CacheStore cache, int max_retries = 3, int max_in_flight = 4);

    bool enabled() const { return !endpoint_url_.empty(); }
    // Throws DataError on failure after retries (caller decides fallback).
    std::string complete(const std::string& prompt) const;

  private:
    std::string endpoint_url_, api_key_, model_;
    CacheStore cache_;
    int max_retries_;
    int max_in_flight_;
};

// Shared HTTP helper: bounded-retry request through the cache.
// method is "GET" or "POST"; body/content_type used for POST only.
std::string cached_http_request(const CacheStore& cache, const std::string& cache_ns,
                                const std::string& method, const std::string& url,
                                const std::string& body, const std::string& content_type,
                                const std::string& bearer, int max_retries,
                                int max_in_flight);

}  // namespace geoforge
