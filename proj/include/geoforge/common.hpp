#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace geoforge {

inline constexpr double kPi = 3.14159265358979323846;

// Input/content problems (missing files, malformed documents). CLI exit code 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures (non-finite loss, eigensolver breakdown). CLI exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// FNV-1a, used for cache keys, dataset splits and the caption hash features.
uint64_t fnv1a64(std::string_view s, uint64_t seed = 0xcbf29ce484222325ull);
uint64_t hash_combine(uint64_t a, uint64_t b);

// SplitMix64 step; the basis for coordinate-keyed procedural noise.
uint64_t splitmix64(uint64_t x);

// Deterministic RNG stream. State is the mt19937_64 engine only: normals are
// produced by a fresh Box-Muller pair per call (second value discarded) so a
// serialized engine fully captures the stream position.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }
    // uniform in [0,1)
    double uniform() { return (engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // uniform integer in [0, n)
    uint64_t below(uint64_t n);
    // standard normal
    double normal();

    std::string serialize() const;
    void deserialize(const std::string& s);

private:
    std::mt19937_64 engine_;
};

std::string lowercase(std::string_view s);
std::vector<std::string> split_tokens(std::string_view text);   // on non-alphanumerics
std::string trim(std::string_view s);
std::string format_double(double v);   // shortest round-trip decimal

// Throws DataError when the file cannot be read.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

}  // namespace geoforge
