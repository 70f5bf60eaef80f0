#include "geoforge/condition.hpp"

#include <cmath>

#include "geoforge/common.hpp"

namespace geoforge {

std::vector<double> sinusoidal_embed(double m, long d, double omega) {
    if (d <= 0 || d % 2 != 0) throw DataError("sinusoidal_embed: d must be even positive");
    if (!(omega > 1.0)) throw DataError("sinusoidal_embed: omega must exceed 1");
    std::vector<double> e((size_t)d);
    for (long i = 0; i < d / 2; ++i) {
        const double w = std::pow(omega, -2.0 * (double)i / (double)d);
        e[(size_t)(2 * i)] = std::sin(m * w);
        e[(size_t)(2 * i + 1)] = std::cos(m * w);
    }
    return e;
}

std::vector<double> embed_caption(const std::string& text, long d) {
    if (d <= 0) throw DataError("embed_caption: d must be positive");
    std::vector<double> v((size_t)d, 0.0);
    for (const std::string& tok : split_tokens(text)) {
        const uint64_t bucket = fnv1a64(tok) % (uint64_t)d;
        const double sign = (fnv1a64(tok, 0x9e3779b97f4a7c15ull) & 1u) ? 1.0 : -1.0;
        v[bucket] += sign;
    }
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    if (norm2 > 0.0) {
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& x : v) x *= inv;
    }
    return v;
}

void ConditionEncoder::init(long embed_d, long cond_w, long text_d, Rng& rng) {
    embed_dim = embed_d;
    cond_width = cond_w;
    text_dim = text_d;
    mlp_lon.init("cond.lon", embed_dim, cond_width, cond_width, rng);
    mlp_lat.init("cond.lat", embed_dim, cond_width, cond_width, rng);
    mlp_t.init("cond.t", embed_dim, cond_width, cond_width, rng);
    text_proj.init("cond.text", text_dim, cond_width, &rng);
}

namespace {

Tensor stack_embeds(const std::vector<double>& ms, long d, double omega) {
    Tensor e({(long)ms.size(), d});
    for (size_t n = 0; n < ms.size(); ++n) {
        std::vector<double> row = sinusoidal_embed(ms[n], d, omega);
        std::copy(row.begin(), row.end(), e.data.begin() + (long)n * d);
    }
    return e;
}

}  // namespace

Tensor ConditionEncoder::forward(const std::vector<double>& lons,
                                 const std::vector<double>& lats,
                                 const std::vector<double>& ts,
                                 const std::vector<std::vector<double>>& captions, Act& act,
                                 bool zero_metadata) const {
    const long N = (long)lons.size();
    if ((long)lats.size() != N || (long)ts.size() != N || (long)captions.size() != N)
        throw NumericError("condition encoder: batch size mismatch");
    if (zero_metadata) {
        // metadata ablation: the raw location embeddings become zero vectors
        act.e_lon = Tensor({N, embed_dim});
        act.e_lat = Tensor({N, embed_dim});
    } else {
        act.e_lon = stack_embeds(lons, embed_dim, omega);
        act.e_lat = stack_embeds(lats, embed_dim, omega);
    }
    act.e_t = stack_embeds(ts, embed_dim, omega);
    act.c_text = Tensor({N, text_dim});
    for (long n = 0; n < N; ++n) {
        if ((long)captions[(size_t)n].size() != text_dim)
            throw NumericError("condition encoder: caption embedding dim mismatch");
        std::copy(captions[(size_t)n].begin(), captions[(size_t)n].end(),
                  act.c_text.data.begin() + n * text_dim);
    }
    Tensor v = mlp_lon.forward(act.e_lon, act.h_lon);
    v.add_(mlp_lat.forward(act.e_lat, act.h_lat));
    v.add_(mlp_t.forward(act.e_t, act.h_t));
    v.add_(text_proj.forward(act.c_text));
    return v;
}

void ConditionEncoder::backward(const Act& act, const Tensor& dV) {
    mlp_lon.backward(act.e_lon, act.h_lon, dV);
    mlp_lat.backward(act.e_lat, act.h_lat, dV);
    mlp_t.backward(act.e_t, act.h_t, dV);
    text_proj.backward(act.c_text, dV, false);
}

std::vector<double> ConditionEncoder::fuse_metadata_timestep(double m_lon, double m_lat,
                                                             double t) const {
    Tensor e_lon = stack_embeds({m_lon}, embed_dim, omega);
    Tensor e_lat = stack_embeds({m_lat}, embed_dim, omega);
    Tensor e_t = stack_embeds({t}, embed_dim, omega);
    Tensor h;
    Tensor v = mlp_lon.forward(e_lon, h);
    v.add_(mlp_lat.forward(e_lat, h));
    v.add_(mlp_t.forward(e_t, h));
    return v.data;
}

}  // namespace geoforge
