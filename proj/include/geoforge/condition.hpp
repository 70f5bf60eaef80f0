#pragma once

#include <string>
#include <vector>

#include "geoforge/nn.hpp"
#include "geoforge/tensor.hpp"

namespace geoforge {

// Transformer-style sinusoidal embedding: pairs (sin(m·ω_i), cos(m·ω_i)) with
// ω_i = Ω^(−2i/d), i = 0..d/2−1. Squared norm is d/2 for every input.
std::vector<double> sinusoidal_embed(double m, long d, double omega = 1000.0);

// Deterministic hashed bag-of-tokens caption embedding, L2-normalized.
std::vector<double> embed_caption(const std::string& text, long d);

// Trainable conditioning head: fused vector
//   v = MLP_lon(embed(lon)) + MLP_lat(embed(lat)) + MLP_t(embed(t)) + W_text·c_text
// (the first three summands are c_mt; the text projection is added alongside).
struct ConditionEncoder {
    long embed_dim = 64, cond_width = 128, text_dim = 64;
    double omega = 1000.0;
    Mlp mlp_lon, mlp_lat, mlp_t;
    Linear text_proj;

    struct Act {
        Tensor e_lon, e_lat, e_t;  // (N, embed_dim) raw sinusoidal embeddings
        Tensor h_lon, h_lat, h_t;  // MLP hidden pre-activations
        Tensor c_text;             // (N, text_dim)
    };

    void init(long embed_d, long cond_w, long text_d, Rng& rng);

    // Batch fused condition vector (N, cond_width). zero_metadata replaces
    // the raw location embeddings with zero vectors (modality ablation).
    Tensor forward(const std::vector<double>& lons, const std::vector<double>& lats,
                   const std::vector<double>& ts,
                   const std::vector<std::vector<double>>& captions, Act& act,
                   bool zero_metadata = false) const;
    void backward(const Act& act, const Tensor& dV);

    // Single-sample c_mt only (metadata ⊕ timestep, no text term).
    std::vector<double> fuse_metadata_timestep(double m_lon, double m_lat, double t) const;

    void visit(const ParamVisitor& fn) {
        mlp_lon.visit(fn);
        mlp_lat.visit(fn);
        mlp_t.visit(fn);
        text_proj.visit(fn);
    }
};

}  // namespace geoforge
