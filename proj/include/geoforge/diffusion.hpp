#pragma once

#include <string>
#include <vector>

#include "geoforge/condition.hpp"
#include "geoforge/nn.hpp"
#include "geoforge/png_io.hpp"

namespace geoforge {

// Linear-beta DDPM schedule; index 0 is the "clean" convention (alpha_bar[0]=1).
struct NoiseSchedule {
    long T = 1000;
    std::vector<double> beta;       // [0..T], beta[0] unused
    std::vector<double> alpha_bar;  // [0..T], alpha_bar[0] == 1
};

NoiseSchedule make_schedule(long T, double beta1, double betaT);

// x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps
Tensor forward_diffuse(const Tensor& x0, long t, const Tensor& eps, const NoiseSchedule& s);

struct ModelConfig {
    long img_size = 64;
    long in_ch = 1;
    long cond_ch = 6;
    long base_ch = 32;  // encoder stage channels: base, 2*base, 4*base
    long cond_width = 128;
    long embed_dim = 64;  // sinusoidal dim for metadata/timestep
    long text_dim = 64;   // caption embedding dim
};

// Per-sample conditioning inputs for one forward pass.
struct CondBatch {
    std::vector<double> lons, lats;
    std::vector<std::vector<double>> captions;  // embedded, text_dim each
    Tensor cond_img;  // (N, cond_ch, H, W) in [0,1]; numel 0 → no control branch
    bool zero_metadata = false;  // modality ablation: zero location embeddings
};

// ε-prediction UNet (3 downsampling stages + middle, mirrored decoder with
// additive skips) plus a ControlNet-style branch: a structural copy of the
// encoder whose stage outputs are injected through zero-initialized 1x1
// convolutions at the 4 matching sites.
struct Denoiser {
    ModelConfig cfg;

    Conv2d stem;
    ResBlock enc1, enc2, enc3, mid;
    Conv2d down1, down2, down3;
    Conv2d up3, up2, up1;
    ResBlock dec3, dec2, dec1;
    Conv2d head;  // zero-initialized: ε̂ == 0 at init

    Conv2d cstem;
    ResBlock cenc1, cenc2, cenc3, cmid;
    Conv2d cdown1, cdown2, cdown3;
    Conv2d inj1, inj2, inj3, inj4;  // zero convolutions

    ConditionEncoder cond;

    struct Acts;  // saved forward state (training only)

    void init(const ModelConfig& c, uint64_t seed);
    void visit_params(const ParamVisitor& fn);
    std::vector<Param*> params();

    // ts are timestep indices (cast to double for embedding)
    Tensor predict_eps(const Tensor& x_t, const std::vector<double>& ts, const CondBatch& cb,
                       Acts* acts = nullptr) const;
    void backward(const Acts& acts, const Tensor& d_eps);
};

struct Denoiser::Acts {
    Tensor x_t, v;
    ConditionEncoder::Act cond_act;
    bool has_control = false;
    // control branch
    Tensor cond_in, c0, ac1, cd1, ac2, cd2, ac3, cd3, acm;
    ResBlock::Act r_cenc1, r_cenc2, r_cenc3, r_cmid;
    // main path
    Tensor m0, s1, d1, s2, d2, s3, d3, mm;
    Tensor ups3, u3, t3, ups2, u2, t2, ups1, u1, t1;
    ResBlock::Act r_enc1, r_enc2, r_enc3, r_mid, r_dec3, r_dec2, r_dec1;
};

struct TrainSample {
    Tensor x0;  // (1, H, W) in [-1, 1]
    Tensor cond_img;  // (cond_ch, H, W) in [0, 1]
    double lon = 0, lat = 0;
    std::vector<double> caption_embed;
};

struct TrainState {
    Denoiser model;
    NoiseSchedule sched;
    Adam opt;
    Rng rng;
    long step = 0;
    std::vector<double> loss_history;
    bool zero_metadata = false;  // not serialized; re-applied by the caller
    bool blank_condition_image = false;  // ditto (image ablation / align phase)
};

// One optimizer step on the batch; returns the ε-MSE loss. Throws
// NumericError when the loss is non-finite.
double train_step(TrainState& st, const std::vector<const TrainSample*>& batch);

// Deterministic DDIM (η = 0). steps must be strictly decreasing and end at 1.
// Returns (N,1,H,W) in [-1,1].
Tensor ddim_sample(const Denoiser& model, const NoiseSchedule& sched, const CondBatch& cb,
                   const std::vector<long>& steps, uint64_t seed);

std::vector<long> ddim_steps(long T, long n_steps);

// [-1,1] tensor plane -> 8-bit grayscale image
Image tensor_to_image(const Tensor& x, long n);

}  // namespace geoforge
