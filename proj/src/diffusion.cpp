#include "geoforge/diffusion.hpp"

#include <algorithm>
#include <cmath>

namespace geoforge {

NoiseSchedule make_schedule(long T, double beta1, double betaT) {
    if (T < 1) throw DataError("schedule: T must be >= 1");
    if (!(beta1 > 0.0 && beta1 <= betaT && betaT < 1.0))
        throw DataError("schedule: need 0 < beta1 <= betaT < 1");
    NoiseSchedule s;
    s.T = T;
    s.beta.assign((size_t)T + 1, 0.0);
    s.alpha_bar.assign((size_t)T + 1, 1.0);
    for (long t = 1; t <= T; ++t) {
        s.beta[(size_t)t] =
            T == 1 ? beta1 : beta1 + (betaT - beta1) * (double)(t - 1) / (double)(T - 1);
        s.alpha_bar[(size_t)t] = s.alpha_bar[(size_t)t - 1] * (1.0 - s.beta[(size_t)t]);
    }
    return s;
}

Tensor forward_diffuse(const Tensor& x0, long t, const Tensor& eps, const NoiseSchedule& s) {
    if (t < 0 || t > s.T) throw DataError("forward_diffuse: t out of range");
    if (!x0.same_shape(eps)) throw NumericError("forward_diffuse: shape mismatch");
    const double ab = s.alpha_bar[(size_t)t];
    const double c0 = std::sqrt(ab), c1 = std::sqrt(1.0 - ab);
    Tensor xt(x0.shape);
    for (size_t i = 0; i < xt.data.size(); ++i)
        xt.data[i] = c0 * x0.data[i] + c1 * eps.data[i];
    return xt;
}

void Denoiser::init(const ModelConfig& c, uint64_t seed) {
    cfg = c;
    if (c.img_size % 8 != 0) throw DataError("model: img_size must be divisible by 8");
    Rng rng(seed);
    const long c0 = c.base_ch, c1 = 2 * c.base_ch, c2 = 4 * c.base_ch;

    stem.init("stem", ConvSpec{c.in_ch, c0, 3, 1, 1}, &rng);
    enc1.init("enc1", c0, c.cond_width, rng);
    down1.init("down1", ConvSpec{c0, c1, 3, 2, 1}, &rng);
    enc2.init("enc2", c1, c.cond_width, rng);
    down2.init("down2", ConvSpec{c1, c2, 3, 2, 1}, &rng);
    enc3.init("enc3", c2, c.cond_width, rng);
    down3.init("down3", ConvSpec{c2, c2, 3, 2, 1}, &rng);
    mid.init("mid", c2, c.cond_width, rng);
    up3.init("up3", ConvSpec{c2, c2, 3, 1, 1}, &rng);
    dec3.init("dec3", c2, c.cond_width, rng);
    up2.init("up2", ConvSpec{c2, c1, 3, 1, 1}, &rng);
    dec2.init("dec2", c1, c.cond_width, rng);
    up1.init("up1", ConvSpec{c1, c0, 3, 1, 1}, &rng);
    dec1.init("dec1", c0, c.cond_width, rng);
    head.init("head", ConvSpec{c0, c.in_ch, 3, 1, 1}, nullptr);

    cstem.init("ctrl.stem", ConvSpec{c.cond_ch, c0, 3, 1, 1}, &rng);
    cenc1.init("ctrl.enc1", c0, c.cond_width, rng);
    cdown1.init("ctrl.down1", ConvSpec{c0, c1, 3, 2, 1}, &rng);
    cenc2.init("ctrl.enc2", c1, c.cond_width, rng);
    cdown2.init("ctrl.down2", ConvSpec{c1, c2, 3, 2, 1}, &rng);
    cenc3.init("ctrl.enc3", c2, c.cond_width, rng);
    cdown3.init("ctrl.down3", ConvSpec{c2, c2, 3, 2, 1}, &rng);
    cmid.init("ctrl.mid", c2, c.cond_width, rng);
    inj1.init("ctrl.inj1", ConvSpec{c0, c0, 1, 1, 0}, nullptr);
    inj2.init("ctrl.inj2", ConvSpec{c1, c1, 1, 1, 0}, nullptr);
    inj3.init("ctrl.inj3", ConvSpec{c2, c2, 1, 1, 0}, nullptr);
    inj4.init("ctrl.inj4", ConvSpec{c2, c2, 1, 1, 0}, nullptr);

    cond.init(c.embed_dim, c.cond_width, c.text_dim, rng);
}

void Denoiser::visit_params(const ParamVisitor& fn) {
    stem.visit(fn);
    enc1.visit(fn);
    down1.visit(fn);
    enc2.visit(fn);
    down2.visit(fn);
    enc3.visit(fn);
    down3.visit(fn);
    mid.visit(fn);
    up3.visit(fn);
    dec3.visit(fn);
    up2.visit(fn);
    dec2.visit(fn);
    up1.visit(fn);
    dec1.visit(fn);
    head.visit(fn);
    cstem.visit(fn);
    cenc1.visit(fn);
    cdown1.visit(fn);
    cenc2.visit(fn);
    cdown2.visit(fn);
    cenc3.visit(fn);
    cdown3.visit(fn);
    cmid.visit(fn);
    inj1.visit(fn);
    inj2.visit(fn);
    inj3.visit(fn);
    inj4.visit(fn);
    cond.visit(fn);
}

std::vector<Param*> Denoiser::params() {
    std::vector<Param*> out;
    visit_params([&](Param& p) { out.push_back(&p); });
    return out;
}

namespace {

Tensor upsampled(const Tensor& x) {
    Tensor y({x.dim(0), x.dim(1), 2 * x.dim(2), 2 * x.dim(3)});
    upsample2x_forward(x, y);
    return y;
}

}  // namespace

Tensor Denoiser::predict_eps(const Tensor& x_t, const std::vector<double>& ts,
                             const CondBatch& cb, Acts* acts) const {
    const long N = x_t.dim(0);
    if (x_t.rank() != 4 || x_t.dim(1) != cfg.in_ch || x_t.dim(2) != cfg.img_size ||
        x_t.dim(3) != cfg.img_size)
        throw NumericError("predict_eps: x_t shape mismatch, got " + x_t.shape_str());
    if ((long)ts.size() != N) throw NumericError("predict_eps: ts size mismatch");
    const bool has_control = cb.cond_img.numel() != 0;
    if (has_control &&
        (cb.cond_img.dim(0) != N || cb.cond_img.dim(1) != cfg.cond_ch ||
         cb.cond_img.dim(2) != cfg.img_size || cb.cond_img.dim(3) != cfg.img_size))
        throw NumericError("predict_eps: condition image shape mismatch");

    Acts local;
    Acts& a = acts ? *acts : local;
    a.has_control = has_control;
    a.x_t = x_t;

    a.v = cond.forward(cb.lons, cb.lats, ts, cb.captions, a.cond_act, cb.zero_metadata);

    Tensor i1, i2, i3, i4;
    if (has_control) {
        a.cond_in = cb.cond_img;
        a.c0 = cstem.forward(cb.cond_img);
        a.ac1 = cenc1.forward(a.c0, a.v, a.r_cenc1);
        a.cd1 = cdown1.forward(a.ac1);
        a.ac2 = cenc2.forward(a.cd1, a.v, a.r_cenc2);
        a.cd2 = cdown2.forward(a.ac2);
        a.ac3 = cenc3.forward(a.cd2, a.v, a.r_cenc3);
        a.cd3 = cdown3.forward(a.ac3);
        a.acm = cmid.forward(a.cd3, a.v, a.r_cmid);
        i1 = inj1.forward(a.ac1);
        i2 = inj2.forward(a.ac2);
        i3 = inj3.forward(a.ac3);
        i4 = inj4.forward(a.acm);
    }

    a.m0 = stem.forward(x_t);
    a.s1 = enc1.forward(a.m0, a.v, a.r_enc1);
    if (has_control) a.s1.add_(i1);
    a.d1 = down1.forward(a.s1);
    a.s2 = enc2.forward(a.d1, a.v, a.r_enc2);
    if (has_control) a.s2.add_(i2);
    a.d2 = down2.forward(a.s2);
    a.s3 = enc3.forward(a.d2, a.v, a.r_enc3);
    if (has_control) a.s3.add_(i3);
    a.d3 = down3.forward(a.s3);
    a.mm = mid.forward(a.d3, a.v, a.r_mid);
    if (has_control) a.mm.add_(i4);

    a.ups3 = upsampled(a.mm);
    a.u3 = up3.forward(a.ups3);
    a.u3.add_(a.s3);
    a.t3 = dec3.forward(a.u3, a.v, a.r_dec3);

    a.ups2 = upsampled(a.t3);
    a.u2 = up2.forward(a.ups2);
    a.u2.add_(a.s2);
    a.t2 = dec2.forward(a.u2, a.v, a.r_dec2);

    a.ups1 = upsampled(a.t2);
    a.u1 = up1.forward(a.ups1);
    a.u1.add_(a.s1);
    a.t1 = dec1.forward(a.u1, a.v, a.r_dec1);

    return head.forward(a.t1);
}

void Denoiser::backward(const Acts& a, const Tensor& d_eps) {
    Tensor dv(a.v.shape);  // gradient wrt fused condition vector, accumulated

    Tensor d_t1 = head.backward(a.t1, d_eps, true);
    Tensor d_u1 = dec1.backward(a.r_dec1, a.v, d_t1, dv);
    Tensor d_s1 = d_u1;  // skip contribution; down-path added below
    Tensor d_ups1 = up1.backward(a.ups1, d_u1, true);
    Tensor d_t2(a.t2.shape);
    upsample2x_backward(d_ups1, d_t2);

    Tensor d_u2 = dec2.backward(a.r_dec2, a.v, d_t2, dv);
    Tensor d_s2 = d_u2;
    Tensor d_ups2 = up2.backward(a.ups2, d_u2, true);
    Tensor d_t3(a.t3.shape);
    upsample2x_backward(d_ups2, d_t3);

    Tensor d_u3 = dec3.backward(a.r_dec3, a.v, d_t3, dv);
    Tensor d_s3 = d_u3;
    Tensor d_ups3 = up3.backward(a.ups3, d_u3, true);
    Tensor d_mm(a.mm.shape);
    upsample2x_backward(d_ups3, d_mm);

    // control-injection gradients, accumulated alongside the branch chain
    Tensor d_ac1, d_ac2, d_ac3, d_acm;
    if (a.has_control) {
        d_ac1 = Tensor(a.ac1.shape);
        d_ac2 = Tensor(a.ac2.shape);
        d_ac3 = Tensor(a.ac3.shape);
        d_acm = inj4.backward(a.acm, d_mm, true);
    }

    Tensor d_d3 = mid.backward(a.r_mid, a.v, d_mm, dv);
    d_s3.add_(down3.backward(a.s3, d_d3, true));
    if (a.has_control) d_ac3.add_(inj3.backward(a.ac3, d_s3, true));

    Tensor d_d2 = enc3.backward(a.r_enc3, a.v, d_s3, dv);
    d_s2.add_(down2.backward(a.s2, d_d2, true));
    if (a.has_control) d_ac2.add_(inj2.backward(a.ac2, d_s2, true));

    Tensor d_d1 = enc2.backward(a.r_enc2, a.v, d_s2, dv);
    d_s1.add_(down1.backward(a.s1, d_d1, true));
    if (a.has_control) d_ac1.add_(inj1.backward(a.ac1, d_s1, true));

    Tensor d_m0 = enc1.backward(a.r_enc1, a.v, d_s1, dv);
    stem.backward(a.x_t, d_m0, false);

    if (a.has_control) {
        Tensor d_cd3 = cmid.backward(a.r_cmid, a.v, d_acm, dv);
        d_ac3.add_(cdown3.backward(a.ac3, d_cd3, true));
        Tensor d_cd2 = cenc3.backward(a.r_cenc3, a.v, d_ac3, dv);
        d_ac2.add_(cdown2.backward(a.ac2, d_cd2, true));
        Tensor d_cd1 = cenc2.backward(a.r_cenc2, a.v, d_ac2, dv);
        d_ac1.add_(cdown1.backward(a.ac1, d_cd1, true));
        Tensor d_c0 = cenc1.backward(a.r_cenc1, a.v, d_ac1, dv);
        cstem.backward(a.cond_in, d_c0, false);
    }

    cond.backward(a.cond_act, dv);
}

double train_step(TrainState& st, const std::vector<const TrainSample*>& batch) {
    if (batch.empty()) throw DataError("train_step: empty batch");
    const long N = (long)batch.size();
    const ModelConfig& c = st.model.cfg;
    const long H = c.img_size;

    Tensor x_t({N, c.in_ch, H, H});
    Tensor eps({N, c.in_ch, H, H});
    CondBatch cb;
    cb.cond_img = Tensor({N, c.cond_ch, H, H});
    cb.zero_metadata = st.zero_metadata;
    std::vector<double> ts((size_t)N);

    const long plane = c.in_ch * H * H;
    for (long n = 0; n < N; ++n) {
        const TrainSample& s = *batch[(size_t)n];
        if (s.x0.numel() != plane || s.cond_img.numel() != c.cond_ch * H * H)
            throw DataError("train_step: sample shape mismatch");
        const long t = (long)st.rng.below((uint64_t)st.sched.T) + 1;
        ts[(size_t)n] = (double)t;
        const double c0 = std::sqrt(st.sched.alpha_bar[(size_t)t]);
        const double c1 = std::sqrt(1.0 - st.sched.alpha_bar[(size_t)t]);
        for (long i = 0; i < plane; ++i) {
            const double e = st.rng.normal();
            eps.data[n * plane + i] = e;
            x_t.data[n * plane + i] = c0 * s.x0.data[(size_t)i] + c1 * e;
        }
        if (!st.blank_condition_image)
            std::copy(s.cond_img.data.begin(), s.cond_img.data.end(),
                      cb.cond_img.data.begin() + n * c.cond_ch * H * H);
        cb.lons.push_back(s.lon);
        cb.lats.push_back(s.lat);
        cb.captions.push_back(s.caption_embed);
    }

    Denoiser::Acts acts;
    Tensor eps_hat = st.model.predict_eps(x_t, ts, cb, &acts);

    const double inv = 1.0 / (double)eps.numel();
    double loss = 0.0;
    Tensor d_eps(eps_hat.shape);
    for (size_t i = 0; i < eps.data.size(); ++i) {
        const double diff = eps_hat.data[i] - eps.data[i];
        loss += diff * diff * inv;
        d_eps.data[i] = 2.0 * diff * inv;
    }
    if (!std::isfinite(loss))
        throw NumericError("train_step: non-finite loss at step " + std::to_string(st.step));

    st.model.backward(acts, d_eps);
    st.opt.step(st.model.params());
    ++st.step;
    st.loss_history.push_back(loss);
    return loss;
}

std::vector<long> ddim_steps(long T, long n_steps) {
    if (n_steps < 1 || n_steps > T) throw DataError("ddim_steps: invalid step count");
    std::vector<long> steps;
    // evenly spaced, strictly decreasing, ending at 1
    for (long i = n_steps - 1; i >= 0; --i) {
        long t = 1 + (long)std::llround((double)i * (double)(T - 1) / std::max(1L, n_steps - 1));
        if (n_steps == 1) t = T;
        if (steps.empty() || t < steps.back()) steps.push_back(t);
    }
    if (steps.back() != 1) steps.push_back(1);
    return steps;
}

Tensor ddim_sample(const Denoiser& model, const NoiseSchedule& sched, const CondBatch& cb,
                   const std::vector<long>& steps, uint64_t seed) {
    if (steps.empty() || steps.back() != 1)
        throw DataError("ddim_sample: steps must end at 1");
    for (size_t i = 0; i + 1 < steps.size(); ++i)
        if (steps[i] <= steps[i + 1] || steps[i] > sched.T)
            throw DataError("ddim_sample: steps must be strictly decreasing within 1..T");

    const long N = (long)cb.lons.size();
    const long H = model.cfg.img_size;
    Rng rng(seed);
    Tensor x({N, model.cfg.in_ch, H, H});
    for (double& v : x.data) v = rng.normal();

    for (size_t i = 0; i < steps.size(); ++i) {
        const long t = steps[i];
        const long t_next = (i + 1 < steps.size()) ? steps[i + 1] : 0;
        std::vector<double> ts((size_t)N, (double)t);
        Tensor eps_hat = model.predict_eps(x, ts, cb);
        const double ab_t = sched.alpha_bar[(size_t)t];
        const double ab_n = sched.alpha_bar[(size_t)t_next];
        const double c_x0 = 1.0 / std::sqrt(ab_t);
        const double c_e = std::sqrt(1.0 - ab_t);
        const double n_x0 = std::sqrt(ab_n);
        const double n_e = std::sqrt(1.0 - ab_n);
        for (size_t j = 0; j < x.data.size(); ++j) {
            const double x0_hat = (x.data[j] - c_e * eps_hat.data[j]) * c_x0;
            x.data[j] = n_x0 * x0_hat + n_e * eps_hat.data[j];
        }
    }
    for (double& v : x.data) v = std::clamp(v, -1.0, 1.0);
    return x;
}

Image tensor_to_image(const Tensor& x, long n) {
    const long H = x.dim(2), W = x.dim(3);
    Image img((int)W, (int)H, 1);
    for (long y = 0; y < H; ++y)
        for (long xx = 0; xx < W; ++xx) {
            const double v = x.at4(n, 0, y, xx);
            img.at((int)y, (int)xx) = (uint8_t)std::clamp(
                (long)std::llround((v + 1.0) * 0.5 * 255.0), 0L, 255L);
        }
    return img;
}

}  // namespace geoforge
