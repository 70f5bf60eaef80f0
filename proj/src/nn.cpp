#include "geoforge/nn.hpp"

#include <cmath>

namespace geoforge {

void Param::init_shape(std::string n, std::vector<long> shape) {
    name = std::move(n);
    w = Tensor(shape);
    g = Tensor(shape);
    m = Tensor(shape);
    v = Tensor(std::move(shape));
}

namespace {

double sigmoid(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}

void he_fill(Tensor& t, long fan_in, Rng& rng) {
    const double stddev = std::sqrt(2.0 / (double)fan_in);
    for (double& v : t.data) v = rng.normal() * stddev;
}

}  // namespace

void silu_forward(const Tensor& x, Tensor& y) {
    if (!x.same_shape(y)) throw NumericError("silu: shape mismatch");
    const size_t n = x.data.size();
#pragma omp parallel for schedule(static) if (parallel_kernels() && n > 4096)
    for (long i = 0; i < (long)n; ++i) {
        const double v = x.data[(size_t)i];
        y.data[(size_t)i] = v * sigmoid(v);
    }
}

void silu_backward(const Tensor& x, const Tensor& dy, Tensor& dx, bool accumulate) {
    if (!x.same_shape(dy) || !x.same_shape(dx)) throw NumericError("silu bwd: shape mismatch");
    const size_t n = x.data.size();
#pragma omp parallel for schedule(static) if (parallel_kernels() && n > 4096)
    for (long i = 0; i < (long)n; ++i) {
        const double v = x.data[(size_t)i];
        const double s = sigmoid(v);
        const double grad = s * (1.0 + v * (1.0 - s));
        if (accumulate) dx.data[(size_t)i] += dy.data[(size_t)i] * grad;
        else dx.data[(size_t)i] = dy.data[(size_t)i] * grad;
    }
}

void Conv2d::init(const std::string& name, ConvSpec s, Rng* rng) {
    spec = s;
    W.init_shape(name + ".W", {s.out_ch, s.in_ch, s.k, s.k});
    b.init_shape(name + ".b", {s.out_ch});
    if (rng) he_fill(W.w, s.in_ch * s.k * s.k, *rng);
}

Tensor Conv2d::forward(const Tensor& X) const {
    Tensor Y({X.dim(0), spec.out_ch, conv_out_dim(X.dim(2), spec.k, spec.stride, spec.pad),
              conv_out_dim(X.dim(3), spec.k, spec.stride, spec.pad)});
    conv2d_forward(X, W.w, b.w, spec, Y);
    return Y;
}

Tensor Conv2d::backward(const Tensor& X, const Tensor& dY, bool need_dx) {
    Tensor dX = need_dx ? Tensor(X.shape) : Tensor();
    conv2d_backward(X, W.w, spec, dY, dX, W.g, b.g);
    return dX;
}

void Linear::init(const std::string& name, long in_dim, long out_dim, Rng* rng) {
    W.init_shape(name + ".W", {out_dim, in_dim});
    b.init_shape(name + ".b", {out_dim});
    if (rng) he_fill(W.w, in_dim, *rng);
}

Tensor Linear::forward(const Tensor& X) const {
    Tensor Y({X.dim(0), W.w.dim(0)});
    linear_forward(X, W.w, b.w, Y);
    return Y;
}

Tensor Linear::backward(const Tensor& X, const Tensor& dY, bool need_dx) {
    Tensor dX = need_dx ? Tensor(X.shape) : Tensor();
    linear_backward(X, W.w, dY, dX, W.g, b.g);
    return dX;
}

void ResBlock::init(const std::string& name, long ch, long cw, Rng& rng) {
    channels = ch;
    cond_width = cw;
    conv1.init(name + ".conv1", ConvSpec{ch, ch, 3, 1, 1}, &rng);
    conv2.init(name + ".conv2", ConvSpec{ch, ch, 3, 1, 1}, nullptr);  // zero: silent at init
    proj.init(name + ".proj", cw, ch, &rng);
}

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
}

Tensor ResBlock::forward(const Tensor& x, const Tensor& cond, Act& act) const {
    act.x = x;
    act.a1 = Tensor(x.shape);
    silu_forward(x, act.a1);
    Tensor h1 = conv1.forward(act.a1);
    // per-channel conditioning bias: h2[n][c][y][x] = h1[...] + pv[n][c]
    Tensor pv = proj.forward(cond);  // (N, ch)
    act.h2 = std::move(h1);
    const long N = x.dim(0), HW = x.dim(2) * x.dim(3);
    for (long n = 0; n < N; ++n)
        for (long c = 0; c < channels; ++c) {
            const double add = pv.data[n * channels + c];
            double* p = act.h2.data.data() + (n * channels + c) * HW;
            for (long i = 0; i < HW; ++i) p[i] += add;
        }
    Tensor a2(act.h2.shape);
    silu_forward(act.h2, a2);
    Tensor h3 = conv2.forward(a2);
    Tensor out(x.shape);
    for (size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = (x.data[i] + h3.data[i]) * kInvSqrt2;
    return out;
}

Tensor ResBlock::backward(const Act& act, const Tensor& cond, const Tensor& dOut,
                          Tensor& dcond) {
    const long N = act.x.dim(0), HW = act.x.dim(2) * act.x.dim(3);

    Tensor dh3(dOut.shape);
    for (size_t i = 0; i < dOut.data.size(); ++i) dh3.data[i] = dOut.data[i] * kInvSqrt2;

    Tensor a2(act.h2.shape);
    silu_forward(act.h2, a2);  // recompute, cheaper than storing
    Tensor da2 = conv2.backward(a2, dh3, true);
    Tensor dh2(act.h2.shape);
    silu_backward(act.h2, da2, dh2, false);

    // conditioning bias gradient: sum over spatial per (n, c)
    Tensor dpv({N, channels});
    for (long n = 0; n < N; ++n)
        for (long c = 0; c < channels; ++c) {
            const double* p = dh2.data.data() + (n * channels + c) * HW;
            double acc = 0.0;
            for (long i = 0; i < HW; ++i) acc += p[i];
            dpv.data[n * channels + c] = acc;
        }
    Tensor dcond_local = proj.backward(cond, dpv, true);
    dcond.add_(dcond_local);

    Tensor da1 = conv1.backward(act.a1, dh2, true);
    Tensor dx(act.x.shape);
    silu_backward(act.x, da1, dx, false);
    for (size_t i = 0; i < dx.data.size(); ++i) dx.data[i] += dOut.data[i] * kInvSqrt2;
    return dx;
}

void Adam::step(const std::vector<Param*>& params) {
    ++step_count;
    const double bc1 = 1.0 - std::pow(beta1, (double)step_count);
    const double bc2 = 1.0 - std::pow(beta2, (double)step_count);
    for (Param* p : params) {
        for (size_t i = 0; i < p->w.data.size(); ++i) {
            const double g = p->g.data[i];
            p->m.data[i] = beta1 * p->m.data[i] + (1.0 - beta1) * g;
            p->v.data[i] = beta2 * p->v.data[i] + (1.0 - beta2) * g * g;
            const double mhat = p->m.data[i] / bc1;
            const double vhat = p->v.data[i] / bc2;
            p->w.data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

void Mlp::init(const std::string& name, long in_dim, long hidden, long out_dim, Rng& rng) {
    fc1.init(name + ".fc1", in_dim, hidden, &rng);
    fc2.init(name + ".fc2", hidden, out_dim, &rng);
}

Tensor Mlp::forward(const Tensor& e, Tensor& hidden_act) const {
    hidden_act = fc1.forward(e);  // pre-activation saved
    Tensor a(hidden_act.shape);
    silu_forward(hidden_act, a);
    return fc2.forward(a);
}

Tensor Mlp::backward(const Tensor& e, const Tensor& hidden_act, const Tensor& dOut) {
    Tensor a(hidden_act.shape);
    silu_forward(hidden_act, a);
    Tensor da = fc2.backward(a, dOut, true);
    Tensor dh(hidden_act.shape);
    silu_backward(hidden_act, da, dh, false);
    return fc1.backward(e, dh, true);
}

}  // namespace geoforge
