#include "geoforge/kernels.hpp"

#include <atomic>

#include "geoforge/common.hpp"

namespace geoforge {

namespace {
std::atomic<bool> g_parallel{true};

long div_floor(long a, long b) {
    long q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}
long div_ceil(long a, long b) {
    return -div_floor(-a, b);
}
}  // namespace

void set_parallel_kernels(bool on) {
    g_parallel.store(on);
}
bool parallel_kernels() {
    return g_parallel.load();
}

long conv_out_dim(long in, long k, long stride, long pad) {
    return (in + 2 * pad - k) / stride + 1;
}

namespace {

void check_conv_shapes(const Tensor& X, const Tensor& W, const Tensor& b, const ConvSpec& s,
                       const Tensor& Y) {
    if (X.rank() != 4 || W.rank() != 4 || Y.rank() != 4)
        throw NumericError("conv2d: tensors must be rank 4");
    if (X.dim(1) != s.in_ch || W.dim(0) != s.out_ch || W.dim(1) != s.in_ch ||
        W.dim(2) != s.k || W.dim(3) != s.k || b.numel() != s.out_ch)
        throw NumericError("conv2d: parameter shapes disagree with spec");
    if (Y.dim(0) != X.dim(0) || Y.dim(1) != s.out_ch ||
        Y.dim(2) != conv_out_dim(X.dim(2), s.k, s.stride, s.pad) ||
        Y.dim(3) != conv_out_dim(X.dim(3), s.k, s.stride, s.pad))
        throw NumericError("conv2d: output shape mismatch");
}

// One output plane Y[n][oc]; fixed (ic,ky,kx,oy,ox) accumulation order.
void conv_fwd_plane(const double* Xn, const double* Wf, double bias, double* Yp, long IC,
                    long H, long Wd, long k, long stride, long pad, long OH, long OW) {
    for (long i = 0; i < OH * OW; ++i) Yp[i] = bias;
    for (long ic = 0; ic < IC; ++ic) {
        for (long ky = 0; ky < k; ++ky) {
            const long oy_lo = std::max(0L, div_ceil(pad - ky, stride));
            const long oy_hi = std::min(OH, div_floor(H - 1 + pad - ky, stride) + 1);
            for (long kx = 0; kx < k; ++kx) {
                const double w = Wf[(ic * k + ky) * k + kx];
                if (w == 0.0) continue;
                const long ox_lo = std::max(0L, div_ceil(pad - kx, stride));
                const long ox_hi = std::min(OW, div_floor(Wd - 1 + pad - kx, stride) + 1);
                for (long oy = oy_lo; oy < oy_hi; ++oy) {
                    const long iy = oy * stride - pad + ky;
                    const double* xr = Xn + (ic * H + iy) * Wd;
                    double* yr = Yp + oy * OW;
                    if (stride == 1) {
                        const long off = kx - pad;
                        for (long ox = ox_lo; ox < ox_hi; ++ox) yr[ox] += w * xr[ox + off];
                    } else {
                        for (long ox = ox_lo; ox < ox_hi; ++ox)
                            yr[ox] += w * xr[ox * stride - pad + kx];
                    }
                }
            }
        }
    }
}

// One input-gradient plane dX[n][ic]; fixed (oc,ky,kx,oy,ox) order.
void conv_bwd_input_plane(const double* dYn, const double* W, double* dXp, long n_unused,
                          long IC, long ic, long OC, long H, long Wd, long k, long stride,
                          long pad, long OH, long OW) {
    (void)n_unused;
    for (long i = 0; i < H * Wd; ++i) dXp[i] = 0.0;
    for (long oc = 0; oc < OC; ++oc) {
        const double* Wf = W + (oc * IC + ic) * k * k;
        const double* dYp = dYn + oc * OH * OW;
        for (long ky = 0; ky < k; ++ky) {
            const long oy_lo = std::max(0L, div_ceil(pad - ky, stride));
            const long oy_hi = std::min(OH, div_floor(H - 1 + pad - ky, stride) + 1);
            for (long kx = 0; kx < k; ++kx) {
                const double w = Wf[ky * k + kx];
                if (w == 0.0) continue;
                const long ox_lo = std::max(0L, div_ceil(pad - kx, stride));
                const long ox_hi = std::min(OW, div_floor(Wd - 1 + pad - kx, stride) + 1);
                for (long oy = oy_lo; oy < oy_hi; ++oy) {
                    const long iy = oy * stride - pad + ky;
                    const double* dyr = dYp + oy * OW;
                    double* dxr = dXp + iy * Wd;
                    if (stride == 1) {
                        const long off = kx - pad;
                        for (long ox = ox_lo; ox < ox_hi; ++ox) dxr[ox + off] += w * dyr[ox];
                    } else {
                        for (long ox = ox_lo; ox < ox_hi; ++ox)
                            dxr[ox * stride - pad + kx] += w * dyr[ox];
                    }
                }
            }
        }
    }
}

// One filter slice dW[oc][ic]; fixed (ky,kx,n,oy,ox) order.
void conv_bwd_weight_slice(const Tensor& X, const Tensor& dY, double* dWf, long oc, long ic,
                           long k, long stride, long pad) {
    const long N = X.dim(0), IC = X.dim(1), H = X.dim(2), Wd = X.dim(3);
    const long OC = dY.dim(1), OH = dY.dim(2), OW = dY.dim(3);
    for (long ky = 0; ky < k; ++ky) {
        const long oy_lo = std::max(0L, div_ceil(pad - ky, stride));
        const long oy_hi = std::min(OH, div_floor(H - 1 + pad - ky, stride) + 1);
        for (long kx = 0; kx < k; ++kx) {
            const long ox_lo = std::max(0L, div_ceil(pad - kx, stride));
            const long ox_hi = std::min(OW, div_floor(Wd - 1 + pad - kx, stride) + 1);
            double acc = 0.0;
            for (long n = 0; n < N; ++n) {
                const double* Xp = X.data.data() + ((n * IC + ic) * H) * Wd;
                const double* dYp = dY.data.data() + ((n * OC + oc) * OH) * OW;
                for (long oy = oy_lo; oy < oy_hi; ++oy) {
                    const long iy = oy * stride - pad + ky;
                    const double* xr = Xp + iy * Wd;
                    const double* dyr = dYp + oy * OW;
                    if (stride == 1) {
                        const long off = kx - pad;
                        for (long ox = ox_lo; ox < ox_hi; ++ox) acc += dyr[ox] * xr[ox + off];
                    } else {
                        for (long ox = ox_lo; ox < ox_hi; ++ox)
                            acc += dyr[ox] * xr[ox * stride - pad + kx];
                    }
                }
            }
            dWf[ky * k + kx] = acc;
        }
    }
}

double conv_bwd_bias_one(const Tensor& dY, long oc) {
    const long N = dY.dim(0), OC = dY.dim(1), plane = dY.dim(2) * dY.dim(3);
    double acc = 0.0;
    for (long n = 0; n < N; ++n) {
        const double* p = dY.data.data() + (n * OC + oc) * plane;
        for (long i = 0; i < plane; ++i) acc += p[i];
    }
    return acc;
}

}  // namespace

void conv2d_forward_serial(const Tensor& X, const Tensor& W, const Tensor& b,
                           const ConvSpec& s, Tensor& Y) {
    check_conv_shapes(X, W, b, s, Y);
    const long N = X.dim(0), H = X.dim(2), Wd = X.dim(3);
    const long OH = Y.dim(2), OW = Y.dim(3);
    for (long n = 0; n < N; ++n)
        for (long oc = 0; oc < s.out_ch; ++oc)
            conv_fwd_plane(X.data.data() + n * s.in_ch * H * Wd,
                           W.data.data() + oc * s.in_ch * s.k * s.k, b.data[oc],
                           Y.data.data() + (n * s.out_ch + oc) * OH * OW, s.in_ch, H, Wd, s.k,
                           s.stride, s.pad, OH, OW);
}

void conv2d_forward_omp(const Tensor& X, const Tensor& W, const Tensor& b, const ConvSpec& s,
                        Tensor& Y) {
    check_conv_shapes(X, W, b, s, Y);
    const long N = X.dim(0), H = X.dim(2), Wd = X.dim(3);
    const long OH = Y.dim(2), OW = Y.dim(3);
#pragma omp parallel for collapse(2) schedule(static)
    for (long n = 0; n < N; ++n)
        for (long oc = 0; oc < s.out_ch; ++oc)
            conv_fwd_plane(X.data.data() + n * s.in_ch * H * Wd,
                           W.data.data() + oc * s.in_ch * s.k * s.k, b.data[oc],
                           Y.data.data() + (n * s.out_ch + oc) * OH * OW, s.in_ch, H, Wd, s.k,
                           s.stride, s.pad, OH, OW);
}

void conv2d_forward(const Tensor& X, const Tensor& W, const Tensor& b, const ConvSpec& s,
                    Tensor& Y) {
    if (parallel_kernels()) conv2d_forward_omp(X, W, b, s, Y);
    else conv2d_forward_serial(X, W, b, s, Y);
}

namespace {

void check_conv_bwd_shapes(const Tensor& X, const Tensor& W, const ConvSpec& s,
                           const Tensor& dY, const Tensor& dX, const Tensor& dW,
                           const Tensor& db) {
    if (dX.numel() != 0 && !dX.same_shape(X)) throw NumericError("conv2d bwd: dX shape");
    if (!dW.same_shape(W) || db.numel() != s.out_ch)
        throw NumericError("conv2d bwd: param grad shapes");
    if (dY.dim(0) != X.dim(0) || dY.dim(1) != s.out_ch)
        throw NumericError("conv2d bwd: dY shape");
}

}  // namespace

void conv2d_backward_serial(const Tensor& X, const Tensor& W, const ConvSpec& s,
                            const Tensor& dY, Tensor& dX, Tensor& dW, Tensor& db) {
    check_conv_bwd_shapes(X, W, s, dY, dX, dW, db);
    const long N = X.dim(0), H = X.dim(2), Wd = X.dim(3);
    const long OH = dY.dim(2), OW = dY.dim(3);
    if (dX.numel() != 0)
        for (long n = 0; n < N; ++n)
            for (long ic = 0; ic < s.in_ch; ++ic)
                conv_bwd_input_plane(dY.data.data() + n * s.out_ch * OH * OW, W.data.data(),
                                     dX.data.data() + (n * s.in_ch + ic) * H * Wd, n, s.in_ch,
                                     ic, s.out_ch, H, Wd, s.k, s.stride, s.pad, OH, OW);
    for (long oc = 0; oc < s.out_ch; ++oc)
        for (long ic = 0; ic < s.in_ch; ++ic)
            conv_bwd_weight_slice(X, dY, dW.data.data() + (oc * s.in_ch + ic) * s.k * s.k, oc,
                                  ic, s.k, s.stride, s.pad);
    for (long oc = 0; oc < s.out_ch; ++oc) db.data[oc] = conv_bwd_bias_one(dY, oc);
}

void conv2d_backward_omp(const Tensor& X, const Tensor& W, const ConvSpec& s, const Tensor& dY,
                         Tensor& dX, Tensor& dW, Tensor& db) {
    check_conv_bwd_shapes(X, W, s, dY, dX, dW, db);
    const long N = X.dim(0), H = X.dim(2), Wd = X.dim(3);
    const long OH = dY.dim(2), OW = dY.dim(3);
    if (dX.numel() != 0) {
#pragma omp parallel for collapse(2) schedule(static)
        for (long n = 0; n < N; ++n)
            for (long ic = 0; ic < s.in_ch; ++ic)
                conv_bwd_input_plane(dY.data.data() + n * s.out_ch * OH * OW, W.data.data(),
                                     dX.data.data() + (n * s.in_ch + ic) * H * Wd, n, s.in_ch,
                                     ic, s.out_ch, H, Wd, s.k, s.stride, s.pad, OH, OW);
    }
#pragma omp parallel for collapse(2) schedule(static)
    for (long oc = 0; oc < s.out_ch; ++oc)
        for (long ic = 0; ic < s.in_ch; ++ic)
            conv_bwd_weight_slice(X, dY, dW.data.data() + (oc * s.in_ch + ic) * s.k * s.k, oc,
                                  ic, s.k, s.stride, s.pad);
#pragma omp parallel for schedule(static)
    for (long oc = 0; oc < s.out_ch; ++oc) db.data[oc] = conv_bwd_bias_one(dY, oc);
}

void conv2d_backward(const Tensor& X, const Tensor& W, const ConvSpec& s, const Tensor& dY,
                     Tensor& dX, Tensor& dW, Tensor& db) {
    if (parallel_kernels()) conv2d_backward_omp(X, W, s, dY, dX, dW, db);
    else conv2d_backward_serial(X, W, s, dY, dX, dW, db);
}

namespace {

void check_linear_shapes(const Tensor& X, const Tensor& W, const Tensor& b, const Tensor& Y) {
    if (X.rank() != 2 || W.rank() != 2 || Y.rank() != 2)
        throw NumericError("linear: tensors must be rank 2");
    if (X.dim(1) != W.dim(1) || Y.dim(1) != W.dim(0) || Y.dim(0) != X.dim(0) ||
        b.numel() != W.dim(0))
        throw NumericError("linear: shape mismatch");
}

double dot_rows(const double* a, const double* b, long n) {
    double acc = 0.0;
    for (long i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace

void linear_forward_serial(const Tensor& X, const Tensor& W, const Tensor& b, Tensor& Y) {
    check_linear_shapes(X, W, b, Y);
    const long N = X.dim(0), I = X.dim(1), O = W.dim(0);
    for (long n = 0; n < N; ++n)
        for (long o = 0; o < O; ++o)
            Y.data[n * O + o] =
                b.data[o] + dot_rows(X.data.data() + n * I, W.data.data() + o * I, I);
}

void linear_forward_omp(const Tensor& X, const Tensor& W, const Tensor& b, Tensor& Y) {
    check_linear_shapes(X, W, b, Y);
    const long N = X.dim(0), I = X.dim(1), O = W.dim(0);
#pragma omp parallel for collapse(2) schedule(static)
    for (long n = 0; n < N; ++n)
        for (long o = 0; o < O; ++o)
            Y.data[n * O + o] =
                b.data[o] + dot_rows(X.data.data() + n * I, W.data.data() + o * I, I);
}

void linear_forward(const Tensor& X, const Tensor& W, const Tensor& b, Tensor& Y) {
    if (parallel_kernels()) linear_forward_omp(X, W, b, Y);
    else linear_forward_serial(X, W, b, Y);
}

namespace {

// dX row n = Σ_o dY[n][o] * W[o]; fixed o order.
void linear_bwd_input_row(const double* dYn, const Tensor& W, double* dXn, long I, long O) {
    for (long i = 0; i < I; ++i) dXn[i] = 0.0;
    for (long o = 0; o < O; ++o) {
        const double a = dYn[o];
        if (a == 0.0) continue;
        const double* wr = W.data.data() + o * I;
        for (long i = 0; i < I; ++i) dXn[i] += a * wr[i];
    }
}

// dW row o = Σ_n dY[n][o] * X[n]; fixed n order.
void linear_bwd_weight_row(const Tensor& X, const Tensor& dY, double* dWo, long o, long I,
                           long O) {
    const long N = X.dim(0);
    for (long i = 0; i < I; ++i) dWo[i] = 0.0;
    for (long n = 0; n < N; ++n) {
        const double a = dY.data[n * O + o];
        if (a == 0.0) continue;
        const double* xr = X.data.data() + n * I;
        for (long i = 0; i < I; ++i) dWo[i] += a * xr[i];
    }
}

}  // namespace

void linear_backward_serial(const Tensor& X, const Tensor& W, const Tensor& dY, Tensor& dX,
                            Tensor& dW, Tensor& db) {
    const long N = X.dim(0), I = X.dim(1), O = W.dim(0);
    if (dX.numel() != 0)
        for (long n = 0; n < N; ++n)
            linear_bwd_input_row(dY.data.data() + n * O, W, dX.data.data() + n * I, I, O);
    for (long o = 0; o < O; ++o)
        linear_bwd_weight_row(X, dY, dW.data.data() + o * I, o, I, O);
    for (long o = 0; o < O; ++o) {
        double acc = 0.0;
        for (long n = 0; n < N; ++n) acc += dY.data[n * O + o];
        db.data[o] = acc;
    }
}

void linear_backward_omp(const Tensor& X, const Tensor& W, const Tensor& dY, Tensor& dX,
                         Tensor& dW, Tensor& db) {
    const long N = X.dim(0), I = X.dim(1), O = W.dim(0);
    if (dX.numel() != 0) {
#pragma omp parallel for schedule(static)
        for (long n = 0; n < N; ++n)
            linear_bwd_input_row(dY.data.data() + n * O, W, dX.data.data() + n * I, I, O);
    }
#pragma omp parallel for schedule(static)
    for (long o = 0; o < O; ++o)
        linear_bwd_weight_row(X, dY, dW.data.data() + o * I, o, I, O);
#pragma omp parallel for schedule(static)
    for (long o = 0; o < O; ++o) {
        double acc = 0.0;
        for (long n = 0; n < N; ++n) acc += dY.data[n * O + o];
        db.data[o] = acc;
    }
}

void linear_backward(const Tensor& X, const Tensor& W, const Tensor& dY, Tensor& dX,
                     Tensor& dW, Tensor& db) {
    if (parallel_kernels()) linear_backward_omp(X, W, dY, dX, dW, db);
    else linear_backward_serial(X, W, dY, dX, dW, db);
}

void upsample2x_forward(const Tensor& X, Tensor& Y) {
    const long N = X.dim(0), C = X.dim(1), H = X.dim(2), W = X.dim(3);
    if (Y.dim(0) != N || Y.dim(1) != C || Y.dim(2) != 2 * H || Y.dim(3) != 2 * W)
        throw NumericError("upsample2x: output must be exactly 2x");
#pragma omp parallel for collapse(2) schedule(static) if (parallel_kernels())
    for (long n = 0; n < N; ++n)
        for (long c = 0; c < C; ++c) {
            const double* xp = X.data.data() + (n * C + c) * H * W;
            double* yp = Y.data.data() + (n * C + c) * 4 * H * W;
            for (long y = 0; y < H; ++y)
                for (long x = 0; x < W; ++x) {
                    const double v = xp[y * W + x];
                    double* r0 = yp + (2 * y) * 2 * W + 2 * x;
                    double* r1 = r0 + 2 * W;
                    r0[0] = r0[1] = r1[0] = r1[1] = v;
                }
        }
}

void upsample2x_backward(const Tensor& dY, Tensor& dX) {
    const long N = dX.dim(0), C = dX.dim(1), H = dX.dim(2), W = dX.dim(3);
    if (dY.dim(0) != N || dY.dim(1) != C || dY.dim(2) != 2 * H || dY.dim(3) != 2 * W)
        throw NumericError("upsample2x bwd: shape mismatch");
#pragma omp parallel for collapse(2) schedule(static) if (parallel_kernels())
    for (long n = 0; n < N; ++n)
        for (long c = 0; c < C; ++c) {
            const double* dyp = dY.data.data() + (n * C + c) * 4 * H * W;
            double* dxp = dX.data.data() + (n * C + c) * H * W;
            for (long y = 0; y < H; ++y)
                for (long x = 0; x < W; ++x) {
                    const double* r0 = dyp + (2 * y) * 2 * W + 2 * x;
                    const double* r1 = r0 + 2 * W;
                    dxp[y * W + x] = (r0[0] + r0[1]) + (r1[0] + r1[1]);
                }
        }
}

}  // namespace geoforge
