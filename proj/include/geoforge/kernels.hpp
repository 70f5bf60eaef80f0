#pragma once

#include "geoforge/tensor.hpp"

namespace geoforge {

// Global switch for the OpenMP kernel variants (default on). The parallel
// kernels partition work over disjoint output slices with a fixed inner
// summation order, so results are bit-identical to the serial reference
// for any thread count.
void set_parallel_kernels(bool on);
bool parallel_kernels();

struct ConvSpec {
    long in_ch, out_ch, k, stride, pad;
};

long conv_out_dim(long in, long k, long stride, long pad);

// X:(N,IC,H,W)  W:(OC,IC,k,k)  b:(OC)  ->  Y:(N,OC,OH,OW)
void conv2d_forward_serial(const Tensor& X, const Tensor& W, const Tensor& b,
                           const ConvSpec& s, Tensor& Y);
void conv2d_forward_omp(const Tensor& X, const Tensor& W, const Tensor& b,
                        const ConvSpec& s, Tensor& Y);
void conv2d_forward(const Tensor& X, const Tensor& W, const Tensor& b, const ConvSpec& s,
                    Tensor& Y);

// dX/dW/db are overwritten (not accumulated)
void conv2d_backward_serial(const Tensor& X, const Tensor& W, const ConvSpec& s,
                            const Tensor& dY, Tensor& dX, Tensor& dW, Tensor& db);
void conv2d_backward_omp(const Tensor& X, const Tensor& W, const ConvSpec& s,
                         const Tensor& dY, Tensor& dX, Tensor& dW, Tensor& db);
void conv2d_backward(const Tensor& X, const Tensor& W, const ConvSpec& s, const Tensor& dY,
                     Tensor& dX, Tensor& dW, Tensor& db);

// X:(N,I)  W:(O,I)  b:(O)  ->  Y:(N,O)
void linear_forward_serial(const Tensor& X, const Tensor& W, const Tensor& b, Tensor& Y);
void linear_forward_omp(const Tensor& X, const Tensor& W, const Tensor& b, Tensor& Y);
void linear_forward(const Tensor& X, const Tensor& W, const Tensor& b, Tensor& Y);

void linear_backward_serial(const Tensor& X, const Tensor& W, const Tensor& dY, Tensor& dX,
                            Tensor& dW, Tensor& db);
void linear_backward_omp(const Tensor& X, const Tensor& W, const Tensor& dY, Tensor& dX,
                         Tensor& dW, Tensor& db);
void linear_backward(const Tensor& X, const Tensor& W, const Tensor& dY, Tensor& dX,
                     Tensor& dW, Tensor& db);

// nearest-neighbor 2x; backward sums each 2x2 block
void upsample2x_forward(const Tensor& X, Tensor& Y);
void upsample2x_backward(const Tensor& dY, Tensor& dX);

}  // namespace geoforge
