#pragma once

#include <functional>
#include <string>
#include <vector>

#include "geoforge/common.hpp"
#include "geoforge/kernels.hpp"
#include "geoforge/tensor.hpp"

namespace geoforge {

// Parameter tensor with gradient and Adam moments, checkpointed by name.
struct Param {
    std::string name;
    Tensor w, g, m, v;

    void init_shape(std::string n, std::vector<long> shape);
    void zero_grad() { g.fill(0.0); }
};

using ParamVisitor = std::function<void(Param&)>;

// y = x * sigmoid(x), elementwise
void silu_forward(const Tensor& x, Tensor& y);
// dx += dy * silu'(x)  (accumulate=false overwrites)
void silu_backward(const Tensor& x, const Tensor& dy, Tensor& dx, bool accumulate);

struct Conv2d {
    ConvSpec spec{};
    Param W, b;

    // he: N(0, sqrt(2/fan_in)); zero keeps the layer silent at init
    void init(const std::string& name, ConvSpec s, Rng* rng);  // rng==nullptr → zero init
    Tensor forward(const Tensor& X) const;
    // overwrites this->W.g / b.g; returns dX (empty when need_dx=false)
    Tensor backward(const Tensor& X, const Tensor& dY, bool need_dx = true);
    void visit(const ParamVisitor& fn) {
        fn(W);
        fn(b);
    }
};

struct Linear {
    Param W, b;

    void init(const std::string& name, long in_dim, long out_dim, Rng* rng);
    Tensor forward(const Tensor& X) const;
    Tensor backward(const Tensor& X, const Tensor& dY, bool need_dx = true);
    void visit(const ParamVisitor& fn) {
        fn(W);
        fn(b);
    }
};

// Conditioned residual block, h = conv2(silu(conv1(silu(x)) + P·v)),
// out = (x + h)/√2. No normalization layers; conv2 is zero-initialized.
struct ResBlock {
    long channels = 0, cond_width = 0;
    Conv2d conv1, conv2;
    Linear proj;

    struct Act {  // saved forward state needed by backward
        Tensor x, a1, h2;
    };

    void init(const std::string& name, long ch, long cw, Rng& rng);
    Tensor forward(const Tensor& x, const Tensor& cond, Act& act) const;
    // returns dx; accumulates d(cond) into dcond
    Tensor backward(const Act& act, const Tensor& cond, const Tensor& dOut, Tensor& dcond);
    void visit(const ParamVisitor& fn) {
        conv1.visit(fn);
        conv2.visit(fn);
        proj.visit(fn);
    }
};

// Adam with bias correction; no weight decay.
struct Adam {
    double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long step_count = 0;

    void step(const std::vector<Param*>& params);
};

// Two-layer projection head used for metadata/timestep conditioning:
// out = W2·silu(W1·e + b1) + b2.
struct Mlp {
    Linear fc1, fc2;

    void init(const std::string& name, long in_dim, long hidden, long out_dim, Rng& rng);
    Tensor forward(const Tensor& e, Tensor& hidden_act) const;  // saves pre-activation
    Tensor backward(const Tensor& e, const Tensor& hidden_act, const Tensor& dOut);
    void visit(const ParamVisitor& fn) {
        fc1.visit(fn);
        fc2.visit(fn);
    }
};

}  // namespace geoforge
