#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <vector>

#include "geoforge/common.hpp"
#include "geoforge/kernels.hpp"
#include "geoforge/nn.hpp"

using namespace geoforge;

namespace {

Tensor random_tensor(std::vector<long> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    for (auto& v : t.data) v = rng.uniform(lo, hi);
    return t;
}

// relative-tolerance comparison for finite-difference checks
void check_close(double analytic, double numeric, double tol = 1e-6) {
    CHECK(std::abs(analytic - numeric) <= tol * std::max(1.0, std::abs(numeric)));
}

}  // namespace

TEST_CASE("conv_out_dim") {
    CHECK(conv_out_dim(64, 3, 1, 1) == 64);
    CHECK(conv_out_dim(64, 3, 2, 1) == 32);
    CHECK(conv_out_dim(5, 3, 2, 1) == 3);
    CHECK(conv_out_dim(8, 1, 1, 0) == 8);
}

TEST_CASE("silu forward/backward against central differences") {
    Rng rng(1);
    Tensor x = random_tensor({40}, rng, -4.0, 4.0);
    Tensor y({40});
    silu_forward(x, y);
    for (long i = 0; i < 40; ++i) {
        const double s = 1.0 / (1.0 + std::exp(-x.data[(size_t)i]));
        CHECK(y.data[(size_t)i] == doctest::Approx(x.data[(size_t)i] * s).epsilon(1e-12));
    }

    Tensor dy({40});
    dy.fill(1.0);
    Tensor dx({40});
    silu_backward(x, dy, dx, false);
    const double h = 1e-6;
    for (long i = 0; i < 40; ++i) {
        const double xv = x.data[(size_t)i];
        auto f = [](double v) { return v / (1.0 + std::exp(-v)); };
        check_close(dx.data[(size_t)i], (f(xv + h) - f(xv - h)) / (2 * h), 1e-7);
    }

    // accumulate mode adds on top
    Tensor dx2 = dx;
    silu_backward(x, dy, dx2, true);
    for (long i = 0; i < 40; ++i)
        CHECK(dx2.data[(size_t)i] == doctest::Approx(2.0 * dx.data[(size_t)i]).epsilon(1e-12));
}

TEST_CASE("conv kernels: omp variant is bit-identical to serial") {
    Rng rng(2);
    struct Case {
        ConvSpec s;
        long n, hw;
    };
    const std::vector<Case> cases = {
        {{2, 3, 3, 1, 1}, 2, 8},   // stride-1 3x3
        {{3, 4, 3, 2, 1}, 2, 8},   // stride-2 downsample
        {{4, 2, 1, 1, 0}, 3, 5},   // 1x1 injection shape
        {{1, 5, 3, 1, 1}, 1, 16},  // single channel in
    };
    for (const auto& c : cases) {
        Tensor X = random_tensor({c.n, c.s.in_ch, c.hw, c.hw}, rng);
        Tensor W = random_tensor({c.s.out_ch, c.s.in_ch, c.s.k, c.s.k}, rng);
        Tensor b = random_tensor({c.s.out_ch}, rng);
        const long oh = conv_out_dim(c.hw, c.s.k, c.s.stride, c.s.pad);

        Tensor Ys({c.n, c.s.out_ch, oh, oh}), Yp({c.n, c.s.out_ch, oh, oh});
        conv2d_forward_serial(X, W, b, c.s, Ys);

        Tensor dY = random_tensor(Ys.shape, rng);
        Tensor dXs(X.shape), dWs(W.shape), dbs(b.shape);
        conv2d_backward_serial(X, W, c.s, dY, dXs, dWs, dbs);

        for (int threads : {1, 2, 3, 7}) {
            omp_set_num_threads(threads);
            conv2d_forward_omp(X, W, b, c.s, Yp);
            CHECK(Yp.data == Ys.data);  // bitwise

            Tensor dXp(X.shape), dWp(W.shape), dbp(b.shape);
            conv2d_backward_omp(X, W, c.s, dY, dXp, dWp, dbp);
            CHECK(dXp.data == dXs.data);
            CHECK(dWp.data == dWs.data);
            CHECK(dbp.data == dbs.data);
        }
    }
    omp_set_num_threads(omp_get_num_procs());
}

TEST_CASE("linear kernels: omp variant is bit-identical to serial") {
    Rng rng(3);
    Tensor X = random_tensor({5, 33}, rng);
    Tensor W = random_tensor({17, 33}, rng);
    Tensor b = random_tensor({17}, rng);

    Tensor Ys({5, 17}), Yp({5, 17});
    linear_forward_serial(X, W, b, Ys);
    Tensor dY = random_tensor(Ys.shape, rng);
    Tensor dXs(X.shape), dWs(W.shape), dbs(b.shape);
    linear_backward_serial(X, W, dY, dXs, dWs, dbs);

    for (int threads : {1, 2, 5}) {
        omp_set_num_threads(threads);
        linear_forward_omp(X, W, b, Yp);
        CHECK(Yp.data == Ys.data);
        Tensor dXp(X.shape), dWp(W.shape), dbp(b.shape);
        linear_backward_omp(X, W, dY, dXp, dWp, dbp);
        CHECK(dXp.data == dXs.data);
        CHECK(dWp.data == dWs.data);
        CHECK(dbp.data == dbs.data);
    }
    omp_set_num_threads(omp_get_num_procs());
}

TEST_CASE("conv2d layer gradient check") {
    Rng rng(4);
    for (const ConvSpec spec : {ConvSpec{2, 3, 3, 1, 1}, ConvSpec{3, 4, 3, 2, 1},
                                ConvSpec{4, 3, 1, 1, 0}}) {
        Conv2d conv;
        conv.init("t", spec, &rng);
        const long hw = 6;
        Tensor X = random_tensor({2, spec.in_ch, hw, hw}, rng);
        Tensor R;  // fixed projection making the loss scalar: L = sum(Y * R)
        {
            Tensor Y = conv.forward(X);
            R = random_tensor(Y.shape, rng);
        }
        auto loss = [&]() { return conv.forward(X).dot(R); };

        Tensor dX = conv.backward(X, R);
        const double h = 1e-5;

        // every weight and bias element
        for (Param* p : {&conv.W, &conv.b}) {
            for (size_t i = 0; i < p->w.data.size(); ++i) {
                const double keep = p->w.data[i];
                p->w.data[i] = keep + h;
                const double lp = loss();
                p->w.data[i] = keep - h;
                const double lm = loss();
                p->w.data[i] = keep;
                check_close(p->g.data[i], (lp - lm) / (2 * h));
            }
        }
        // sampled input elements
        for (int k = 0; k < 24; ++k) {
            const size_t i = rng.below(X.data.size());
            const double keep = X.data[i];
            X.data[i] = keep + h;
            const double lp = loss();
            X.data[i] = keep - h;
            const double lm = loss();
            X.data[i] = keep;
            check_close(dX.data[i], (lp - lm) / (2 * h));
        }
    }
}

TEST_CASE("linear layer gradient check") {
    Rng rng(5);
    Linear lin;
    lin.init("t", 9, 7, &rng);
    Tensor X = random_tensor({3, 9}, rng);
    Tensor R = random_tensor({3, 7}, rng);
    auto loss = [&]() { return lin.forward(X).dot(R); };

    Tensor dX = lin.backward(X, R);
    const double h = 1e-5;
    for (Param* p : {&lin.W, &lin.b}) {
        for (size_t i = 0; i < p->w.data.size(); ++i) {
            const double keep = p->w.data[i];
            p->w.data[i] = keep + h;
            const double lp = loss();
            p->w.data[i] = keep - h;
            const double lm = loss();
            p->w.data[i] = keep;
            check_close(p->g.data[i], (lp - lm) / (2 * h));
        }
    }
    for (size_t i = 0; i < X.data.size(); ++i) {
        const double keep = X.data[i];
        X.data[i] = keep + h;
        const double lp = loss();
        X.data[i] = keep - h;
        const double lm = loss();
        X.data[i] = keep;
        check_close(dX.data[i], (lp - lm) / (2 * h));
    }
}

TEST_CASE("upsample2x forward pattern and backward sum") {
    Tensor X({1, 1, 2, 2});
    X.data = {1, 2, 3, 4};
    Tensor Y({1, 1, 4, 4});
    upsample2x_forward(X, Y);
    const std::vector<double> want = {1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4};
    CHECK(Y.data == want);

    Rng rng(6);
    Tensor dY = random_tensor({1, 1, 4, 4}, rng);
    Tensor dX({1, 1, 2, 2});
    upsample2x_backward(dY, dX);
    for (long y = 0; y < 2; ++y)
        for (long x = 0; x < 2; ++x) {
            double s = 0;
            for (long dy = 0; dy < 2; ++dy)
                for (long dx = 0; dx < 2; ++dx) s += dY.at4(0, 0, 2 * y + dy, 2 * x + dx);
            CHECK(dX.at4(0, 0, y, x) == doctest::Approx(s).epsilon(1e-12));
        }
}

TEST_CASE("resblock gradient check including condition pathway") {
    Rng rng(7);
    ResBlock rb;
    rb.init("rb", 4, 6, rng);
    // conv2 is zero-initialized; nudge it so its gradient pathway is active
    for (auto& v : rb.conv2.W.w.data) v = rng.uniform(-0.2, 0.2);

    Tensor x = random_tensor({2, 4, 6, 6}, rng);
    Tensor cond = random_tensor({2, 6}, rng);
    Tensor R;
    {
        ResBlock::Act act;
        R = random_tensor(rb.forward(x, cond, act).shape, rng);
    }
    auto loss = [&]() {
        ResBlock::Act act;
        return rb.forward(x, cond, act).dot(R);
    };

    ResBlock::Act act;
    rb.forward(x, cond, act);
    rb.visit([](Param& p) { p.zero_grad(); });
    Tensor dcond({2, 6});
    Tensor dx = rb.backward(act, cond, R, dcond);

    const double h = 1e-5;
    std::vector<Param*> params;
    rb.visit([&](Param& p) { params.push_back(&p); });
    REQUIRE(params.size() == 6);
    for (Param* p : params) {
        for (int k = 0; k < 12; ++k) {
            const size_t i = rng.below(p->w.data.size());
            const double keep = p->w.data[i];
            p->w.data[i] = keep + h;
            const double lp = loss();
            p->w.data[i] = keep - h;
            const double lm = loss();
            p->w.data[i] = keep;
            check_close(p->g.data[i], (lp - lm) / (2 * h));
        }
    }
    for (size_t i = 0; i < x.data.size(); i += 7) {
        const double keep = x.data[i];
        x.data[i] = keep + h;
        const double lp = loss();
        x.data[i] = keep - h;
        const double lm = loss();
        x.data[i] = keep;
        check_close(dx.data[i], (lp - lm) / (2 * h));
    }
    for (size_t i = 0; i < cond.data.size(); ++i) {
        const double keep = cond.data[i];
        cond.data[i] = keep + h;
        const double lp = loss();
        cond.data[i] = keep - h;
        const double lm = loss();
        cond.data[i] = keep;
        check_close(dcond.data[i], (lp - lm) / (2 * h));
    }
}

TEST_CASE("residual scaling keeps magnitudes stable at init") {
    // with conv2 zero-initialized the block computes x/sqrt(2) exactly
    Rng rng(8);
    ResBlock rb;
    rb.init("rb", 3, 4, rng);
    Tensor x = random_tensor({1, 3, 5, 5}, rng);
    Tensor cond = random_tensor({1, 4}, rng);
    ResBlock::Act act;
    Tensor y = rb.forward(x, cond, act);
    for (size_t i = 0; i < x.data.size(); ++i)
        CHECK(y.data[i] == doctest::Approx(x.data[i] / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("zero versus he initialization") {
    Rng rng(9);
    Conv2d zero, he;
    zero.init("z", ConvSpec{3, 4, 3, 1, 1}, nullptr);
    he.init("h", ConvSpec{3, 4, 3, 1, 1}, &rng);

    for (double v : zero.W.w.data) CHECK(v == 0.0);
    for (double v : zero.b.w.data) CHECK(v == 0.0);

    Tensor X = random_tensor({1, 3, 4, 4}, rng);
    CHECK(zero.forward(X).max_abs() == 0.0);
    CHECK(he.forward(X).max_abs() > 0.0);
}

TEST_CASE("adam first step and convergence") {
    SUBCASE("bias-corrected first step moves by ~lr in the gradient direction") {
        Param p;
        p.init_shape("w", {2});
        p.w.data = {1.0, -2.0};
        p.g.data = {0.3, -0.7};
        Adam opt;
        opt.lr = 0.01;
        opt.step({&p});
        // m_hat/sqrt(v_hat) == sign(g) up to eps on the first step
        CHECK(p.w.data[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-6));
        CHECK(p.w.data[1] == doctest::Approx(-2.0 + 0.01).epsilon(1e-6));
        CHECK(opt.step_count == 1);
    }
    SUBCASE("quadratic bowl converges") {
        Param p;
        p.init_shape("w", {4});
        p.w.data = {3.0, -1.5, 0.2, 7.0};
        const std::vector<double> target = {0.5, 1.0, -2.0, 4.0};
        Adam opt;
        opt.lr = 0.05;
        for (int it = 0; it < 2000; ++it) {
            for (size_t i = 0; i < 4; ++i) p.g.data[i] = p.w.data[i] - target[i];
            opt.step({&p});
        }
        for (size_t i = 0; i < 4; ++i)
            CHECK(p.w.data[i] == doctest::Approx(target[i]).epsilon(1e-3));
    }
}

TEST_CASE("dispatch honors the parallel-kernel switch deterministically") {
    Rng rng(10);
    const ConvSpec s{3, 5, 3, 1, 1};
    Tensor X = random_tensor({2, 3, 10, 10}, rng);
    Tensor W = random_tensor({5, 3, 3, 3}, rng);
    Tensor b = random_tensor({5}, rng);
    Tensor Y1({2, 5, 10, 10}), Y2({2, 5, 10, 10});

    set_parallel_kernels(false);
    CHECK(!parallel_kernels());
    conv2d_forward(X, W, b, s, Y1);
    set_parallel_kernels(true);
    CHECK(parallel_kernels());
    conv2d_forward(X, W, b, s, Y2);
    CHECK(Y1.data == Y2.data);
}
