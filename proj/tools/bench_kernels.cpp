// Times the serial reference kernels against the OpenMP versions on
// denoiser-shaped workloads and verifies the results agree bit for bit.
#include <chrono>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "geoforge/common.hpp"
#include "geoforge/kernels.hpp"
#include "geoforge/tensor.hpp"

using namespace geoforge;
using Clock = std::chrono::steady_clock;

namespace {

double time_call(const std::function<void()>& fn, int min_reps, double min_seconds) {
    fn();  // warm up
    int reps = 0;
    auto start = Clock::now();
    double elapsed = 0.0;
    while (reps < min_reps || elapsed < min_seconds) {
        fn();
        ++reps;
        elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    }
    return elapsed / reps;
}

bool bits_equal(const Tensor& a, const Tensor& b) {
    if (a.shape != b.shape) return false;
    return std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0;
}

struct Row {
    std::string name;
    double serial_s = 0, omp_s = 0;
    double gflop = 0;  // per call
    bool identical = false;
};

void print_row(const Row& r) {
    std::cout << std::left << std::setw(34) << r.name << std::right << std::fixed
              << std::setprecision(3) << std::setw(10) << r.serial_s * 1e3 << " ms"
              << std::setw(10) << r.omp_s * 1e3 << " ms" << std::setw(8)
              << std::setprecision(2) << r.serial_s / r.omp_s << "x" << std::setw(9)
              << std::setprecision(2) << r.gflop / r.omp_s << " GF/s   "
              << (r.identical ? "bitwise-identical" : "MISMATCH") << "\n";
}

Row bench_conv(const std::string& name, long n, long cin, long cout, long hw, long stride,
               Rng& rng) {
    ConvSpec spec{cin, cout, 3, stride, 1};
    Tensor X = Tensor::randn({n, cin, hw, hw}, rng, 1.0);
    Tensor W = Tensor::randn({cout, cin, 3, 3}, rng, 0.1);
    Tensor b = Tensor::randn({cout}, rng, 0.1);
    const long out_hw = conv_out_dim(hw, 3, stride, 1);
    Tensor Ys({n, cout, out_hw, out_hw}), Yp({n, cout, out_hw, out_hw});
    Tensor dY = Tensor::randn({n, cout, out_hw, out_hw}, rng, 1.0);
    Tensor dXs(X.shape), dWs(W.shape), dbs(b.shape);
    Tensor dXp(X.shape), dWp(W.shape), dbp(b.shape);

    Row fwd{name + " forward"};
    fwd.gflop = 2.0 * n * cout * out_hw * out_hw * cin * 9 / 1e9;
    fwd.serial_s = time_call([&] { conv2d_forward_serial(X, W, b, spec, Ys); }, 3, 0.2);
    fwd.omp_s = time_call([&] { conv2d_forward_omp(X, W, b, spec, Yp); }, 3, 0.2);
    fwd.identical = bits_equal(Ys, Yp);
    print_row(fwd);

    Row bwd{name + " backward"};
    bwd.gflop = 3.0 * fwd.gflop;  // dX + dW + db passes
    bwd.serial_s = time_call([&] { conv2d_backward_serial(X, W, spec, dY, dXs, dWs, dbs); }, 3, 0.2);
    bwd.omp_s = time_call([&] { conv2d_backward_omp(X, W, spec, dY, dXp, dWp, dbp); }, 3, 0.2);
    bwd.identical = bits_equal(dXs, dXp) && bits_equal(dWs, dWp) && bits_equal(dbs, dbp);
    print_row(bwd);

    Row out = fwd;
    out.identical = fwd.identical && bwd.identical;
    return out;
}

Row bench_linear(const std::string& name, long n, long in, long out_dim, Rng& rng) {
    Tensor X = Tensor::randn({n, in}, rng, 1.0);
    Tensor W = Tensor::randn({out_dim, in}, rng, 0.1);
    Tensor b = Tensor::randn({out_dim}, rng, 0.1);
    Tensor Ys({n, out_dim}), Yp({n, out_dim});
    Tensor dY = Tensor::randn({n, out_dim}, rng, 1.0);
    Tensor dXs(X.shape), dWs(W.shape), dbs(b.shape);
    Tensor dXp(X.shape), dWp(W.shape), dbp(b.shape);

    Row fwd{name + " forward"};
    fwd.gflop = 2.0 * n * in * out_dim / 1e9;
    fwd.serial_s = time_call([&] { linear_forward_serial(X, W, b, Ys); }, 3, 0.2);
    fwd.omp_s = time_call([&] { linear_forward_omp(X, W, b, Yp); }, 3, 0.2);
    fwd.identical = bits_equal(Ys, Yp);
    print_row(fwd);

    Row bwd{name + " backward"};
    bwd.gflop = 3.0 * fwd.gflop;
    bwd.serial_s = time_call([&] { linear_backward_serial(X, W, dY, dXs, dWs, dbs); }, 3, 0.2);
    bwd.omp_s = time_call([&] { linear_backward_omp(X, W, dY, dXp, dWp, dbp); }, 3, 0.2);
    bwd.identical = bits_equal(dXs, dXp) && bits_equal(dWs, dWp) && bits_equal(dbs, dbp);
    print_row(bwd);

    Row r = fwd;
    r.identical = fwd.identical && bwd.identical;
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    long batch = 8;
    if (argc > 1) batch = std::stol(argv[1]);
#ifdef _OPENMP
    std::cout << "threads: " << omp_get_max_threads() << "\n";
#else
    std::cout << "threads: 1 (compiled without OpenMP)\n";
#endif
    std::cout << "batch: " << batch << "\n\n";
    std::cout << std::left << std::setw(34) << "kernel" << std::right << std::setw(13)
              << "serial" << std::setw(13) << "parallel" << std::setw(9) << "speedup"
              << std::setw(13) << "throughput" << "\n";

    Rng rng(42);
    bool all_ok = true;
    all_ok &= bench_conv("conv3x3 8->16 64px", batch, 8, 16, 64, 1, rng).identical;
    all_ok &= bench_conv("conv3x3 16->32 32px", batch, 16, 32, 32, 1, rng).identical;
    all_ok &= bench_conv("conv3x3 32->64 16px", batch, 32, 64, 16, 1, rng).identical;
    all_ok &= bench_conv("conv3x3 32->32 64px s2", batch, 32, 32, 64, 2, rng).identical;
    all_ok &= bench_linear("linear 128->128", batch * 64, 128, 128, rng).identical;

    std::cout << "\nserial and parallel kernels " << (all_ok ? "AGREE bitwise" : "DISAGREE")
              << "\n";
    return all_ok ? 0 : 1;
}
