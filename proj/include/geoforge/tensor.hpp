#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace geoforge {

class Rng;

// Dense row-major double tensor; layout for images is planar (C,H,W) and
// batches are (N,C,H,W).
struct Tensor {
    std::vector<long> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<long> s);

    static Tensor zeros(std::vector<long> s) { return Tensor(std::move(s)); }
    static Tensor randn(std::vector<long> s, Rng& rng, double stddev = 1.0);

    long numel() const;
    long dim(int i) const { return shape[(size_t)i]; }
    int rank() const { return (int)shape.size(); }

    double& operator[](size_t i) { return data[i]; }
    double operator[](size_t i) const { return data[i]; }

    // 4-d convenience accessors (n,c,y,x); caller must know the rank
    double& at4(long n, long c, long y, long x) {
        return data[((n * shape[1] + c) * shape[2] + y) * shape[3] + x];
    }
    double at4(long n, long c, long y, long x) const {
        return data[((n * shape[1] + c) * shape[2] + y) * shape[3] + x];
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    std::string shape_str() const;

    void fill(double v);
    void add_(const Tensor& o);            // elementwise +=
    void scale_(double s);                 // elementwise *=
    double dot(const Tensor& o) const;     // sum of elementwise products
    double sum() const;
    double max_abs() const;
};

// Relative max-difference |a-b| / max(1, |a|, |b|), for kernel comparisons.
double max_rel_diff(const Tensor& a, const Tensor& b);

}  // namespace geoforge
