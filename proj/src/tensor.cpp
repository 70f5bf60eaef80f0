#include "geoforge/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "geoforge/common.hpp"

namespace geoforge {

namespace {

long shape_numel(const std::vector<long>& s) {
    long n = 1;
    for (long d : s) {
        if (d < 0) throw DataError("tensor dim must be non-negative");
        n *= d;
    }
    return n;
}

}  // namespace

Tensor::Tensor(std::vector<long> s) : shape(std::move(s)), data(shape_numel(shape), 0.0) {}

Tensor Tensor::randn(std::vector<long> s, Rng& rng, double stddev) {
    Tensor t(std::move(s));
    for (double& v : t.data) v = rng.normal() * stddev;
    return t;
}

long Tensor::numel() const {
    return (long)data.size();
}

std::string Tensor::shape_str() const {
    std::string s = "(";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

void Tensor::fill(double v) {
    std::fill(data.begin(), data.end(), v);
}

void Tensor::add_(const Tensor& o) {
    if (!same_shape(o)) throw NumericError("tensor add: shape mismatch " + shape_str() + " vs " + o.shape_str());
    for (size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
}

void Tensor::scale_(double s) {
    for (double& v : data) v *= s;
}

double Tensor::dot(const Tensor& o) const {
    if (!same_shape(o)) throw NumericError("tensor dot: shape mismatch");
    double acc = 0;
    for (size_t i = 0; i < data.size(); ++i) acc += data[i] * o.data[i];
    return acc;
}

double Tensor::sum() const {
    double acc = 0;
    for (double v : data) acc += v;
    return acc;
}

double Tensor::max_abs() const {
    double m = 0;
    for (double v : data) m = std::max(m, std::abs(v));
    return m;
}

double max_rel_diff(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw NumericError("max_rel_diff: shape mismatch");
    double worst = 0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        double denom = std::max({1.0, std::abs(a.data[i]), std::abs(b.data[i])});
        worst = std::max(worst, std::abs(a.data[i] - b.data[i]) / denom);
    }
    return worst;
}

}  // namespace geoforge
