#include "weakgraph/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace weakgraph::kernels {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178032973640562; // 0.5*log(2*pi)

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void add_scalar(double* y, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

void colwise_sub_scalar(double* x, std::size_t h, std::size_t n, const double* z) {
    for (std::size_t t = 0; t < h; ++t) {
        double* row = x + t * n;
        for (std::size_t k = 0; k < n; ++k) row[k] -= z[k];
    }
}

void colwise_logsumexp_scalar(const double* x, std::size_t h, std::size_t n, double* out) {
    for (std::size_t k = 0; k < n; ++k) {
        double m = x[k];
        for (std::size_t t = 1; t < h; ++t) m = std::max(m, x[t * n + k]);
        double acc = 0.0;
        for (std::size_t t = 0; t < h; ++t) acc += std::exp(x[t * n + k] - m);
        out[k] = m + std::log(acc);
    }
}

void gaussian_loglik_scalar(const double* xi, const double* mean, double* out, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        const double d = xi[k] - mean[k];
        out[k] = -0.5 * d * d - kHalfLog2Pi;
    }
}

void vexp_scalar(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(x[i]);
}

std::size_t clamp_min_scalar(double* x, std::size_t n, double floor) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (x[i] < floor) {
            x[i] = floor;
            ++count;
        }
    }
    return count;
}

} // namespace

const Ops& scalar_ops() {
    static const Ops ops{
        "scalar",
        dot_scalar,
        add_scalar,
        colwise_sub_scalar,
        colwise_logsumexp_scalar,
        gaussian_loglik_scalar,
        vexp_scalar,
        clamp_min_scalar,
    };
    return ops;
}

} // namespace weakgraph::kernels
