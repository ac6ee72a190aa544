#pragma once

#include <cstddef>
#include <string>

namespace weakgraph::kernels {

// Arithmetic kernels used by the belief-update inner loops.
//
// Log-belief matrices are stored hypothesis-major: x[t*n + k] holds the value
// for hypothesis t at agent k, so per-hypothesis rows are contiguous and
// per-agent reductions run across rows at stride n.
//
// Each operation has a scalar reference implementation and may have SIMD
// variants; the active table is selected once at startup (see active_ops).
struct Ops {
    const char* name;

    // sum_i a[i]*b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);

    // y[i] += x[i]
    void (*add)(double* y, const double* x, std::size_t n);

    // x[t*n+k] -= z[k] for all t < h, k < n
    void (*colwise_sub)(double* x, std::size_t h, std::size_t n, const double* z);

    // out[k] = log sum_{t<h} exp(x[t*n+k])
    void (*colwise_logsumexp)(const double* x, std::size_t h, std::size_t n, double* out);

    // out[k] = -0.5*(xi[k]-mean[k])^2 - 0.5*log(2*pi)   (unit-variance Gaussian)
    void (*gaussian_loglik)(const double* xi, const double* mean, double* out, std::size_t n);

    // out[i] = exp(x[i]); subnormal results (inputs below about -708) flush
    // to 0, inputs above about 709 give +inf
    void (*vexp)(const double* x, double* out, std::size_t n);

    // x[i] = max(x[i], floor); returns the number of clamped entries
    std::size_t (*clamp_min)(double* x, std::size_t n, double floor);
};

const Ops& scalar_ops();

#if defined(__x86_64__) || defined(_M_X64)
bool avx2_supported();
const Ops& avx2_ops(); // call only when avx2_supported()
#endif

// Table selected at startup: AVX2 when the CPU supports it, scalar otherwise.
// Environment variable WEAKGRAPH_KERNELS=scalar|avx2|auto overrides.
const Ops& active_ops();

// Force a backend by name ("scalar", "avx2"); throws Error on unknown or
// unsupported names. Intended for tests and benchmarking.
void force_backend(const std::string& name);

} // namespace weakgraph::kernels
