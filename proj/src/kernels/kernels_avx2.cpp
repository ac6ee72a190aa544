// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma; nothing here may be called unless avx2_supported().
#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <bit>
#include <cmath>

#include "weakgraph/kernels.hpp"

namespace weakgraph::kernels {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178032973640562;

// ---------------------------------------------------------------------------
// exp on 4 doubles, Cephes-style: r = x - n*ln2 reduced to |r| <= 0.5*ln2,
// exp(r) via a rational approximation, result scaled by 2^n through the
// exponent bits. Max error ~1 ulp on the primary range. Inputs above 709.437
// give +inf; inputs whose result would be subnormal flush to 0.
// ---------------------------------------------------------------------------

const __m256d kExpHi = _mm256_set1_pd(709.43613930310391424428);  // log(DBL_MAX) minus margin
const __m256d kExpLo = _mm256_set1_pd(-708.39641853226410621436); // log(2^-1022)
const __m256d kLog2E = _mm256_set1_pd(1.4426950408889634073599);
const __m256d kC1 = _mm256_set1_pd(6.93145751953125e-1);
const __m256d kC2 = _mm256_set1_pd(1.42860682030941723212e-6);

const __m256d kP0 = _mm256_set1_pd(1.26177193074810590878e-4);
const __m256d kP1 = _mm256_set1_pd(3.02994407707441961300e-2);
const __m256d kP2 = _mm256_set1_pd(9.99999999999999999910e-1);
const __m256d kQ0 = _mm256_set1_pd(3.00198505138664455042e-6);
const __m256d kQ1 = _mm256_set1_pd(2.52448340349684104192e-3);
const __m256d kQ2 = _mm256_set1_pd(2.27265548208155028766e-1);
const __m256d kQ3 = _mm256_set1_pd(2.00000000000000000005e0);

const __m256d kOne = _mm256_set1_pd(1.0);
const __m256d kTwo = _mm256_set1_pd(2.0);

inline __m256d vexp4(__m256d x) {
    const __m256d overflow = _mm256_cmp_pd(x, kExpHi, _CMP_GT_OQ);
    const __m256d underflow = _mm256_cmp_pd(x, kExpLo, _CMP_LT_OQ);
    x = _mm256_min_pd(_mm256_max_pd(x, kExpLo), kExpHi);

    const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, kLog2E),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, kC1, x);
    r = _mm256_fnmadd_pd(n, kC2, r);

    const __m256d rr = _mm256_mul_pd(r, r);
    __m256d p = _mm256_fmadd_pd(kP0, rr, kP1);
    p = _mm256_fmadd_pd(p, rr, kP2);
    p = _mm256_mul_pd(p, r);
    __m256d q = _mm256_fmadd_pd(kQ0, rr, kQ1);
    q = _mm256_fmadd_pd(q, rr, kQ2);
    q = _mm256_fmadd_pd(q, rr, kQ3);
    const __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
    __m256d res = _mm256_fmadd_pd(kTwo, e, kOne);

    // scale by 2^n: n fits in int32 here (|n| <= 1024)
    const __m128i n32 = _mm256_cvtpd_epi32(n);
    const __m256i n64 = _mm256_cvtepi32_epi64(n32);
    const __m256i expo = _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
    res = _mm256_mul_pd(res, _mm256_castsi256_pd(expo));

    res = _mm256_blendv_pd(res, _mm256_setzero_pd(), underflow);
    res = _mm256_blendv_pd(res, _mm256_set1_pd(HUGE_VAL), overflow);
    return res;
}

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void add_avx2(double* y, const double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] += x[i];
}

void colwise_sub_avx2(double* x, std::size_t h, std::size_t n, const double* z) {
    for (std::size_t t = 0; t < h; ++t) {
        double* row = x + t * n;
        std::size_t k = 0;
        for (; k + 4 <= n; k += 4)
            _mm256_storeu_pd(row + k,
                             _mm256_sub_pd(_mm256_loadu_pd(row + k), _mm256_loadu_pd(z + k)));
        for (; k < n; ++k) row[k] -= z[k];
    }
}

void colwise_logsumexp_avx2(const double* x, std::size_t h, std::size_t n, double* out) {
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        __m256d m = _mm256_loadu_pd(x + k);
        for (std::size_t t = 1; t < h; ++t)
            m = _mm256_max_pd(m, _mm256_loadu_pd(x + t * n + k));
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t t = 0; t < h; ++t)
            acc = _mm256_add_pd(acc, vexp4(_mm256_sub_pd(_mm256_loadu_pd(x + t * n + k), m)));
        alignas(32) double ms[4], as[4];
        _mm256_store_pd(ms, m);
        _mm256_store_pd(as, acc);
        for (int j = 0; j < 4; ++j) out[k + j] = ms[j] + std::log(as[j]);
    }
    for (; k < n; ++k) {
        double m = x[k];
        for (std::size_t t = 1; t < h; ++t) m = std::max(m, x[t * n + k]);
        double acc = 0.0;
        for (std::size_t t = 0; t < h; ++t) acc += std::exp(x[t * n + k] - m);
        out[k] = m + std::log(acc);
    }
}

void gaussian_loglik_avx2(const double* xi, const double* mean, double* out, std::size_t n) {
    const __m256d c = _mm256_set1_pd(-kHalfLog2Pi);
    const __m256d half = _mm256_set1_pd(-0.5);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(xi + k), _mm256_loadu_pd(mean + k));
        _mm256_storeu_pd(out + k, _mm256_fmadd_pd(_mm256_mul_pd(d, d), half, c));
    }
    for (; k < n; ++k) {
        const double d = xi[k] - mean[k];
        out[k] = -0.5 * d * d - kHalfLog2Pi;
    }
}

void vexp_avx2(const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, vexp4(_mm256_loadu_pd(x + i)));
    for (; i < n; ++i) {
        alignas(32) double tmp[4] = {x[i], 0.0, 0.0, 0.0};
        alignas(32) double res[4];
        _mm256_store_pd(res, vexp4(_mm256_load_pd(tmp)));
        out[i] = res[0];
    }
}

std::size_t clamp_min_avx2(double* x, std::size_t n, double floor) {
    const __m256d f = _mm256_set1_pd(floor);
    std::size_t count = 0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        const __m256d below = _mm256_cmp_pd(v, f, _CMP_LT_OQ);
        count += static_cast<std::size_t>(std::popcount(
            static_cast<unsigned>(_mm256_movemask_pd(below))));
        _mm256_storeu_pd(x + i, _mm256_max_pd(v, f));
    }
    for (; i < n; ++i) {
        if (x[i] < floor) {
            x[i] = floor;
            ++count;
        }
    }
    return count;
}

} // namespace

bool avx2_supported() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

const Ops& avx2_ops() {
    static const Ops ops{
        "avx2",
        dot_avx2,
        add_avx2,
        colwise_sub_avx2,
        colwise_logsumexp_avx2,
        gaussian_loglik_avx2,
        vexp_avx2,
        clamp_min_avx2,
    };
    return ops;
}

} // namespace weakgraph::kernels

#endif // x86_64
