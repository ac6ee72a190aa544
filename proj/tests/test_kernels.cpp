#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "weakgraph/kernels.hpp"
#include "weakgraph/rng.hpp"

using namespace weakgraph;
namespace k = weakgraph::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng, double lo = -30.0, double hi = 5.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

double ulp_distance(double a, double b) {
    if (a == b) return 0.0;
    const double scale = std::max(std::abs(a), std::abs(b));
    if (scale == 0.0) return 0.0;
    return std::abs(a - b) / (scale * 2.220446049250313e-16);
}

} // namespace

TEST_CASE("scalar kernels match direct formulas") {
    const auto& ops = k::scalar_ops();
    Rng rng(7);
    const std::size_t n = 13;
    auto a = random_vec(n, rng), b = random_vec(n, rng);

    double expect = 0.0;
    for (std::size_t i = 0; i < n; ++i) expect += a[i] * b[i];
    CHECK(ops.dot(a.data(), b.data(), n) == doctest::Approx(expect).epsilon(1e-14));

    auto y = a;
    ops.add(y.data(), b.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == a[i] + b[i]);

    // logsumexp over a 3 x n block against per-column direct evaluation
    const std::size_t h = 3;
    auto block = random_vec(h * n, rng);
    std::vector<double> out(n);
    ops.colwise_logsumexp(block.data(), h, n, out.data());
    for (std::size_t kk = 0; kk < n; ++kk) {
        double s = 0.0;
        for (std::size_t t = 0; t < h; ++t) s += std::exp(block[t * n + kk]);
        CHECK(out[kk] == doctest::Approx(std::log(s)).epsilon(1e-13));
    }

    ops.colwise_sub(block.data(), h, n, out.data());
    std::vector<double> renorm(n);
    ops.colwise_logsumexp(block.data(), h, n, renorm.data());
    for (double v : renorm) CHECK(std::abs(v) < 1e-12);

    std::vector<double> ll(n);
    ops.gaussian_loglik(a.data(), b.data(), ll.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        CHECK(ll[i] == doctest::Approx(-0.5 * d * d - 0.5 * std::log(2 * M_PI)).epsilon(1e-14));
    }

    auto c = random_vec(n, rng, -3.0, 3.0);
    const auto orig = c;
    const std::size_t clamped = ops.clamp_min(c.data(), n, 0.5);
    std::size_t expected_clamped = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (orig[i] < 0.5) ++expected_clamped;
        CHECK(c[i] == std::max(orig[i], 0.5));
    }
    CHECK(clamped == expected_clamped);
}

#if defined(__x86_64__) || defined(_M_X64)

TEST_CASE("avx2 vexp matches std::exp to a few ulps") {
    if (!k::avx2_supported()) return;
    const auto& ops = k::avx2_ops();
    Rng rng(11);
    std::vector<double> x;
    for (int i = 0; i < 4096; ++i) x.push_back(rng.uniform(-700.0, 700.0));
    for (int i = 0; i < 4096; ++i) x.push_back(rng.uniform(-40.0, 1.0)); // lse regime
    x.insert(x.end(), {0.0, 1.0, -1.0, 709.0, -700.0, 1e-300, -1e-300});
    std::vector<double> out(x.size());
    ops.vexp(x.data(), out.data(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(ulp_distance(out[i], std::exp(x[i])) <= 4.0);
    }
    // saturation behavior
    std::vector<double> extremes = {800.0, -800.0, -746.0};
    std::vector<double> eout(extremes.size());
    ops.vexp(extremes.data(), eout.data(), extremes.size());
    CHECK(std::isinf(eout[0]));
    CHECK(eout[1] == 0.0);
    CHECK(eout[2] == 0.0);
}

TEST_CASE("avx2 kernels agree with scalar reference") {
    if (!k::avx2_supported()) return;
    const auto& sc = k::scalar_ops();
    const auto& vx = k::avx2_ops();
    Rng rng(23);

    for (std::size_t n : {1u, 3u, 4u, 7u, 16u, 33u, 50u}) {
        auto a = random_vec(n, rng), b = random_vec(n, rng);
        CHECK(vx.dot(a.data(), b.data(), n) ==
              doctest::Approx(sc.dot(a.data(), b.data(), n)).epsilon(1e-13));

        auto y1 = a, y2 = a;
        sc.add(y1.data(), b.data(), n);
        vx.add(y2.data(), b.data(), n);
        CHECK(y1 == y2);

        const std::size_t h = 1 + n % 5;
        auto block = random_vec(h * n, rng);
        auto block2 = block;
        std::vector<double> o1(n), o2(n);
        sc.colwise_logsumexp(block.data(), h, n, o1.data());
        vx.colwise_logsumexp(block2.data(), h, n, o2.data());
        for (std::size_t i = 0; i < n; ++i) CHECK(o1[i] == doctest::Approx(o2[i]).epsilon(1e-14));

        sc.colwise_sub(block.data(), h, n, o1.data());
        vx.colwise_sub(block2.data(), h, n, o1.data());
        CHECK(block == block2);

        std::vector<double> l1(n), l2(n);
        sc.gaussian_loglik(a.data(), b.data(), l1.data(), n);
        vx.gaussian_loglik(a.data(), b.data(), l2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(l1[i] == doctest::Approx(l2[i]).epsilon(1e-14));

        auto c1 = random_vec(n, rng, -2.0, 2.0);
        auto c2 = c1;
        CHECK(sc.clamp_min(c1.data(), n, 0.0) == vx.clamp_min(c2.data(), n, 0.0));
        CHECK(c1 == c2);
    }
}

#endif

TEST_CASE("backend selection") {
    k::force_backend("scalar");
    CHECK(std::string(k::active_ops().name) == "scalar");
    CHECK_THROWS_AS(k::force_backend("neon"), Error);
#if defined(__x86_64__) || defined(_M_X64)
    if (k::avx2_supported()) {
        k::force_backend("avx2");
        CHECK(std::string(k::active_ops().name) == "avx2");
    }
#endif
    k::force_backend("auto");
}
