#include "weakgraph/models.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>

namespace weakgraph {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178032973640562;

double log_beta_fn(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

bool on_real_line(const Distribution& d) { return std::holds_alternative<GaussianDesc>(d); }

void check_beta(const BetaDesc& b) {
    if (!(b.alpha > 0.0) || !(b.beta > 0.0)) throw InvalidShape("Beta shapes must be positive");
}

// log f - log L without support checks; used inside quadrature where x is
// interior to the truth's support.
double log_ratio(const Distribution& truth, const Distribution& lik, double x) {
    return log_density(truth, x) - log_density(lik, x);
}

KlResult kl_quadrature(const Distribution& truth, const Distribution& lik, double tol) {
    // support containment: a Gaussian truth cannot be covered by a Beta
    // likelihood, so the divergence is infinite
    if (on_real_line(truth) && !on_real_line(lik))
        throw DivergenceInfinite("likelihood support (0,1) does not cover the real line");

    double value = 0.0;
    if (on_real_line(truth)) {
        const auto integrand = [&](double x) {
            return std::exp(log_density(truth, x)) * log_ratio(truth, lik, x);
        };
        boost::math::quadrature::gauss_kronrod<double, 31> integrator;
        value = integrator.integrate(integrand, -std::numeric_limits<double>::infinity(),
                                     std::numeric_limits<double>::infinity(), 15, tol);
    } else {
        // Beta truth: integrate over (0,1); tanh_sinh handles the endpoint decay
        const auto integrand = [&](double x) {
            const double lf = log_density(truth, x);
            return std::exp(lf) * (lf - log_density(lik, x));
        };
        boost::math::quadrature::tanh_sinh<double> integrator;
        value = integrator.integrate(integrand, 0.0, 1.0, tol);
    }
    if (!std::isfinite(value)) throw DivergenceInfinite("KL quadrature diverged");
    return KlResult{value, KlMethod::Quadrature, 0.0};
}

} // namespace

double sample(const Distribution& dist, Rng& rng) {
    return std::visit(
        [&](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, GaussianDesc>) {
                return rng.normal(d.mean, 1.0);
            } else {
                check_beta(d);
                return rng.beta(d.alpha, d.beta);
            }
        },
        dist);
}

double log_density(const Distribution& dist, double x) {
    return std::visit(
        [&](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, GaussianDesc>) {
                const double z = x - d.mean;
                return -0.5 * z * z - kHalfLog2Pi;
            } else {
                check_beta(d);
                if (!(x > 0.0 && x < 1.0))
                    throw OutOfSupport("Beta density evaluated outside (0,1)");
                return (d.alpha - 1.0) * std::log(x) + (d.beta - 1.0) * std::log1p(-x) -
                       log_beta_fn(d.alpha, d.beta);
            }
        },
        dist);
}

KlResult kl_divergence(const Distribution& truth, const Distribution& lik, KlRequest request,
                       double tol) {
    const bool both_gaussian = on_real_line(truth) && on_real_line(lik);
    switch (request) {
    case KlRequest::Analytic:
        if (!both_gaussian) throw Error("no closed form for this descriptor pair");
        [[fallthrough]];
    case KlRequest::Auto:
        if (both_gaussian) {
            const double a = std::get<GaussianDesc>(truth).mean;
            const double b = std::get<GaussianDesc>(lik).mean;
            return KlResult{0.5 * (a - b) * (a - b), KlMethod::Analytic, 0.0};
        }
        [[fallthrough]];
    case KlRequest::Quadrature:
        return kl_quadrature(truth, lik, tol);
    case KlRequest::MonteCarlo:
        return kl_monte_carlo(truth, lik, 1000000, 0x5eed);
    }
    throw Error("unreachable");
}

KlResult kl_monte_carlo(const Distribution& truth, const Distribution& lik, std::size_t samples,
                        std::uint64_t seed) {
    if (on_real_line(truth) && !on_real_line(lik))
        throw DivergenceInfinite("likelihood support (0,1) does not cover the real line");
    Rng rng(seed);
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double x = sample(truth, rng);
        const double v = log_ratio(truth, lik, x);
        const double delta = v - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (v - mean);
    }
    const double variance = m2 / static_cast<double>(samples - 1);
    return KlResult{mean, KlMethod::MonteCarlo, std::sqrt(variance / static_cast<double>(samples))};
}

DivergenceMatrix divergence_matrix(const std::vector<AgentModel>& sending_models, int h) {
    const int s_count = static_cast<int>(sending_models.size());
    DivergenceMatrix out;
    out.d.resize(h, s_count);
    out.provenance.resize(static_cast<std::size_t>(h) * s_count);
    for (int s = 0; s < s_count; ++s) {
        const AgentModel& m = sending_models[s];
        if (m.hypothesis_count() != h)
            throw DimensionMismatch("model has wrong number of likelihoods");
        for (int theta = 0; theta < h; ++theta) {
            const KlResult r = kl_divergence(m.truth, m.likelihoods[theta]);
            out.d(theta, s) = r.value;
            out.provenance[static_cast<std::size_t>(theta) * s_count + s] = r.method;
        }
    }
    return out;
}

DivergenceMatrix structured_gaussian_D(const std::vector<double>& means,
                                       const std::vector<double>& nu) {
    const int h = static_cast<int>(means.size());
    const int s_count = static_cast<int>(nu.size());
    if (h < 2) throw InvalidSpec("need at least two hypotheses");
    for (int i = 0; i < h; ++i)
        for (int j = i + 1; j < h; ++j)
            if (means[i] == means[j])
                throw DegenerateMeans("likelihood means must be distinct");
    for (double v : nu) {
        bool found = false;
        for (double m : means) found = found || m == v;
        if (!found) throw InvalidSpec("every truth mean must be one of the likelihood means");
    }

    DivergenceMatrix out;
    out.d.resize(h, s_count);
    out.provenance.assign(static_cast<std::size_t>(h) * s_count, KlMethod::Analytic);
    for (int theta = 0; theta < h; ++theta)
        for (int s = 0; s < s_count; ++s) {
            const double diff = means[theta] - nu[s];
            out.d(theta, s) = 0.5 * diff * diff;
        }
    return out;
}

std::vector<double> equicorrelated_normals(int n, double variance, double correlation,
                                           Rng& rng) {
    if (n < 1) throw InvalidSpec("need at least one draw");
    if (variance < 0.0) throw InvalidSpec("variance must be nonnegative");
    if (n > 1 && !(correlation > -1.0 / (n - 1) && correlation < 1.0))
        throw InvalidCorrelation("correlation must lie in (-1/(n-1), 1)");

    // exact square root of the equicorrelation matrix (1-rho)I + rho*11^T;
    // for rho >= 0 this is the shared-factor-plus-residual construction
    const double sigma = std::sqrt(variance);
    const double alpha = std::sqrt(1.0 - correlation);
    const double beta = (std::sqrt(1.0 + (n - 1) * correlation) - alpha) / n;

    std::vector<double> g(n);
    double gsum = 0.0;
    for (double& v : g) {
        v = rng.normal();
        gsum += v;
    }
    for (double& v : g) v = sigma * (alpha * v + beta * gsum);
    return g;
}

std::vector<AgentModel> perturbed_gaussian_family(int h, int s, double variance,
                                                  double correlation, std::uint64_t seed,
                                                  const std::vector<double>& truth_means) {
    if (h < 2 || s < 1) throw InvalidSpec("need h >= 2 and s >= 1");
    if (!truth_means.empty() && static_cast<int>(truth_means.size()) != s)
        throw DimensionMismatch("need one truth mean per sending component");

    Rng rng(seed);
    const std::vector<double> eps = equicorrelated_normals(h * s, variance, correlation, rng);

    std::vector<AgentModel> models(s);
    for (int j = 0; j < s; ++j) {
        AgentModel& m = models[j];
        m.truth = GaussianDesc{truth_means.empty() ? 1.0 : truth_means[j]};
        m.likelihoods.resize(h);
        m.offsets.resize(h);
        for (int theta = 0; theta < h; ++theta) {
            m.offsets[theta] = eps[theta * s + j];
            m.likelihoods[theta] =
                GaussianDesc{static_cast<double>(theta + 1) + eps[theta * s + j]};
        }
    }
    return models;
}

std::vector<AgentModel> beta_family(int h, int s, double half_width, std::uint64_t seed) {
    if (h < 2 || s < 1) throw InvalidSpec("need h >= 2 and s >= 1");
    if (half_width < 0.0 || half_width >= 2.0)
        throw InvalidShape("half_width must lie in [0, 2) to keep all shapes positive");

    Rng rng(seed);
    std::vector<AgentModel> models(s);
    for (int j = 0; j < s; ++j) {
        AgentModel& m = models[j];
        m.truth = BetaDesc{static_cast<double>(j) + 2.0, 2.0};
        m.likelihoods.resize(h);
        m.offsets.resize(h);
        for (int theta = 0; theta < h; ++theta) {
            const double u = rng.uniform(-half_width, half_width);
            m.offsets[theta] = u;
            m.likelihoods[theta] = BetaDesc{static_cast<double>(theta) + 2.0 + u, 2.0};
        }
    }
    return models;
}

std::vector<AgentModel> canonical_gaussian_models(double delta) {
    if (!(delta > 0.0)) throw InvalidSpec("delta must be positive");
    const std::vector<Distribution> liks = {GaussianDesc{-delta}, GaussianDesc{0.0},
                                            GaussianDesc{+delta}};
    std::vector<AgentModel> models(2);
    models[0] = AgentModel{GaussianDesc{-delta}, liks, {}};
    models[1] = AgentModel{GaussianDesc{+delta}, liks, {}};
    return models;
}

} // namespace weakgraph
