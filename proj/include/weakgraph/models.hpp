#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <variant>
#include <vector>

#include "weakgraph/error.hpp"
#include "weakgraph/rng.hpp"

namespace weakgraph {

// Unit-variance Gaussian on the real line.
struct GaussianDesc {
    double mean = 0.0;
};

// Beta distribution on (0,1) with the two standard shape parameters.
struct BetaDesc {
    double alpha = 1.0;
    double beta = 1.0;
};

using Distribution = std::variant<GaussianDesc, BetaDesc>;

// How a divergence value was obtained.
enum class KlMethod { Analytic, Quadrature, MonteCarlo };

// Method request for kl_divergence; Auto picks the closed form when one
// exists and falls back to quadrature.
enum class KlRequest { Auto, Analytic, Quadrature, MonteCarlo };

struct KlResult {
    double value = 0.0;
    KlMethod method = KlMethod::Analytic;
    double std_error = 0.0; // Monte Carlo only
};

// One agent's statistical model: the distribution its data actually follows
// plus the H likelihoods it evaluates. Perturbation draws used to build the
// likelihoods are stored on the model and never re-sampled.
struct AgentModel {
    Distribution truth;
    std::vector<Distribution> likelihoods;
    std::vector<double> offsets; // per-hypothesis perturbations, may be empty

    int hypothesis_count() const { return static_cast<int>(likelihoods.size()); }
};

// d(theta, s) = KL(truth of component s || likelihood theta of component s).
struct DivergenceMatrix {
    Eigen::MatrixXd d;                 // H x S
    std::vector<KlMethod> provenance;  // row-major H x S

    int hypotheses() const { return static_cast<int>(d.rows()); }
    int senders() const { return static_cast<int>(d.cols()); }
    KlMethod provenance_at(int theta, int s) const {
        return provenance[static_cast<std::size_t>(theta) * d.cols() + s];
    }
};

double sample(const Distribution& dist, Rng& rng);
inline double sample(const AgentModel& m, Rng& rng) { return sample(m.truth, rng); }

// Exact log-density; throws OutOfSupport for Beta arguments outside (0,1).
double log_density(const Distribution& dist, double x);
inline double log_likelihood(const AgentModel& m, double xi, int theta) {
    return log_density(m.likelihoods.at(theta), xi);
}

// KL(truth || lik). Gaussian pairs have the closed form 0.5*(a-b)^2; other
// pairs integrate f*log(f/L) over the truth's support to absolute tolerance
// tol. Throws DivergenceInfinite when the likelihood's support does not cover
// the truth's.
KlResult kl_divergence(const Distribution& truth, const Distribution& lik,
                       KlRequest request = KlRequest::Auto, double tol = 1e-8);

// Monte Carlo estimate with reported standard error; valid for any pair.
KlResult kl_monte_carlo(const Distribution& truth, const Distribution& lik,
                        std::size_t samples, std::uint64_t seed);

// Builds the H x S divergence matrix from the sending-component models
// (Assumption: one shared model per sending component).
DivergenceMatrix divergence_matrix(const std::vector<AgentModel>& sending_models, int h);

// Structured Gaussian divergence matrix: d(theta,s) = 0.5*(m_theta - nu_s)^2.
// Throws DegenerateMeans if two likelihood means coincide; nu entries must be
// drawn from the means (duplicated nu values are allowed and produce the
// rank-1 matrix).
DivergenceMatrix structured_gaussian_D(const std::vector<double>& means,
                                       const std::vector<double>& nu);

// n jointly Gaussian draws, each with the given variance and every pair with
// the given correlation; valid for correlation in (-1/(n-1), 1).
std::vector<double> equicorrelated_normals(int n, double variance, double correlation, Rng& rng);

// Likelihood means theta + eps with eps equicorrelated Gaussian (variance,
// correlation) across all (theta, s); truths are unit-variance Gaussians with
// the given means (default: mean 1 for every component).
std::vector<AgentModel> perturbed_gaussian_family(int h, int s, double variance,
                                                  double correlation, std::uint64_t seed,
                                                  const std::vector<double>& truth_means = {});

// Component s has truth Beta(s+1, 2) and likelihood theta Beta(theta+1+u, 2)
// with u uniform on [-half_width, half_width], all in 1-based paper indexing.
std::vector<AgentModel> beta_family(int h, int s, double half_width, std::uint64_t seed);

// The three-hypothesis Gaussian example: likelihood means (-delta, 0, +delta)
// everywhere; component 1 generates from -delta, component 2 from +delta.
std::vector<AgentModel> canonical_gaussian_models(double delta);

} // namespace weakgraph
