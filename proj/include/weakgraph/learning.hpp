#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "weakgraph/graph.hpp"
#include "weakgraph/models.hpp"

namespace weakgraph {

// Per-agent beliefs over the H hypotheses, kept in log domain. Layout is
// hypothesis-major: log_mu[theta*N + k]. Every agent's row satisfies
// logsumexp_theta = 0 (a probability vector) after each update.
struct BeliefState {
    int agent_count = 0;
    int hypothesis_count = 0;
    std::vector<double> log_mu;
    long iteration = 0;

    double log_belief(int agent, int theta) const {
        return log_mu[static_cast<std::size_t>(theta) * agent_count + agent];
    }
    double belief(int agent, int theta) const { return std::exp(log_belief(agent, theta)); }
};

enum class InitMode { Uniform, RandomDirichlet };

// RandomDirichlet requires an rng; all entries come out strictly positive.
BeliefState init_beliefs(int agent_count, int hypothesis_count, InitMode mode,
                         Rng* rng = nullptr);

// Bayes update of one agent's log-belief row with its log-likelihood row
// (normalized output). Throws AllZeroLikelihood if every entry underflows.
std::vector<double> adapt_row(std::span<const double> log_mu, std::span<const double> log_lik);

// Log-linear combination for one agent: out(theta) is the weighted sum of the
// neighbors' intermediate log-beliefs, renormalized. log_psi is N x H,
// weights is column k of the combination matrix.
std::vector<double> combine_row(const Eigen::MatrixXd& log_psi, const Eigen::VectorXd& weights);

struct RecordSpec {
    std::vector<int> agents;         // empty = all receiving agents
    std::vector<long> at_iterations; // explicit iterations to snapshot
    long stride = 0;                 // additionally snapshot every stride-th iteration
    bool record_observations = false;
};

struct TrajectoryRecord {
    int agent_count = 0;
    int hypothesis_count = 0;
    std::uint64_t seed = 0;
    long horizon = 0;
    long clamp_events = 0;
    std::vector<int> agents;      // recorded agents (0-based)
    std::vector<long> iterations; // strictly increasing
    std::vector<Eigen::MatrixXd> log_psi; // one (n_agents x H) snapshot per iteration
    std::vector<Eigen::MatrixXd> log_mu;
    std::vector<std::vector<double>> observations; // all N agents, when recorded

    // index into iterations, or -1
    int index_of_iteration(long i) const;
};

// Synchronous two-step engine: every agent adapts on a fresh private
// observation, then every agent combines the same round's intermediate
// beliefs. Observations use one rng stream per agent derived from the seed.
class Simulator {
public:
    Simulator(const CombinationMatrix& graph, const std::vector<AgentModel>& models,
              std::uint64_t seed, InitMode init = InitMode::Uniform);

    void step();

    long iteration() const { return state_.iteration; }
    int agent_count() const { return n_; }
    int hypothesis_count() const { return h_; }
    const BeliefState& state() const { return state_; }
    // intermediate beliefs of the last completed round, hypothesis-major
    const std::vector<double>& log_psi() const { return log_psi_; }
    const std::vector<double>& observations() const { return xi_; }
    long clamp_events() const { return clamp_events_; }

private:
    int n_, h_;
    std::vector<double> a_t_;     // transposed combination matrix, row k = column k of A
    std::vector<double> log_psi_; // H*N
    std::vector<double> log_lik_; // H*N
    std::vector<double> scratch_; // H*N
    std::vector<double> lse_;     // N
    std::vector<double> xi_;      // N
    std::vector<double> gaussian_means_; // H*N when all likelihoods are Gaussian
    bool all_gaussian_ = false;
    const std::vector<AgentModel>* models_;
    std::vector<Rng> rngs_;
    BeliefState state_;
    long clamp_events_ = 0;
};

// Runs T synchronous rounds and records per rec; fully reproducible from
// (graph, models, horizon, seed).
TrajectoryRecord run(const CombinationMatrix& graph, const std::vector<AgentModel>& models,
                     long horizon, std::uint64_t seed, const RecordSpec& rec,
                     InitMode init = InitMode::Uniform);

} // namespace weakgraph
