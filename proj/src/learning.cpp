#include "weakgraph/learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "weakgraph/kernels.hpp"

namespace weakgraph {

namespace {

// beliefs this far below the maximum are clamped; keeps long runs finite
constexpr double kLogBeliefFloor = -1e6;

double logsumexp(std::span<const double> v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double acc = 0.0;
    for (double x : v) acc += std::exp(x - m);
    return m + std::log(acc);
}

} // namespace

BeliefState init_beliefs(int agent_count, int hypothesis_count, InitMode mode, Rng* rng) {
    if (hypothesis_count < 2) throw InvalidSpec("need at least two hypotheses");
    if (agent_count < 1) throw InvalidSpec("need at least one agent");
    BeliefState s;
    s.agent_count = agent_count;
    s.hypothesis_count = hypothesis_count;
    s.log_mu.resize(static_cast<std::size_t>(agent_count) * hypothesis_count);
    if (mode == InitMode::Uniform) {
        std::fill(s.log_mu.begin(), s.log_mu.end(), -std::log(double(hypothesis_count)));
        return s;
    }
    if (rng == nullptr) throw InvalidSpec("random initialization needs an rng");
    for (int k = 0; k < agent_count; ++k) {
        double sum = 0.0;
        std::vector<double> g(hypothesis_count);
        for (double& v : g) {
            // Exp(1) draws normalize to a flat Dirichlet; strictly positive
            v = -std::log(1.0 - rng->uniform());
            sum += v;
        }
        for (int t = 0; t < hypothesis_count; ++t)
            s.log_mu[static_cast<std::size_t>(t) * agent_count + k] = std::log(g[t] / sum);
    }
    return s;
}

std::vector<double> adapt_row(std::span<const double> log_mu, std::span<const double> log_lik) {
    if (log_mu.size() != log_lik.size()) throw DimensionMismatch("row sizes differ");
    std::vector<double> out(log_mu.size());
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = log_mu[t] + log_lik[t];
    const double z = logsumexp(out);
    if (!std::isfinite(z))
        throw AllZeroLikelihood("every hypothesis underflowed at this observation");
    for (double& v : out) v -= z;
    return out;
}

std::vector<double> combine_row(const Eigen::MatrixXd& log_psi, const Eigen::VectorXd& weights) {
    if (log_psi.rows() != weights.size()) throw DimensionMismatch("weights/psi sizes differ");
    const int h = static_cast<int>(log_psi.cols());
    std::vector<double> out(h, 0.0);
    for (int l = 0; l < weights.size(); ++l) {
        const double w = weights(l);
        if (w == 0.0) continue; // absent neighbors contribute nothing
        for (int t = 0; t < h; ++t) out[t] += w * log_psi(l, t);
    }
    const double z = logsumexp(out);
    for (double& v : out) v -= z;
    return out;
}

int TrajectoryRecord::index_of_iteration(long i) const {
    const auto it = std::lower_bound(iterations.begin(), iterations.end(), i);
    if (it == iterations.end() || *it != i) return -1;
    return static_cast<int>(it - iterations.begin());
}

Simulator::Simulator(const CombinationMatrix& graph, const std::vector<AgentModel>& models,
                     std::uint64_t seed, InitMode init)
    : n_(graph.partition.total()), h_(0), models_(&models) {
    if (static_cast<int>(models.size()) != n_)
        throw DimensionMismatch("need one model per agent");
    h_ = models[0].hypothesis_count();
    for (const AgentModel& m : models)
        if (m.hypothesis_count() != h_)
            throw DimensionMismatch("models disagree on the number of hypotheses");
    if (graph.a.rows() != n_) throw DimensionMismatch("graph size does not match partition");

    a_t_.resize(static_cast<std::size_t>(n_) * n_);
    for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l) a_t_[static_cast<std::size_t>(k) * n_ + l] = graph.a(l, k);

    const std::size_t hn = static_cast<std::size_t>(h_) * n_;
    log_psi_.assign(hn, 0.0);
    log_lik_.assign(hn, 0.0);
    scratch_.assign(hn, 0.0);
    lse_.assign(n_, 0.0);
    xi_.assign(n_, 0.0);

    all_gaussian_ = true;
    for (const AgentModel& m : models)
        for (const Distribution& d : m.likelihoods)
            all_gaussian_ = all_gaussian_ && std::holds_alternative<GaussianDesc>(d);
    if (all_gaussian_) {
        gaussian_means_.resize(hn);
        for (int t = 0; t < h_; ++t)
            for (int k = 0; k < n_; ++k)
                gaussian_means_[static_cast<std::size_t>(t) * n_ + k] =
                    std::get<GaussianDesc>(models[k].likelihoods[t]).mean;
    }

    rngs_.reserve(n_);
    for (int k = 0; k < n_; ++k) rngs_.emplace_back(substream_seed(seed, k + 1));

    Rng init_rng(substream_seed(seed, 0));
    state_ = init_beliefs(n_, h_, init, &init_rng);
}

void Simulator::step() {
    const auto& ops = kernels::active_ops();
    const std::size_t nn = static_cast<std::size_t>(n_);

    // adapt phase: private observation, Bayes update (parallel across agents)
    for (int k = 0; k < n_; ++k) xi_[k] = sample((*models_)[k], rngs_[k]);

    if (all_gaussian_) {
        for (int t = 0; t < h_; ++t)
            ops.gaussian_loglik(xi_.data(), gaussian_means_.data() + t * nn,
                                log_lik_.data() + t * nn, nn);
    } else {
        for (int k = 0; k < n_; ++k)
            for (int t = 0; t < h_; ++t)
                log_lik_[t * nn + k] = log_likelihood((*models_)[k], xi_[k], t);
    }

    std::copy(state_.log_mu.begin(), state_.log_mu.end(), log_psi_.begin());
    for (int t = 0; t < h_; ++t)
        ops.add(log_psi_.data() + t * nn, log_lik_.data() + t * nn, nn);
    ops.colwise_logsumexp(log_psi_.data(), h_, nn, lse_.data());
    for (int k = 0; k < n_; ++k)
        if (!std::isfinite(lse_[k]))
            throw AllZeroLikelihood("every hypothesis underflowed at agent " +
                                    std::to_string(k + 1));
    ops.colwise_sub(log_psi_.data(), h_, nn, lse_.data());
    clamp_events_ += ops.clamp_min(log_psi_.data(), log_psi_.size(), kLogBeliefFloor);

    // combine phase: reads the frozen psi of this round for all agents
    for (int t = 0; t < h_; ++t) {
        const double* psi_row = log_psi_.data() + t * nn;
        double* out_row = scratch_.data() + t * nn;
        for (int k = 0; k < n_; ++k) out_row[k] = ops.dot(a_t_.data() + k * nn, psi_row, nn);
    }
    ops.colwise_logsumexp(scratch_.data(), h_, nn, lse_.data());
    ops.colwise_sub(scratch_.data(), h_, nn, lse_.data());
    clamp_events_ += ops.clamp_min(scratch_.data(), scratch_.size(), kLogBeliefFloor);

    state_.log_mu.swap(scratch_);
    ++state_.iteration;
}

TrajectoryRecord run(const CombinationMatrix& graph, const std::vector<AgentModel>& models,
                     long horizon, std::uint64_t seed, const RecordSpec& rec, InitMode init) {
    if (horizon < 1) throw InvalidSpec("horizon must be at least 1");
    Simulator sim(graph, models, seed, init);
    const int n = sim.agent_count();
    const int h = sim.hypothesis_count();

    TrajectoryRecord out;
    out.agent_count = n;
    out.hypothesis_count = h;
    out.seed = seed;
    out.horizon = horizon;
    out.agents = rec.agents;
    if (out.agents.empty())
        for (int k = graph.partition.sending_total(); k < n; ++k) out.agents.push_back(k);
    for (int k : out.agents)
        if (k < 0 || k >= n) throw InvalidSpec("recorded agent out of range");

    std::vector<char> selected(horizon + 1, 0);
    for (long i : rec.at_iterations)
        if (i >= 1 && i <= horizon) selected[i] = 1;
    if (rec.stride > 0)
        for (long i = rec.stride; i <= horizon; i += rec.stride) selected[i] = 1;
    if (rec.at_iterations.empty() && rec.stride <= 0) selected[horizon] = 1;

    for (long i = 1; i <= horizon; ++i) {
        sim.step();
        if (rec.record_observations) out.observations.push_back(sim.observations());
        if (!selected[i]) continue;
        Eigen::MatrixXd psi(out.agents.size(), h), mu(out.agents.size(), h);
        for (std::size_t j = 0; j < out.agents.size(); ++j) {
            const int k = out.agents[j];
            for (int t = 0; t < h; ++t) {
                psi(j, t) = sim.log_psi()[static_cast<std::size_t>(t) * n + k];
                mu(j, t) = sim.state().log_belief(k, t);
            }
        }
        out.iterations.push_back(i);
        out.log_psi.push_back(std::move(psi));
        out.log_mu.push_back(std::move(mu));
    }
    out.clamp_events = sim.clamp_events();
    return out;
}

} // namespace weakgraph
