#include "weakgraph/analysis.hpp"

#include <cmath>

namespace weakgraph {

Eigen::VectorXd network_divergence(const DivergenceMatrix& d, const Eigen::VectorXd& x_col) {
    if (x_col.size() != d.d.cols()) throw DimensionMismatch("x has wrong length");
    return d.d * x_col;
}

Eigen::VectorXd network_divergence_general(const std::vector<Eigen::VectorXd>& agent_divergences,
                                           const Eigen::VectorXd& omega_col) {
    if (omega_col.size() != static_cast<Eigen::Index>(agent_divergences.size()))
        throw DimensionMismatch("omega has wrong length");
    if (agent_divergences.empty()) throw DimensionMismatch("no sending agents");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(agent_divergences[0].size());
    for (std::size_t l = 0; l < agent_divergences.size(); ++l) {
        if (agent_divergences[l].size() != out.size())
            throw DimensionMismatch("divergence vectors disagree on H");
        out += omega_col(static_cast<Eigen::Index>(l)) * agent_divergences[l];
    }
    return out;
}

int limiting_hypothesis(const Eigen::VectorXd& divergences, double tie_tol) {
    if (divergences.size() < 2) throw DimensionMismatch("need at least two hypotheses");
    int arg = 0;
    double best = divergences(0);
    for (int t = 1; t < divergences.size(); ++t)
        if (divergences(t) < best) {
            best = divergences(t);
            arg = t;
        }
    for (int t = 0; t < divergences.size(); ++t)
        if (t != arg && divergences(t) - best <= tie_tol)
            throw AmbiguousMinimizer("network divergence has no unique minimizer");
    return arg;
}

Eigen::VectorXd predicted_rates(const Eigen::VectorXd& divergences, int theta_star) {
    if (theta_star < 0 || theta_star >= divergences.size())
        throw DimensionMismatch("theta_star out of range");
    return Eigen::VectorXd::Constant(divergences.size(), divergences(theta_star)) - divergences;
}

NetworkDivergence analyze_receiving_agent(const DivergenceMatrix& d,
                                          const Eigen::VectorXd& x_col) {
    NetworkDivergence out;
    out.divergence = network_divergence(d, x_col);
    out.theta_star = limiting_hypothesis(out.divergence);
    out.unique = true;
    out.rates = predicted_rates(out.divergence, out.theta_star);
    return out;
}

const char* to_string(CanonicalRegion r) {
    switch (r) {
    case CanonicalRegion::N1Dominant: return "N1-dominant";
    case CanonicalRegion::Middle: return "middle";
    case CanonicalRegion::N2Dominant: return "N2-dominant";
    }
    return "?";
}

CanonicalRegion canonical_region(const Eigen::VectorXd& x_col, double tie_tol) {
    if (x_col.size() != 2)
        throw WrongConfiguration("canonical regions are defined for S = 2 only");
    if (std::abs(x_col.sum() - 1.0) > 1e-9 || x_col.minCoeff() <= 0.0)
        throw WrongConfiguration("x must be a positive vector summing to 1");
    const double w1 = x_col(0);
    // boundaries are Assumption-3 violations, exactly like divergence ties
    if (std::abs(w1 - 0.75) <= tie_tol || std::abs(w1 - 0.25) <= tie_tol)
        throw AmbiguousMinimizer("aggregate weight sits on a dominance boundary");
    if (w1 > 0.75) return CanonicalRegion::N1Dominant;
    if (w1 < 0.25) return CanonicalRegion::N2Dominant;
    return CanonicalRegion::Middle;
}

} // namespace weakgraph
