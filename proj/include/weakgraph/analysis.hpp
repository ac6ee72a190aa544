#pragma once

#include <Eigen/Dense>
#include <vector>

#include "weakgraph/models.hpp"

namespace weakgraph {

// Theorem-1 predictions for one receiving agent.
struct NetworkDivergence {
    Eigen::VectorXd divergence; // D_k(theta), size H
    int theta_star = 0;         // 0-based argmin
    bool unique = true;
    Eigen::VectorXd rates;      // y_k(theta) = D_k(theta_star) - D_k(theta)
};

// Homogeneous form: D_k(theta) = sum_s d(theta,s) * x(s).
Eigen::VectorXd network_divergence(const DivergenceMatrix& d, const Eigen::VectorXd& x_col);

// General heterogeneous form: one divergence vector per sending agent,
// weighted by that agent's limiting weight omega(l, k).
Eigen::VectorXd network_divergence_general(const std::vector<Eigen::VectorXd>& agent_divergences,
                                           const Eigen::VectorXd& omega_col);

// Argmin with tie detection: values within tie_tol of the minimum are a tie
// and raise AmbiguousMinimizer.
int limiting_hypothesis(const Eigen::VectorXd& divergences, double tie_tol = 1e-12);

Eigen::VectorXd predicted_rates(const Eigen::VectorXd& divergences, int theta_star);

// Full per-agent report; throws AmbiguousMinimizer on a tie.
NetworkDivergence analyze_receiving_agent(const DivergenceMatrix& d, const Eigen::VectorXd& x_col);

// Dominance regions of the three-hypothesis Gaussian example. The thresholds
// (0.75 and 0.25 on the component-1 aggregate weight) do not depend on delta.
enum class CanonicalRegion { N1Dominant, Middle, N2Dominant };

const char* to_string(CanonicalRegion r);

// x_col must be the S=2 aggregate-weight column of a canonical configuration;
// throws WrongConfiguration otherwise, AmbiguousMinimizer on the boundaries.
CanonicalRegion canonical_region(const Eigen::VectorXd& x_col, double tie_tol = 1e-12);

} // namespace weakgraph
