#pragma once

#include <Eigen/Dense>
#include <vector>

#include "weakgraph/learning.hpp"
#include "weakgraph/models.hpp"

namespace weakgraph {

// The linear system of the macroscopic inverse problem for one receiving
// agent: b has its theta_star-th row identically zero, c appends an all-ones
// row, y_tilde appends a 1 to the limiting data.
struct TopologySystem {
    Eigen::MatrixXd b;       // H x S
    Eigen::MatrixXd c;       // (H+1) x S
    Eigen::VectorXd y_tilde; // H+1
    int theta_star = 0;      // 0-based
};

struct TopologySolveResult {
    Eigen::VectorXd x_hat;
    int numerical_rank = 0;
    bool feasible = false;      // rank == S: unique solution
    double residual = 0.0;      // ||C x_hat - y_tilde||_2
    bool positivity_ok = false; // all entries of x_hat strictly positive
    int solution_set_dim = 0;   // S - rank
    // projector onto the null space of C (I - C^+ C); zero when feasible.
    // Perturbing x_hat along its range yields further solutions.
    Eigen::MatrixXd null_projector;
};

// Row theta of b is d(theta_star,.) - d(theta,.). Throws InconsistentData if
// y(theta_star) is nonzero beyond tol.
TopologySystem build_system(const DivergenceMatrix& d, int theta_star, const Eigen::VectorXd& y,
                            double tol = 1e-8);

// Singular values above rel_tol * largest count toward the rank.
int numerical_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-10);

// Least-squares solve through an SVD pseudoinverse. Infeasibility (rank < S)
// is a reported state, not an error; the minimum-norm point is returned for
// diagnostics together with the null-space projector.
TopologySolveResult solve_topology(const TopologySystem& sys, double rel_tol = 1e-10);

struct AgentEstimate {
    int agent = 0;           // 0-based engine index
    int theta_star_hat = 0;  // 0-based
    Eigen::VectorXd y_hat;   // empirical limiting data, entry theta_star forced to 0
    TopologySolveResult solve;
};

// Empirical pipeline: y_hat(theta) = log psi_{k,i}(theta) / i from the
// recorded intermediate beliefs at the given iteration, theta_star_hat by
// argmax, then build_system + solve_topology per recorded agent.
std::vector<AgentEstimate> estimate_from_trajectory(const TrajectoryRecord& traj,
                                                    const DivergenceMatrix& d, long iteration);

struct FeasibilityReport {
    int hypotheses = 0;
    int senders = 0;
    bool h_at_least_s = false;
    std::vector<int> rank_per_theta; // rank of C(theta) for every candidate theta
    bool feasible = false;           // H >= S and every rank equals S
};

FeasibilityReport feasibility_report(const DivergenceMatrix& d, double rel_tol = 1e-10);

// Matrix of squared pairwise distances of scalar points (hollow, symmetric).
Eigen::MatrixXd edm(const std::vector<double>& points);

// I - pinv(J(theta)) J(theta) for J(theta) = 1 e_theta^T - I; equals
// (1/H) * ones, which the Gaussian feasibility proof rests on.
Eigen::MatrixXd lemma2_projection(int theta, int h);

// Certificate vector for a 3-point EDM: returns v3 with v3^T E3 = ones^T and
// v3^T ones = 0, verifying both identities to 1e-10. Entries come from the
// closed form in the e_ij. Throws DegeneratePoints if any e is zero.
Eigen::Vector3d v3_certificate(double e12, double e13, double e23);

} // namespace weakgraph
