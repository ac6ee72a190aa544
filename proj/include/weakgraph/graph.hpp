#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "weakgraph/error.hpp"

namespace weakgraph {

// Partition of the N agents into S sending components followed by R receiving
// components. Agents are numbered 0..N-1 in component order, sending blocks
// first (external formats use 1-based ids).
struct NetworkPartition {
    int sending_count = 0;   // S
    int receiving_count = 0; // R
    std::vector<int> sizes;  // S+R component sizes

    int total() const;
    int sending_total() const;   // |S|
    int receiving_total() const; // |R|
    int component_of(int agent) const;
    // half-open agent range [begin, end) of component c
    std::pair<int, int> component_range(int c) const;
    bool is_receiving_agent(int agent) const { return agent >= sending_total(); }
    void validate() const; // throws InvalidSpec
};

// Left-stochastic combination matrix over a weak graph. a(l,k) is the weight
// agent k applies to the log-belief received from agent l; column k sums to 1
// and the receiving->sending block is identically zero.
struct CombinationMatrix {
    Eigen::MatrixXd a;
    NetworkPartition partition;

    // Checks all structural invariants; throws StructureViolation/InvalidSpec.
    void validate(double tol = 1e-12) const;
};

struct BlockDecomposition {
    Eigen::MatrixXd sending;   // A_S, block diagonal, |S| x |S|
    Eigen::MatrixXd send_recv; // A_SR, |S| x |R|
    Eigen::MatrixXd receiving; // A_R, |R| x |R|
};

// Limiting objects of A^i: E stacks the Perron rows per sending component,
// W = A_SR (I - A_R)^{-1}, Omega = E W (left-stochastic).
struct LimitingMatrices {
    Eigen::MatrixXd perron_block;        // E, |S| x |S|
    Eigen::MatrixXd w;                   // |S| x |R|
    Eigen::MatrixXd omega;               // |S| x |R|
    std::vector<Eigen::VectorXd> perron; // p^(s), one per sending component

    // N x N limit of A^i: [[E, Omega],[0, 0]]
    Eigen::MatrixXd a_infinity(const NetworkPartition& p) const;
};

// x(s, j): total limiting weight of sending component s on the j-th receiving
// agent; every column is strictly positive and sums to 1.
struct AggregateWeights {
    Eigen::MatrixXd x; // S x |R|
};

struct GraphSpec {
    NetworkPartition partition;
    double er_prob = 0.7;                // q, within sending components
    std::vector<double> send_recv_probs; // pi_1..pi_S
    double receiving_er_prob = -1.0;     // among receiving agents; <0 means er_prob
    std::uint64_t seed = 0;
    int max_retries = 1000;
    // When set, the matrix is assembled from these (l, k, weight) entries
    // instead of being drawn at random; columns are renormalized and all
    // structural invariants are still enforced.
    std::optional<std::vector<std::tuple<int, int, double>>> explicit_entries;

    void validate() const; // throws InvalidSpec
};

// Draws a weak graph satisfying every CombinationMatrix invariant, retrying
// up to spec.max_retries times; deterministic given spec.seed.
CombinationMatrix build_weak_graph(const GraphSpec& spec);

// Splits A into its three nonzero blocks; throws StructureViolation if any
// receiving->sending entry is nonzero.
BlockDecomposition block_decompose(const CombinationMatrix& a);

// Perron eigenvector of one sending block by power iteration: positive
// entries, sums to 1, ||A p - p||_inf <= tol. Throws NoConvergence.
Eigen::VectorXd perron_eigenvector(const Eigen::MatrixXd& block, double tol = 1e-13,
                                   int max_iter = 100000);

// Throws SingularSystem when (I - A_R) is numerically singular.
LimitingMatrices limiting_matrices(const CombinationMatrix& a);

// Aggregate weights computed from Omega; the Perron-independent route through
// W is evaluated as a cross-check and must agree to 1e-10.
AggregateWeights aggregate_weights(const LimitingMatrices& lim, const NetworkPartition& p);

} // namespace weakgraph
