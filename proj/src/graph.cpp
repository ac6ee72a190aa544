#include "weakgraph/graph.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "weakgraph/rng.hpp"

namespace weakgraph {

namespace {

// undirected connectivity of `nodes` under pattern(l,k) = a(l,k) > 0 || a(k,l) > 0
bool connected_undirected(const Eigen::MatrixXd& a, int begin, int end) {
    const int n = end - begin;
    if (n <= 1) return true;
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int visited = 1;
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v = 0; v < n; ++v) {
            if (seen[v]) continue;
            if (a(begin + u, begin + v) > 0.0 || a(begin + v, begin + u) > 0.0) {
                seen[v] = 1;
                ++visited;
                q.push(v);
            }
        }
    }
    return visited == n;
}

// directed reachability from node `begin` over pattern a(l,k) > 0 meaning l -> k
int reach_count(const Eigen::MatrixXd& a, int begin, int end, bool reverse) {
    const int n = end - begin;
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int visited = 1;
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v = 0; v < n; ++v) {
            if (seen[v]) continue;
            const double w = reverse ? a(begin + v, begin + u) : a(begin + u, begin + v);
            if (w > 0.0) {
                seen[v] = 1;
                ++visited;
                q.push(v);
            }
        }
    }
    return visited;
}

bool strongly_connected(const Eigen::MatrixXd& a, int begin, int end) {
    const int n = end - begin;
    if (n <= 1) return true;
    return reach_count(a, begin, end, false) == n && reach_count(a, begin, end, true) == n;
}

double spectral_radius(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) return 0.0;
    return Eigen::EigenSolver<Eigen::MatrixXd>(m, false).eigenvalues().cwiseAbs().maxCoeff();
}

} // namespace

// --------------------------------------------------------------------------
// NetworkPartition
// --------------------------------------------------------------------------

int NetworkPartition::total() const {
    return std::accumulate(sizes.begin(), sizes.end(), 0);
}

int NetworkPartition::sending_total() const {
    return std::accumulate(sizes.begin(), sizes.begin() + sending_count, 0);
}

int NetworkPartition::receiving_total() const { return total() - sending_total(); }

int NetworkPartition::component_of(int agent) const {
    int acc = 0;
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        acc += sizes[c];
        if (agent < acc) return static_cast<int>(c);
    }
    throw InvalidSpec("agent index out of range");
}

std::pair<int, int> NetworkPartition::component_range(int c) const {
    int begin = 0;
    for (int i = 0; i < c; ++i) begin += sizes[i];
    return {begin, begin + sizes[c]};
}

void NetworkPartition::validate() const {
    if (sending_count < 1) throw InvalidSpec("partition needs at least one sending component");
    if (receiving_count < 1) throw InvalidSpec("partition needs at least one receiving component");
    if (static_cast<int>(sizes.size()) != sending_count + receiving_count)
        throw InvalidSpec("partition sizes list does not match component counts");
    for (int s : sizes)
        if (s < 1) throw InvalidSpec("every component needs at least one agent");
}

// --------------------------------------------------------------------------
// CombinationMatrix
// --------------------------------------------------------------------------

void CombinationMatrix::validate(double tol) const {
    partition.validate();
    const int n = partition.total();
    if (a.rows() != n || a.cols() != n) throw InvalidSpec("matrix size does not match partition");
    if ((a.array() < 0.0).any()) throw StructureViolation("negative combination weight");

    for (int k = 0; k < n; ++k) {
        const double colsum = a.col(k).sum();
        if (std::abs(colsum - 1.0) > tol) {
            std::ostringstream msg;
            msg << "column " << k + 1 << " sums to " << colsum << ", not 1";
            throw StructureViolation(msg.str());
        }
    }

    const int ns = partition.sending_total();
    if (ns < n && a.bottomLeftCorner(n - ns, ns).cwiseAbs().maxCoeff() != 0.0)
        throw StructureViolation("nonzero receiving->sending entry");

    for (int s = 0; s < partition.sending_count; ++s) {
        const auto [b, e] = partition.component_range(s);
        if (!strongly_connected(a, b, e))
            throw StructureViolation("sending component " + std::to_string(s + 1) +
                                     " is not strongly connected");
        bool has_self = false;
        for (int i = b; i < e; ++i) has_self = has_self || a(i, i) > 0.0;
        if (!has_self)
            throw StructureViolation("sending component " + std::to_string(s + 1) +
                                     " has no self-loop");
    }

    // every receiving component sees a direct edge from every sending component
    for (int r = 0; r < partition.receiving_count; ++r) {
        const auto [rb, re] = partition.component_range(partition.sending_count + r);
        for (int s = 0; s < partition.sending_count; ++s) {
            const auto [sb, se] = partition.component_range(s);
            if (a.block(sb, rb, se - sb, re - rb).maxCoeff() <= 0.0)
                throw StructureViolation("receiving component " + std::to_string(r + 1) +
                                         " has no edge from sending component " +
                                         std::to_string(s + 1));
        }
    }

    if (spectral_radius(a.bottomRightCorner(n - ns, n - ns)) >= 1.0 - 1e-10)
        throw StructureViolation("receiving block has spectral radius 1");
}

// --------------------------------------------------------------------------
// generation
// --------------------------------------------------------------------------

void GraphSpec::validate() const {
    partition.validate();
    if (explicit_entries.has_value()) return; // probabilities unused
    if (!(er_prob > 0.0 && er_prob <= 1.0)) throw InvalidSpec("q must be in (0, 1]");
    if (receiving_er_prob > 1.0) throw InvalidSpec("receiving q must be in (0, 1]");
    if (static_cast<int>(send_recv_probs.size()) != partition.sending_count)
        throw InvalidSpec("need one pi per sending component");
    for (double p : send_recv_probs)
        if (!(p > 0.0 && p <= 1.0)) throw InvalidSpec("every pi must be in (0, 1]");
}

namespace {

CombinationMatrix from_explicit_entries(const GraphSpec& spec) {
    const int n = spec.partition.total();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [l, k, w] : *spec.explicit_entries) {
        if (l < 0 || l >= n || k < 0 || k >= n) throw InvalidSpec("entry index out of range");
        if (w < 0.0) throw InvalidSpec("negative entry weight");
        a(l, k) = w;
    }
    for (int k = 0; k < n; ++k) {
        const double colsum = a.col(k).sum();
        if (colsum <= 0.0)
            throw InvalidSpec("agent " + std::to_string(k + 1) + " has no incoming weight");
        a.col(k) /= colsum;
    }
    CombinationMatrix result{std::move(a), spec.partition};
    result.validate();
    return result;
}

Eigen::MatrixXd draw_candidate(const GraphSpec& spec, Rng& rng) {
    const NetworkPartition& part = spec.partition;
    const int n = part.total();
    const int ns = part.sending_total();
    const double qr = spec.receiving_er_prob > 0.0 ? spec.receiving_er_prob : spec.er_prob;

    // adjacency pattern; adj(l,k) means l -> k
    Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);

    // sending components: undirected ER(q) plus all self-loops
    for (int s = 0; s < part.sending_count; ++s) {
        const auto [b, e] = part.component_range(s);
        for (int i = b; i < e; ++i) {
            adj(i, i) = 1.0;
            for (int j = i + 1; j < e; ++j)
                if (rng.bernoulli(spec.er_prob)) adj(i, j) = adj(j, i) = 1.0;
        }
    }

    // receiving part: undirected ER(qr) among all receiving agents, self-loops
    for (int i = ns; i < n; ++i) {
        adj(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j)
            if (rng.bernoulli(qr)) adj(i, j) = adj(j, i) = 1.0;
    }

    // sending -> receiving edges, Bernoulli(pi_s) per (sender, receiver) pair
    for (int k = ns; k < n; ++k)
        for (int l = 0; l < ns; ++l)
            if (rng.bernoulli(spec.send_recv_probs[part.component_of(l)])) adj(l, k) = 1.0;

    // provisional weights: averaging rule within the sending blocks and within
    // the receiving part, 1/d_k on the sender->receiver edges
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < ns; ++k) {
        const auto [b, e] = part.component_range(part.component_of(k));
        const double nk = adj.col(k).segment(b, e - b).sum();
        for (int l = b; l < e; ++l)
            if (adj(l, k) > 0.0) a(l, k) = 1.0 / nk;
    }
    for (int k = ns; k < n; ++k) {
        const double dk = adj.col(k).head(ns).sum();
        for (int l = 0; l < ns; ++l)
            if (adj(l, k) > 0.0) a(l, k) = 1.0 / dk;
        const double mk = adj.col(k).tail(n - ns).sum();
        for (int l = ns; l < n; ++l)
            if (adj(l, k) > 0.0) a(l, k) = 1.0 / mk;
    }

    // final pass: renormalize every column of the assembled matrix
    for (int k = 0; k < n; ++k) a.col(k) /= a.col(k).sum();
    return a;
}

bool structure_ok(const CombinationMatrix& cm) {
    try {
        cm.validate();
    } catch (const StructureViolation&) {
        return false;
    }
    // receiving components must additionally be internally connected
    const NetworkPartition& part = cm.partition;
    for (int r = 0; r < part.receiving_count; ++r) {
        const auto [b, e] = part.component_range(part.sending_count + r);
        if (!connected_undirected(cm.a, b, e)) return false;
    }
    return true;
}

} // namespace

CombinationMatrix build_weak_graph(const GraphSpec& spec) {
    spec.validate();
    if (spec.explicit_entries.has_value()) return from_explicit_entries(spec);
    if (spec.max_retries < 1) throw InvalidSpec("max_retries must be positive");

    Rng rng(spec.seed);
    for (int attempt = 0; attempt < spec.max_retries; ++attempt) {
        CombinationMatrix candidate{draw_candidate(spec, rng), spec.partition};
        if (structure_ok(candidate)) return candidate;
    }
    throw RetryExhausted("no admissible graph after " + std::to_string(spec.max_retries) +
                         " attempts; increase sizes or probabilities");
}

// --------------------------------------------------------------------------
// limiting objects
// --------------------------------------------------------------------------

BlockDecomposition block_decompose(const CombinationMatrix& cm) {
    const int n = cm.partition.total();
    const int ns = cm.partition.sending_total();
    const int nr = n - ns;
    if (nr > 0 && cm.a.bottomLeftCorner(nr, ns).cwiseAbs().maxCoeff() != 0.0)
        throw StructureViolation("nonzero receiving->sending entry");
    return BlockDecomposition{
        cm.a.topLeftCorner(ns, ns),
        cm.a.topRightCorner(ns, nr),
        cm.a.bottomRightCorner(nr, nr),
    };
}

Eigen::VectorXd perron_eigenvector(const Eigen::MatrixXd& block, double tol, int max_iter) {
    if (block.rows() != block.cols() || block.rows() == 0)
        throw InvalidSpec("perron_eigenvector needs a nonempty square block");
    const int n = static_cast<int>(block.rows());
    // non-uniform start so periodic blocks oscillate instead of sitting on a
    // symmetric fixed point
    Eigen::VectorXd p(n);
    for (int i = 0; i < n; ++i) p(i) = i + 1;
    p /= p.sum();
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd ap = block * p;
        if ((ap - p).cwiseAbs().maxCoeff() <= tol) return p;
        p = ap / ap.sum();
    }
    throw NoConvergence("power iteration did not converge; block may not be primitive");
}

LimitingMatrices limiting_matrices(const CombinationMatrix& cm) {
    cm.validate();
    const NetworkPartition& part = cm.partition;
    const int ns = part.sending_total();
    const int nr = part.receiving_total();
    const BlockDecomposition blocks = block_decompose(cm);

    LimitingMatrices lim;
    lim.perron_block = Eigen::MatrixXd::Zero(ns, ns);
    for (int s = 0; s < part.sending_count; ++s) {
        const auto [b, e] = part.component_range(s);
        Eigen::VectorXd p = perron_eigenvector(cm.a.block(b, b, e - b, e - b));
        for (int j = b; j < e; ++j) lim.perron_block.col(j).segment(b, e - b) = p;
        lim.perron.push_back(std::move(p));
    }

    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(nr, nr) - blocks.receiving;
    {
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
        const auto& sv = svd.singularValues();
        if (sv(sv.size() - 1) <= 0.0 || sv(0) / sv(sv.size() - 1) > 1e12)
            throw SingularSystem("(I - A_R) is numerically singular: receiving part "
                                 "unreachable from the sending part");
    }
    // W = A_SR (I - A_R)^{-1} via a linear solve on the transposed system
    lim.w = m.transpose().partialPivLu().solve(blocks.send_recv.transpose()).transpose();
    lim.omega = lim.perron_block * lim.w;

    const Eigen::VectorXd colsums = lim.omega.colwise().sum();
    if (nr > 0 && (colsums.array() - 1.0).abs().maxCoeff() > 1e-10)
        throw Error("internal: Omega columns deviate from 1 beyond 1e-10");
    return lim;
}

Eigen::MatrixXd LimitingMatrices::a_infinity(const NetworkPartition& p) const {
    const int n = p.total();
    const int ns = p.sending_total();
    Eigen::MatrixXd result = Eigen::MatrixXd::Zero(n, n);
    result.topLeftCorner(ns, ns) = perron_block;
    result.topRightCorner(ns, n - ns) = omega;
    return result;
}

AggregateWeights aggregate_weights(const LimitingMatrices& lim, const NetworkPartition& part) {
    const int nr = part.receiving_total();
    Eigen::MatrixXd from_omega = Eigen::MatrixXd::Zero(part.sending_count, nr);
    Eigen::MatrixXd from_w = Eigen::MatrixXd::Zero(part.sending_count, nr);
    for (int s = 0; s < part.sending_count; ++s) {
        const auto [b, e] = part.component_range(s);
        from_omega.row(s) = lim.omega.middleRows(b, e - b).colwise().sum();
        from_w.row(s) = lim.w.middleRows(b, e - b).colwise().sum();
    }
    if ((from_omega - from_w).cwiseAbs().maxCoeff() > 1e-10)
        throw Error("internal: aggregate weights from Omega and W disagree beyond 1e-10");
    return AggregateWeights{std::move(from_omega)};
}

} // namespace weakgraph
