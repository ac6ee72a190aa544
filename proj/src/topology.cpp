#include "weakgraph/topology.hpp"

#include <cmath>

namespace weakgraph {

namespace {

// SVD-based Moore-Penrose pseudoinverse with relative cutoff.
Eigen::MatrixXd pinv(const Eigen::JacobiSVD<Eigen::MatrixXd>& svd, double rel_tol) {
    const auto& sv = svd.singularValues();
    const double cutoff = sv.size() > 0 ? rel_tol * sv(0) : 0.0;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

} // namespace

TopologySystem build_system(const DivergenceMatrix& d, int theta_star, const Eigen::VectorXd& y,
                            double tol) {
    const int h = d.hypotheses();
    const int s = d.senders();
    if (theta_star < 0 || theta_star >= h) throw DimensionMismatch("theta_star out of range");
    if (y.size() != h) throw DimensionMismatch("y has wrong length");
    if (std::abs(y(theta_star)) > tol)
        throw InconsistentData("limiting data must vanish at theta_star");

    TopologySystem sys;
    sys.theta_star = theta_star;
    sys.b.resize(h, s);
    for (int t = 0; t < h; ++t) sys.b.row(t) = d.d.row(theta_star) - d.d.row(t);
    sys.c.resize(h + 1, s);
    sys.c.topRows(h) = sys.b;
    sys.c.row(h).setOnes();
    sys.y_tilde.resize(h + 1);
    sys.y_tilde.head(h) = y;
    sys.y_tilde(h) = 1.0;
    return sys;
}

int numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
    if (m.size() == 0) return 0;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    if (sv(0) <= 0.0) return 0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > rel_tol * sv(0)) ++rank;
    return rank;
}

TopologySolveResult solve_topology(const TopologySystem& sys, double rel_tol) {
    const int s = static_cast<int>(sys.c.cols());
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.c,
                                                Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(0) > 0.0 && sv(i) > rel_tol * sv(0)) ++rank;

    const Eigen::MatrixXd cplus = pinv(svd, rel_tol);
    TopologySolveResult res;
    res.x_hat = cplus * sys.y_tilde; // minimum-norm least-squares point
    res.numerical_rank = rank;
    res.feasible = rank == s;
    res.solution_set_dim = s - rank;
    res.residual = (sys.c * res.x_hat - sys.y_tilde).norm();
    res.positivity_ok = (res.x_hat.array() > 0.0).all();
    res.null_projector = Eigen::MatrixXd::Identity(s, s) - cplus * sys.c;
    if (res.feasible) res.null_projector.setZero();
    return res;
}

std::vector<AgentEstimate> estimate_from_trajectory(const TrajectoryRecord& traj,
                                                    const DivergenceMatrix& d, long iteration) {
    const int idx = traj.index_of_iteration(iteration);
    if (idx < 0)
        throw MissingRecord("trajectory has no snapshot at iteration " +
                            std::to_string(iteration));
    const int h = traj.hypothesis_count;
    if (h != d.hypotheses()) throw DimensionMismatch("trajectory and D disagree on H");

    std::vector<AgentEstimate> out;
    out.reserve(traj.agents.size());
    for (std::size_t j = 0; j < traj.agents.size(); ++j) {
        AgentEstimate est;
        est.agent = traj.agents[j];
        est.y_hat = traj.log_psi[idx].row(static_cast<Eigen::Index>(j)).transpose() /
                    static_cast<double>(iteration);
        int arg = 0;
        for (int t = 1; t < h; ++t)
            if (est.y_hat(t) > est.y_hat(arg)) arg = t;
        est.theta_star_hat = arg;
        // the empirical value at theta_star converges to 0; pin its limit so
        // the system stays consistent with the zero row of B
        est.y_hat(arg) = 0.0;
        est.solve = solve_topology(build_system(d, arg, est.y_hat));
        out.push_back(std::move(est));
    }
    return out;
}

FeasibilityReport feasibility_report(const DivergenceMatrix& d, double rel_tol) {
    FeasibilityReport rep;
    rep.hypotheses = d.hypotheses();
    rep.senders = d.senders();
    rep.h_at_least_s = rep.hypotheses >= rep.senders;
    rep.rank_per_theta.reserve(rep.hypotheses);
    bool all_full = true;
    for (int t = 0; t < rep.hypotheses; ++t) {
        Eigen::MatrixXd c(rep.hypotheses + 1, rep.senders);
        for (int r = 0; r < rep.hypotheses; ++r) c.row(r) = d.d.row(t) - d.d.row(r);
        c.row(rep.hypotheses).setOnes();
        const int rank = numerical_rank(c, rel_tol);
        rep.rank_per_theta.push_back(rank);
        all_full = all_full && rank == rep.senders;
    }
    rep.feasible = rep.h_at_least_s && all_full;
    return rep;
}

Eigen::MatrixXd edm(const std::vector<double>& points) {
    const int n = static_cast<int>(points.size());
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double diff = points[i] - points[j];
            m(i, j) = diff * diff;
        }
    return m;
}

Eigen::MatrixXd lemma2_projection(int theta, int h) {
    if (theta < 0 || theta >= h) throw DimensionMismatch("theta out of range");
    Eigen::MatrixXd j = -Eigen::MatrixXd::Identity(h, h);
    j.col(theta).array() += 1.0;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(j, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return Eigen::MatrixXd::Identity(h, h) - pinv(svd, 1e-13) * j;
}

Eigen::Vector3d v3_certificate(double e12, double e13, double e23) {
    if (e12 == 0.0 || e13 == 0.0 || e23 == 0.0)
        throw DegeneratePoints("EDM entries of distinct points must be nonzero");
    Eigen::Vector3d v;
    v << (e13 + e12 - e23) / (e13 * e12), //
        (e12 + e23 - e13) / (e12 * e23),  //
        (e13 + e23 - e12) / (e13 * e23);
    v *= 0.5; // the closed form normalizes v^T E3 to 2*ones^T; halve it

    Eigen::Matrix3d e3;
    e3 << 0.0, e12, e13, e12, 0.0, e23, e13, e23, 0.0;
    const Eigen::RowVector3d lhs = v.transpose() * e3;
    if ((lhs - Eigen::RowVector3d::Ones()).cwiseAbs().maxCoeff() > 1e-10 ||
        std::abs(v.sum()) > 1e-10)
        throw DegeneratePoints("v3 identities violated; entries are not a valid 3-point EDM");
    return v;
}

} // namespace weakgraph
