#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "weakgraph/graph.hpp"
#include "weakgraph/rng.hpp"

using namespace weakgraph;

namespace {

GraphSpec setup1_spec(std::uint64_t seed) {
    GraphSpec spec;
    spec.partition = NetworkPartition{2, 1, {9, 3, 4}};
    spec.er_prob = 0.7;
    spec.send_recv_probs = {0.5, 0.5};
    spec.seed = seed;
    return spec;
}

CombinationMatrix two_agent_graph() {
    GraphSpec spec;
    spec.partition = NetworkPartition{1, 1, {1, 1}};
    spec.explicit_entries = {{{0, 0, 1.0}, {0, 1, 0.6}, {1, 1, 0.4}}};
    return build_weak_graph(spec);
}

CombinationMatrix three_agent_graph() {
    GraphSpec spec;
    spec.partition = NetworkPartition{2, 1, {1, 1, 1}};
    spec.explicit_entries = {
        {{0, 0, 1.0}, {1, 1, 1.0}, {0, 2, 0.3}, {1, 2, 0.3}, {2, 2, 0.4}}};
    return build_weak_graph(spec);
}

// dense-eigensolve oracle: eigenvector of the eigenvalue closest to 1
Eigen::VectorXd perron_by_dense_solve(const Eigen::MatrixXd& block) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(block);
    int best = 0;
    for (int i = 1; i < block.rows(); ++i)
        if (std::abs(es.eigenvalues()(i) - 1.0) < std::abs(es.eigenvalues()(best) - 1.0))
            best = i;
    Eigen::VectorXd v = es.eigenvectors().col(best).real();
    v /= v.sum();
    return v;
}

} // namespace

TEST_CASE("partition validation") {
    CHECK_THROWS_AS((NetworkPartition{0, 1, {1}}.validate()), InvalidSpec);
    CHECK_THROWS_AS((NetworkPartition{1, 0, {1}}.validate()), InvalidSpec);
    CHECK_THROWS_AS((NetworkPartition{1, 1, {1, 0}}.validate()), InvalidSpec);
    CHECK_THROWS_AS((NetworkPartition{1, 1, {1}}.validate()), InvalidSpec);
    const NetworkPartition p{2, 1, {9, 3, 4}};
    p.validate();
    CHECK(p.total() == 16);
    CHECK(p.sending_total() == 12);
    CHECK(p.receiving_total() == 4);
    CHECK(p.component_of(0) == 0);
    CHECK(p.component_of(9) == 1);
    CHECK(p.component_of(12) == 2);
    CHECK(p.component_range(1) == std::pair<int, int>{9, 12});
}

TEST_CASE("smallest admissible weak graph from explicit entries") {
    const CombinationMatrix g = two_agent_graph();
    g.validate();
    CHECK(g.a(0, 0) == doctest::Approx(1.0));
    CHECK(g.a(0, 1) == doctest::Approx(0.6));
    CHECK(g.a(1, 1) == doctest::Approx(0.4));
    CHECK(g.a(1, 0) == 0.0);

    const BlockDecomposition b = block_decompose(g);
    CHECK(b.sending(0, 0) == doctest::Approx(1.0));
    CHECK(b.send_recv(0, 0) == doctest::Approx(0.6));
    CHECK(b.receiving(0, 0) == doctest::Approx(0.4));

    // reassembling the blocks with the zero corner reproduces A exactly
    Eigen::MatrixXd re(2, 2);
    re.topLeftCorner(1, 1) = b.sending;
    re.topRightCorner(1, 1) = b.send_recv;
    re.bottomRightCorner(1, 1) = b.receiving;
    re.bottomLeftCorner(1, 1).setZero();
    CHECK(re == g.a);

    // W = 0.6/(1-0.4) = 1, forced by column stochasticity
    const LimitingMatrices lim = limiting_matrices(g);
    CHECK(lim.w(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lim.omega(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hand-evaluated 3-agent limiting matrices") {
    const CombinationMatrix g = three_agent_graph();
    const LimitingMatrices lim = limiting_matrices(g);
    CHECK(lim.w(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(lim.w(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
    const AggregateWeights agg = aggregate_weights(lim, g.partition);
    CHECK(agg.x(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(agg.x(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("forbidden block violations are rejected") {
    GraphSpec spec;
    spec.partition = NetworkPartition{1, 1, {1, 1}};
    spec.explicit_entries = {{{0, 0, 1.0}, {1, 0, 1e-9}, {0, 1, 0.6}, {1, 1, 0.4}}};
    CHECK_THROWS_AS(build_weak_graph(spec), StructureViolation);

    CombinationMatrix g = two_agent_graph();
    g.a(1, 0) = 1e-9;
    g.a(0, 0) -= 1e-9;
    CHECK_THROWS_AS(block_decompose(g), StructureViolation);
}

TEST_CASE("generated setup-1 graph: invariants and determinism") {
    const GraphSpec spec = setup1_spec(42);
    const CombinationMatrix g = build_weak_graph(spec);
    g.validate();
    CHECK(g.a.rows() == 16);

    for (int k = 0; k < 16; ++k) CHECK(std::abs(g.a.col(k).sum() - 1.0) <= 1e-12);
    CHECK(g.a.bottomLeftCorner(4, 12).cwiseAbs().maxCoeff() == 0.0);

    // sending blocks use averaging-rule weights: nonzero column entries equal
    for (int k = 0; k < 12; ++k) {
        double first = -1.0;
        for (int l = 0; l < 12; ++l)
            if (g.a(l, k) > 0.0) {
                if (first < 0.0) first = g.a(l, k);
                CHECK(g.a(l, k) == doctest::Approx(first).epsilon(1e-12));
            }
        CHECK(g.a(k, k) > 0.0); // self-loop from the averaging rule
    }

    const CombinationMatrix again = build_weak_graph(spec);
    CHECK(g.a == again.a); // bit-identical under the same seed

    GraphSpec other = setup1_spec(43);
    CHECK(build_weak_graph(other).a != g.a);
}

TEST_CASE("generation errors") {
    GraphSpec spec = setup1_spec(1);
    spec.er_prob = 0.0;
    CHECK_THROWS_AS(build_weak_graph(spec), InvalidSpec);
    spec = setup1_spec(1);
    spec.send_recv_probs = {0.5, 1.5};
    CHECK_THROWS_AS(build_weak_graph(spec), InvalidSpec);
    spec = setup1_spec(1);
    spec.send_recv_probs = {1e-9, 1e-9};
    spec.max_retries = 5;
    CHECK_THROWS_AS(build_weak_graph(spec), RetryExhausted);
}

TEST_CASE("perron eigenvector") {
    Eigen::MatrixXd one(1, 1);
    one << 1.0;
    CHECK(perron_eigenvector(one)(0) == doctest::Approx(1.0));

    Eigen::MatrixXd sym(2, 2);
    sym << 0.5, 0.5, 0.5, 0.5;
    const Eigen::VectorXd p2 = perron_eigenvector(sym);
    CHECK(p2(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p2(1) == doctest::Approx(0.5).epsilon(1e-12));

    // random averaging-rule blocks against the dense eigensolve oracle
    for (std::uint64_t seed : {3u, 4u, 5u}) {
        GraphSpec spec;
        spec.partition = NetworkPartition{1, 1, {5, 1}};
        spec.er_prob = 0.7;
        spec.send_recv_probs = {1.0};
        spec.seed = seed;
        const CombinationMatrix g = build_weak_graph(spec);
        const Eigen::MatrixXd block = g.a.topLeftCorner(5, 5);
        const Eigen::VectorXd p = perron_eigenvector(block);
        const Eigen::VectorXd oracle = perron_by_dense_solve(block);
        CHECK((p - oracle).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(p.minCoeff() > 0.0);
        CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((block * p - p).cwiseAbs().maxCoeff() <= 1e-13);
    }

    Eigen::MatrixXd periodic(2, 2);
    periodic << 0.0, 1.0, 1.0, 0.0;
    CHECK_THROWS_AS(perron_eigenvector(periodic, 1e-13, 1000), NoConvergence);
}

TEST_CASE("limiting matrices against the matrix-power oracle") {
    for (std::uint64_t seed : {10u, 11u}) {
        const CombinationMatrix g = build_weak_graph(setup1_spec(seed));
        const LimitingMatrices lim = limiting_matrices(g);

        const Eigen::VectorXd colsums = lim.omega.colwise().sum();
        CHECK((colsums.array() - 1.0).abs().maxCoeff() <= 1e-10);

        Eigen::MatrixXd power = Eigen::MatrixXd::Identity(16, 16);
        for (int i = 0; i < 200; ++i) power = g.a * power;
        CHECK((power.topRightCorner(12, 4) - lim.omega).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((power - lim.a_infinity(g.partition)).cwiseAbs().maxCoeff() < 1e-6);

        // spectral radius of the receiving block stays below 1
        const Eigen::MatrixXd ar = g.a.bottomRightCorner(4, 4);
        CHECK(Eigen::EigenSolver<Eigen::MatrixXd>(ar, false).eigenvalues().cwiseAbs().maxCoeff() <
              1.0);
    }

    // larger graph, N = 50
    GraphSpec big;
    big.partition = NetworkPartition{3, 2, {14, 12, 10, 8, 6}};
    big.er_prob = 0.7;
    big.send_recv_probs = {0.5, 0.5, 0.5};
    big.seed = 99;
    const CombinationMatrix g = build_weak_graph(big);
    const LimitingMatrices lim = limiting_matrices(g);
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(50, 50);
    for (int i = 0; i < 200; ++i) power = g.a * power;
    CHECK((power - lim.a_infinity(g.partition)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("aggregate weights: single component and explicit omega route") {
    GraphSpec spec;
    spec.partition = NetworkPartition{1, 1, {5, 3}};
    spec.er_prob = 0.7;
    spec.send_recv_probs = {0.6};
    spec.seed = 17;
    const CombinationMatrix g = build_weak_graph(spec);
    const LimitingMatrices lim = limiting_matrices(g);
    const AggregateWeights agg = aggregate_weights(lim, g.partition);
    for (int j = 0; j < 3; ++j) CHECK(agg.x(0, j) == doctest::Approx(1.0).epsilon(1e-10));

    const CombinationMatrix g1 = build_weak_graph(setup1_spec(21));
    const LimitingMatrices lim1 = limiting_matrices(g1);
    const AggregateWeights agg1 = aggregate_weights(lim1, g1.partition);
    for (int j = 0; j < 4; ++j) {
        double sum_omega = 0.0;
        for (int l = 0; l < 9; ++l) sum_omega += lim1.omega(l, j);
        CHECK(agg1.x(0, j) == doctest::Approx(sum_omega).epsilon(1e-12));
        CHECK(agg1.x.col(j).sum() == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(agg1.x.col(j).minCoeff() > 0.0);
    }
}

TEST_CASE("isolated receiving part is rejected") {
    // a receiving agent that listens only to itself makes (I - A_R) singular;
    // validation rejects the structure before any solve
    CombinationMatrix g;
    g.partition = NetworkPartition{1, 1, {1, 1}};
    g.a.resize(2, 2);
    g.a << 1.0, 0.0, 0.0, 1.0;
    CHECK_THROWS_AS(limiting_matrices(g), StructureViolation);
}
