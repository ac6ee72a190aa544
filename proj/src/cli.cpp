#include "weakgraph/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "weakgraph/analysis.hpp"
#include "weakgraph/config.hpp"
#include "weakgraph/io.hpp"
#include "weakgraph/kernels.hpp"
#include "weakgraph/topology.hpp"

namespace weakgraph::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::string seed_override; // empty = use config seed
    std::string at_list;       // infer only
    std::string kernels;       // scalar|avx2|auto
};

fs::path resolve_out_dir(const CommonArgs& args, const ExperimentConfig& cfg) {
    if (!args.out_dir.empty()) return args.out_dir;
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    if (const char* env = std::getenv("WEAKGRAPH_OUT")) return env;
    return "out";
}

ExperimentConfig load(const CommonArgs& args) {
    if (args.config_path.empty()) throw ConfigError("--config is required");
    ExperimentConfig cfg = load_config(args.config_path);
    if (!args.seed_override.empty()) cfg.seed = std::stoull(args.seed_override);
    if (!args.kernels.empty()) kernels::force_backend(args.kernels);
    return cfg;
}

std::map<std::string, std::string> partition_metadata(const NetworkPartition& p) {
    std::ostringstream sizes;
    for (std::size_t i = 0; i < p.sizes.size(); ++i) sizes << (i ? "," : "") << p.sizes[i];
    return {{"S", std::to_string(p.sending_count)},
            {"R", std::to_string(p.receiving_count)},
            {"sizes", sizes.str()}};
}

NetworkPartition partition_from_metadata(const std::map<std::string, std::string>& meta) {
    NetworkPartition p;
    if (!meta.count("S") || !meta.count("R") || !meta.count("sizes"))
        throw IoError("matrix file lacks partition metadata");
    p.sending_count = std::stoi(meta.at("S"));
    p.receiving_count = std::stoi(meta.at("R"));
    std::istringstream in(meta.at("sizes"));
    std::string tok;
    while (std::getline(in, tok, ',')) p.sizes.push_back(std::stoi(tok));
    p.validate();
    return p;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

const char* provenance_name(KlMethod m) {
    switch (m) {
    case KlMethod::Analytic: return "analytic";
    case KlMethod::Quadrature: return "quadrature";
    case KlMethod::MonteCarlo: return "monte-carlo";
    }
    return "?";
}

// ---------------------------------------------------------------------- //

int cmd_generate(const CommonArgs& args) {
    const ExperimentConfig cfg = load(args);
    const fs::path dir = resolve_out_dir(args, cfg);
    const Experiment exp = materialize(cfg);
    const LimitingMatrices lim = limiting_matrices(exp.graph);
    const AggregateWeights agg = aggregate_weights(lim, exp.graph.partition);

    auto meta = partition_metadata(exp.graph.partition);
    meta["seed"] = std::to_string(cfg.seed);
    io::write_matrix_csv(dir / "A.csv", exp.graph.a, meta);
    io::write_matrix_csv(dir / "omega.csv", lim.omega, meta);
    io::write_matrix_csv(dir / "w.csv", lim.w, meta);
    io::write_matrix_csv(dir / "x_true.csv", agg.x, meta);

    // divergence matrix plus a parallel provenance grid
    io::write_matrix_csv(dir / "D.csv", exp.d.d, meta);
    {
        std::ostringstream prov;
        prov << "theta,s,provenance\n";
        for (int t = 0; t < exp.d.hypotheses(); ++t)
            for (int s = 0; s < exp.d.senders(); ++s)
                prov << t + 1 << "," << s + 1 << "," << provenance_name(exp.d.provenance_at(t, s))
                     << "\n";
        io::atomic_write(dir / "D_provenance.csv", prov.str());
    }

    json report;
    report["name"] = cfg.name;
    report["seed"] = cfg.seed;
    report["agents"] = json::array();
    const int ns = exp.graph.partition.sending_total();
    for (int j = 0; j < exp.graph.partition.receiving_total(); ++j) {
        const NetworkDivergence nd = analyze_receiving_agent(exp.d, agg.x.col(j));
        json entry;
        entry["agent"] = ns + j + 1;
        entry["theta_star"] = nd.theta_star + 1;
        entry["divergence"] = vector_to_json(nd.divergence);
        entry["rates"] = vector_to_json(nd.rates);
        entry["x_true"] = vector_to_json(agg.x.col(j));
        if (cfg.model.kind == ModelKind::Canonical)
            entry["region"] = to_string(canonical_region(agg.x.col(j)));
        report["agents"].push_back(entry);
    }
    io::atomic_write(dir / "analysis.json", report.dump(2) + "\n");
    std::cout << "generate: wrote graph, limiting matrices and analysis to " << dir.string()
              << "\n";
    return kExitOk;
}

int cmd_simulate(const CommonArgs& args) {
    const ExperimentConfig cfg = load(args);
    const fs::path dir = resolve_out_dir(args, cfg);
    const fs::path graph_file = dir / "A.csv";
    if (!fs::exists(graph_file))
        throw ConfigError("missing graph artifact " + graph_file.string() +
                          " (run `weakgraph generate` first)");
    const io::MatrixCsv stored = io::read_matrix_csv(graph_file);
    CombinationMatrix graph{stored.matrix, partition_from_metadata(stored.metadata)};
    graph.validate(1e-9); // CSV round-trip is exact, tolerance for safety

    const ModelSide side = materialize_models(cfg);
    const std::vector<AgentModel> agent_models = build_agent_models(cfg, side.sending_models);
    const TrajectoryRecord traj =
        run(graph, agent_models, cfg.horizon, run_seed(cfg), cfg.record);
    io::write_trajectory_csv(dir / "trajectory.csv", traj);
    std::cout << "simulate: " << cfg.horizon << " iterations, "
              << traj.iterations.size() << " snapshots -> "
              << (dir / "trajectory.csv").string() << "\n";
    return kExitOk;
}

int cmd_infer(const CommonArgs& args) {
    const ExperimentConfig cfg = load(args);
    const fs::path dir = resolve_out_dir(args, cfg);
    for (const char* name : {"trajectory.csv", "D.csv"})
        if (!fs::exists(dir / name))
            throw ConfigError("missing artifact " + (dir / name).string() +
                              " (run generate and simulate first)");

    const TrajectoryRecord traj = io::read_trajectory_csv(dir / "trajectory.csv");
    DivergenceMatrix d;
    d.d = io::read_matrix_csv(dir / "D.csv").matrix;
    d.provenance.assign(static_cast<std::size_t>(d.d.size()), KlMethod::Analytic);

    Eigen::MatrixXd x_true;
    if (fs::exists(dir / "x_true.csv")) x_true = io::read_matrix_csv(dir / "x_true.csv").matrix;

    std::vector<long> at_iterations;
    if (!args.at_list.empty()) {
        std::istringstream in(args.at_list);
        std::string tok;
        while (std::getline(in, tok, ',')) at_iterations.push_back(std::stol(tok));
    } else {
        at_iterations = traj.iterations;
    }

    const int ns = [&] {
        // receiving agents are identified by the recorded ids and x_true width
        int min_agent = traj.agent_count;
        for (int a : traj.agents) min_agent = std::min(min_agent, a);
        return x_true.size() > 0 ? traj.agent_count - static_cast<int>(x_true.cols())
                                 : min_agent;
    }();

    json report;
    report["name"] = cfg.name;
    report["iterations"] = at_iterations;
    report["estimates"] = json::array();
    std::ostringstream series;
    series << "iteration,agent,s,x_hat,x_true\n";

    bool any_infeasible = false;
    for (long it : at_iterations) {
        const std::vector<AgentEstimate> ests = estimate_from_trajectory(traj, d, it);
        for (const AgentEstimate& est : ests) {
            json entry;
            entry["iteration"] = it;
            entry["agent"] = est.agent + 1;
            entry["theta_star_hat"] = est.theta_star_hat + 1;
            entry["x_hat"] = vector_to_json(est.solve.x_hat);
            entry["rank"] = est.solve.numerical_rank;
            entry["feasible"] = est.solve.feasible;
            entry["residual"] = est.solve.residual;
            entry["positivity_ok"] = est.solve.positivity_ok;
            entry["solution_set_dim"] = est.solve.solution_set_dim;
            any_infeasible = any_infeasible || !est.solve.feasible;
            const int col = est.agent - ns;
            if (x_true.size() > 0 && col >= 0 && col < x_true.cols()) {
                entry["x_true"] = vector_to_json(x_true.col(col));
                entry["error_inf"] =
                    (est.solve.x_hat - x_true.col(col)).cwiseAbs().maxCoeff();
            }
            report["estimates"].push_back(entry);
            for (Eigen::Index s = 0; s < est.solve.x_hat.size(); ++s) {
                series << it << "," << est.agent + 1 << "," << s + 1 << ","
                       << io::format_double(est.solve.x_hat(s)) << ",";
                if (x_true.size() > 0 && col >= 0 && col < x_true.cols())
                    series << io::format_double(x_true(s, col));
                series << "\n";
            }
        }
    }
    report["any_infeasible"] = any_infeasible;
    io::atomic_write(dir / "topology_report.json", report.dump(2) + "\n");
    io::atomic_write(dir / "xhat_series.csv", series.str());
    std::cout << "infer: wrote topology report for " << at_iterations.size()
              << " iterations to " << dir.string() << "\n";
    return any_infeasible ? kExitInfeasible : kExitOk;
}

int cmd_feasibility(const CommonArgs& args) {
    const ExperimentConfig cfg = load(args);
    const fs::path dir = resolve_out_dir(args, cfg);
    const ModelSide side = materialize_models(cfg);
    const FeasibilityReport rep = feasibility_report(side.d);

    json out;
    out["name"] = cfg.name;
    out["hypotheses"] = rep.hypotheses;
    out["senders"] = rep.senders;
    out["h_at_least_s"] = rep.h_at_least_s;
    out["rank_per_theta"] = rep.rank_per_theta;
    out["feasible"] = rep.feasible;
    io::atomic_write(dir / "feasibility.json", out.dump(2) + "\n");

    std::cout << "feasibility: H=" << rep.hypotheses << " S=" << rep.senders << " verdict="
              << (rep.feasible ? "feasible" : "infeasible") << " (ranks:";
    for (int r : rep.rank_per_theta) std::cout << " " << r;
    std::cout << ")\n";
    return rep.feasible ? kExitOk : kExitInfeasible;
}

int cmd_reproduce(const CommonArgs& args) {
    const int g = cmd_generate(args);
    if (g != kExitOk) return g;
    const int s = cmd_simulate(args);
    if (s != kExitOk) return s;
    return cmd_infer(args);
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"social learning over weakly-connected graphs: simulation, "
                 "prediction and macroscopic topology inference"};
    app.require_subcommand(1);

    CommonArgs common;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", common.out_dir, "output directory");
        sub->add_option("--seed", common.seed_override, "override the config seed");
        sub->add_option("--kernels", common.kernels, "kernel backend: scalar|avx2|auto");
    };

    CLI::App* generate = app.add_subcommand(
        "generate", "draw the graph, write matrices and the limiting analysis");
    add_common(generate);
    CLI::App* simulate =
        app.add_subcommand("simulate", "run the belief recursion over a generated graph");
    add_common(simulate);
    CLI::App* infer =
        app.add_subcommand("infer", "estimate aggregate weights from a recorded trajectory");
    add_common(infer);
    infer->add_option("--at", common.at_list, "comma-separated iterations (default: all recorded)");
    CLI::App* feas = app.add_subcommand("feasibility", "rank report for the divergence matrix");
    add_common(feas);
    CLI::App* repr = app.add_subcommand("reproduce", "generate + simulate + infer");
    add_common(repr);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (generate->parsed()) return cmd_generate(common);
        if (simulate->parsed()) return cmd_simulate(common);
        if (infer->parsed()) return cmd_infer(common);
        if (feas->parsed()) return cmd_feasibility(common);
        if (repr->parsed()) return cmd_reproduce(common);
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InvalidSpec& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

} // namespace weakgraph::cli
