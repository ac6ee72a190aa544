#include "weakgraph/config.hpp"

#include <json.hpp>

#include "weakgraph/io.hpp"

namespace weakgraph {

using nlohmann::json;

namespace {

// substream ids carved out of the master seed
constexpr std::uint64_t kGraphStream = 101;
constexpr std::uint64_t kModelStream = 102;
constexpr std::uint64_t kRunStream = 103;

ModelKind parse_kind(const std::string& s) {
    if (s == "canonical") return ModelKind::Canonical;
    if (s == "structured-gaussian") return ModelKind::StructuredGaussian;
    if (s == "perturbed-gaussian") return ModelKind::PerturbedGaussian;
    if (s == "beta") return ModelKind::Beta;
    if (s == "custom") return ModelKind::Custom;
    throw ConfigError("unknown model type '" + s + "'");
}

Distribution parse_distribution(const json& j) {
    const std::string family = j.at("family").get<std::string>();
    if (family == "gaussian") return GaussianDesc{j.at("mean").get<double>()};
    if (family == "beta")
        return BetaDesc{j.at("alpha").get<double>(), j.at("beta").get<double>()};
    throw ConfigError("unknown distribution family '" + family + "'");
}

AgentModel parse_agent_model(const json& j) {
    AgentModel m;
    m.truth = parse_distribution(j.at("truth"));
    for (const json& lik : j.at("likelihoods")) m.likelihoods.push_back(parse_distribution(lik));
    return m;
}

} // namespace

void ExperimentConfig::validate() const {
    try {
        graph.partition.validate();
    } catch (const InvalidSpec& e) {
        throw ConfigError(std::string("graph partition: ") + e.what());
    }
    const int s = graph.partition.sending_count;
    switch (model.kind) {
    case ModelKind::Canonical:
        if (s != 2) throw ConfigError("the canonical model needs exactly 2 sending components");
        if (!(model.delta > 0.0)) throw ConfigError("delta must be positive");
        break;
    case ModelKind::StructuredGaussian:
        if (static_cast<int>(model.nu.size()) != s)
            throw ConfigError("structured-gaussian: need one nu per sending component");
        if (static_cast<int>(model.means.size()) < 2)
            throw ConfigError("structured-gaussian: need at least two likelihood means");
        break;
    case ModelKind::PerturbedGaussian:
        if (model.hypotheses < 2) throw ConfigError("need at least two hypotheses");
        if (!model.truth_means.empty() && static_cast<int>(model.truth_means.size()) != s)
            throw ConfigError("perturbed-gaussian: truth_means must have one entry per component");
        break;
    case ModelKind::Beta:
        if (model.hypotheses < 2) throw ConfigError("need at least two hypotheses");
        break;
    case ModelKind::Custom:
        if (static_cast<int>(model.custom_agents.size()) != graph.partition.total())
            throw ConfigError("custom model: need one model per agent");
        for (const AgentModel& m : model.custom_agents)
            if (m.hypothesis_count() != model.custom_agents.front().hypothesis_count())
                throw ConfigError("custom model: agents disagree on the number of hypotheses");
        break;
    }
    if (horizon < 1) throw ConfigError("horizon must be at least 1");
    for (long i : record.at_iterations)
        if (i < 1 || i > horizon) throw ConfigError("recorded iteration outside [1, horizon]");
    for (int a : record.agents)
        if (a < 0 || a >= graph.partition.total())
            throw ConfigError("recorded agent id out of range");
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        ExperimentConfig cfg;
        cfg.name = j.value("name", "experiment");

        const json& jg = j.at("graph");
        const json& part = jg.at("partition");
        for (const json& v : part.at("sending_sizes")) {
            cfg.graph.partition.sizes.push_back(v.get<int>());
            ++cfg.graph.partition.sending_count;
        }
        for (const json& v : part.at("receiving_sizes")) {
            cfg.graph.partition.sizes.push_back(v.get<int>());
            ++cfg.graph.partition.receiving_count;
        }
        cfg.graph.er_prob = jg.value("q", 0.7);
        cfg.graph.receiving_er_prob = jg.value("receiving_q", -1.0);
        if (jg.contains("pi"))
            for (const json& v : jg.at("pi")) cfg.graph.send_recv_probs.push_back(v.get<double>());
        cfg.graph.max_retries = jg.value("max_retries", 1000);
        if (jg.contains("explicit_entries")) {
            std::vector<std::tuple<int, int, double>> entries;
            for (const json& e : jg.at("explicit_entries")) {
                if (!e.is_array() || e.size() != 3)
                    throw ConfigError("explicit_entries items must be [from, to, weight]");
                // agent ids are 1-based in configs
                entries.emplace_back(e[0].get<int>() - 1, e[1].get<int>() - 1,
                                     e[2].get<double>());
            }
            cfg.graph.explicit_entries = std::move(entries);
        }

        const json& jm = j.at("model");
        cfg.model.kind = parse_kind(jm.at("type").get<std::string>());
        switch (cfg.model.kind) {
        case ModelKind::Canonical:
            cfg.model.delta = jm.value("delta", 1.0);
            cfg.model.hypotheses = 3;
            break;
        case ModelKind::StructuredGaussian:
            for (const json& v : jm.at("means")) cfg.model.means.push_back(v.get<double>());
            for (const json& v : jm.at("nu")) cfg.model.nu.push_back(v.get<double>());
            cfg.model.hypotheses = static_cast<int>(cfg.model.means.size());
            break;
        case ModelKind::PerturbedGaussian:
            cfg.model.hypotheses = jm.at("hypotheses").get<int>();
            cfg.model.variance = jm.value("variance", 0.02);
            cfg.model.correlation = jm.value("correlation", 0.5);
            if (jm.contains("truth_means"))
                for (const json& v : jm.at("truth_means"))
                    cfg.model.truth_means.push_back(v.get<double>());
            break;
        case ModelKind::Beta:
            cfg.model.hypotheses = jm.at("hypotheses").get<int>();
            cfg.model.half_width = jm.value("half_width", 0.1);
            break;
        case ModelKind::Custom:
            for (const json& a : jm.at("agents"))
                cfg.model.custom_agents.push_back(parse_agent_model(a));
            cfg.model.hypotheses = cfg.model.custom_agents.empty()
                                       ? 0
                                       : cfg.model.custom_agents.front().hypothesis_count();
            break;
        }

        cfg.horizon = j.at("horizon").get<long>();
        if (!j.contains("seed")) throw ConfigError("seed is mandatory");
        cfg.seed = j.at("seed").get<std::uint64_t>();

        if (j.contains("record")) {
            const json& jr = j.at("record");
            if (jr.contains("agents"))
                for (const json& v : jr.at("agents"))
                    cfg.record.agents.push_back(v.get<int>() - 1); // 1-based in configs
            if (jr.contains("at_iterations"))
                for (const json& v : jr.at("at_iterations"))
                    cfg.record.at_iterations.push_back(v.get<long>());
            cfg.record.stride = jr.value("stride", 0L);
        }
        cfg.output_dir = j.value("output_dir", "");
        cfg.validate();
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    return parse_config(io::read_file(path));
}

namespace {

std::vector<AgentModel> make_sending_models(const ExperimentConfig& cfg) {
    const int s = cfg.graph.partition.sending_count;
    const std::uint64_t model_seed = substream_seed(cfg.seed, kModelStream);
    switch (cfg.model.kind) {
    case ModelKind::Canonical:
        return canonical_gaussian_models(cfg.model.delta);
    case ModelKind::StructuredGaussian: {
        std::vector<AgentModel> out(s);
        std::vector<Distribution> liks;
        for (double m : cfg.model.means) liks.push_back(GaussianDesc{m});
        for (int j = 0; j < s; ++j) out[j] = AgentModel{GaussianDesc{cfg.model.nu[j]}, liks, {}};
        return out;
    }
    case ModelKind::PerturbedGaussian:
        return perturbed_gaussian_family(cfg.model.hypotheses, s, cfg.model.variance,
                                         cfg.model.correlation, model_seed,
                                         cfg.model.truth_means);
    case ModelKind::Beta:
        return beta_family(cfg.model.hypotheses, s, cfg.model.half_width, model_seed);
    case ModelKind::Custom: {
        // representative of each sending component (Assumption: homogeneous)
        std::vector<AgentModel> out;
        for (int j = 0; j < s; ++j)
            out.push_back(cfg.model.custom_agents[cfg.graph.partition.component_range(j).first]);
        return out;
    }
    }
    throw ConfigError("unreachable");
}

DivergenceMatrix make_divergence(const ExperimentConfig& cfg,
                                 const std::vector<AgentModel>& sending) {
    if (cfg.model.kind == ModelKind::StructuredGaussian)
        return structured_gaussian_D(cfg.model.means, cfg.model.nu);
    return divergence_matrix(sending, cfg.model.hypotheses);
}

} // namespace

std::vector<AgentModel> build_agent_models(const ExperimentConfig& cfg,
                                           const std::vector<AgentModel>& sending_models) {
    if (cfg.model.kind == ModelKind::Custom) return cfg.model.custom_agents;

    const NetworkPartition& part = cfg.graph.partition;
    const int n = part.total();
    const int h = cfg.model.hypotheses;
    const std::uint64_t model_seed = substream_seed(cfg.seed, kModelStream);

    std::vector<AgentModel> out(n);
    for (int k = 0; k < part.sending_total(); ++k)
        out[k] = sending_models[part.component_of(k)];

    for (int k = part.sending_total(); k < n; ++k) {
        AgentModel m;
        switch (cfg.model.kind) {
        case ModelKind::Canonical:
            // received opinions decide the outcome; data distribution sits in
            // the middle hypothesis by default
            m.truth = GaussianDesc{0.0};
            m.likelihoods = sending_models[0].likelihoods;
            break;
        case ModelKind::StructuredGaussian:
            m.truth = GaussianDesc{cfg.model.nu[0]};
            m.likelihoods = sending_models[0].likelihoods;
            break;
        case ModelKind::PerturbedGaussian: {
            Rng rng(substream_seed(model_seed, 1 + k));
            const std::vector<double> eps =
                equicorrelated_normals(h, cfg.model.variance, cfg.model.correlation, rng);
            m.truth = GaussianDesc{1.0};
            for (int t = 0; t < h; ++t)
                m.likelihoods.push_back(GaussianDesc{static_cast<double>(t + 1) + eps[t]});
            m.offsets = eps;
            break;
        }
        case ModelKind::Beta: {
            Rng rng(substream_seed(model_seed, 1 + k));
            m.truth = BetaDesc{2.0, 2.0};
            for (int t = 0; t < h; ++t) {
                const double u = rng.uniform(-cfg.model.half_width, cfg.model.half_width);
                m.offsets.push_back(u);
                m.likelihoods.push_back(BetaDesc{static_cast<double>(t) + 2.0 + u, 2.0});
            }
            break;
        }
        case ModelKind::Custom:
            break; // handled above
        }
        out[k] = std::move(m);
    }
    return out;
}

ModelSide materialize_models(const ExperimentConfig& cfg) {
    cfg.validate();
    ModelSide side;
    side.sending_models = make_sending_models(cfg);
    side.d = make_divergence(cfg, side.sending_models);
    return side;
}

std::uint64_t run_seed(const ExperimentConfig& cfg) {
    return substream_seed(cfg.seed, kRunStream);
}

Experiment materialize(const ExperimentConfig& cfg) {
    cfg.validate();
    Experiment exp;
    exp.config = cfg;
    GraphSpec gspec = cfg.graph;
    gspec.seed = substream_seed(cfg.seed, kGraphStream);
    exp.graph = build_weak_graph(gspec);
    exp.sending_models = make_sending_models(cfg);
    exp.agent_models = build_agent_models(cfg, exp.sending_models);
    exp.d = make_divergence(cfg, exp.sending_models);
    return exp;
}

} // namespace weakgraph
