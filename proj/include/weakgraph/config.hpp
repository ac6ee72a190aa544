#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "weakgraph/graph.hpp"
#include "weakgraph/learning.hpp"
#include "weakgraph/models.hpp"

namespace weakgraph {

enum class ModelKind { Canonical, StructuredGaussian, PerturbedGaussian, Beta, Custom };

struct ModelSpec {
    ModelKind kind = ModelKind::Canonical;
    int hypotheses = 3; // H; fixed to 3 for canonical, means.size() for structured
    // canonical
    double delta = 1.0;
    // structured-gaussian
    std::vector<double> means; // likelihood means, size H
    std::vector<double> nu;    // truth means, size S
    // perturbed-gaussian
    double variance = 0.02;
    double correlation = 0.5;
    std::vector<double> truth_means; // optional, size S, defaults to all 1
    // beta
    double half_width = 0.1;
    // custom: one explicit model per agent
    std::vector<AgentModel> custom_agents;
};

struct ExperimentConfig {
    std::string name;
    GraphSpec graph;
    ModelSpec model;
    long horizon = 1;
    std::uint64_t seed = 0;
    RecordSpec record;
    std::string output_dir;

    void validate() const; // throws ConfigError
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Everything a run needs, materialized deterministically from the config:
// the drawn graph, one model per agent, one model per sending component, and
// the divergence matrix.
struct Experiment {
    ExperimentConfig config;
    CombinationMatrix graph;
    std::vector<AgentModel> sending_models; // per sending component
    std::vector<AgentModel> agent_models;   // per agent
    DivergenceMatrix d;
};

Experiment materialize(const ExperimentConfig& cfg);

// Model-side materialization only (graph not drawn); used by feasibility.
struct ModelSide {
    std::vector<AgentModel> sending_models;
    DivergenceMatrix d;
};

ModelSide materialize_models(const ExperimentConfig& cfg);

// Per-agent models for the whole network; receiving agents get the
// experiment's default receiving model (independent perturbation draws).
std::vector<AgentModel> build_agent_models(const ExperimentConfig& cfg,
                                           const std::vector<AgentModel>& sending_models);

// Seed handed to the simulation engine, derived from the master seed.
std::uint64_t run_seed(const ExperimentConfig& cfg);

} // namespace weakgraph
