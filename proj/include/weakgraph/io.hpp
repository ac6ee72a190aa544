#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "weakgraph/learning.hpp"

namespace weakgraph::io {

// Writes content to path via a temp file and rename, so readers never see a
// partial file.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

// Matrix CSV: '#' metadata lines (key=value pairs), then one comma-separated
// line per matrix row at full double precision.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                      const std::map<std::string, std::string>& metadata);

struct MatrixCsv {
    Eigen::MatrixXd matrix;
    std::map<std::string, std::string> metadata;
};

MatrixCsv read_matrix_csv(const std::filesystem::path& path);

// Trajectory CSV columns: iteration, agent, theta, log_psi, log_mu with
// 1-based agent and theta ids; '#' metadata lines carry the run parameters.
void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord& traj);

TrajectoryRecord read_trajectory_csv(const std::filesystem::path& path);

std::string format_double(double v); // shortest representation that round-trips

} // namespace weakgraph::io
