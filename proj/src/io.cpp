#include "weakgraph/io.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "weakgraph/error.hpp"

namespace weakgraph::io {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string::size_type start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw IoError("bad numeric field '" + s + "'");
    return v;
}

long parse_long(const std::string& s) {
    long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw IoError("bad integer field '" + s + "'");
    return v;
}

void parse_metadata_line(const std::string& line, std::map<std::string, std::string>& meta) {
    std::istringstream in(line.substr(1));
    std::string token;
    while (in >> token) {
        const auto eq = token.find('=');
        if (eq != std::string::npos) meta[token.substr(0, eq)] = token.substr(eq + 1);
    }
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out.good()) throw IoError("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                      const std::map<std::string, std::string>& metadata) {
    std::ostringstream out;
    out << "#";
    for (const auto& [k, v] : metadata) out << " " << k << "=" << v;
    out << " rows=" << m.rows() << " cols=" << m.cols() << "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0) out << ",";
            out << format_double(m(i, j));
        }
        out << "\n";
    }
    atomic_write(path, out.str());
}

MatrixCsv read_matrix_csv(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    MatrixCsv out;
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            parse_metadata_line(line, out.metadata);
            continue;
        }
        std::vector<double> row;
        for (const std::string& field : split(line, ',')) row.push_back(parse_double(field));
        if (!rows.empty() && row.size() != rows.front().size())
            throw IoError("ragged matrix rows in " + path.string());
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError("no matrix rows in " + path.string());
    out.matrix.resize(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            out.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return out;
}

void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord& traj) {
    std::ostringstream out;
    out << "# agent_count=" << traj.agent_count << " hypothesis_count=" << traj.hypothesis_count
        << " seed=" << traj.seed << " horizon=" << traj.horizon
        << " clamp_events=" << traj.clamp_events << "\n";
    out << "iteration,agent,theta,log_psi,log_mu\n";
    for (std::size_t i = 0; i < traj.iterations.size(); ++i)
        for (std::size_t j = 0; j < traj.agents.size(); ++j)
            for (int t = 0; t < traj.hypothesis_count; ++t) {
                out << traj.iterations[i] << "," << traj.agents[j] + 1 << "," << t + 1 << ","
                    << format_double(traj.log_psi[i](static_cast<Eigen::Index>(j), t)) << ","
                    << format_double(traj.log_mu[i](static_cast<Eigen::Index>(j), t)) << "\n";
            }
    atomic_write(path, out.str());
}

TrajectoryRecord read_trajectory_csv(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    TrajectoryRecord traj;
    std::map<std::string, std::string> meta;
    std::string line;
    struct Row {
        long iteration;
        int agent, theta;
        double log_psi, log_mu;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            parse_metadata_line(line, meta);
            continue;
        }
        if (line.rfind("iteration,", 0) == 0) continue; // column header
        const auto fields = split(line, ',');
        if (fields.size() != 5) throw IoError("bad trajectory row: " + line);
        rows.push_back(Row{parse_long(fields[0]), static_cast<int>(parse_long(fields[1])) - 1,
                           static_cast<int>(parse_long(fields[2])) - 1, parse_double(fields[3]),
                           parse_double(fields[4])});
    }
    if (rows.empty()) throw IoError("empty trajectory in " + path.string());

    traj.agent_count = meta.count("agent_count") ? static_cast<int>(parse_long(meta["agent_count"])) : 0;
    traj.hypothesis_count =
        meta.count("hypothesis_count") ? static_cast<int>(parse_long(meta["hypothesis_count"])) : 0;
    traj.seed = meta.count("seed") ? std::strtoull(meta["seed"].c_str(), nullptr, 10) : 0;
    traj.horizon = meta.count("horizon") ? parse_long(meta["horizon"]) : 0;
    traj.clamp_events = meta.count("clamp_events") ? parse_long(meta["clamp_events"]) : 0;
    if (traj.hypothesis_count <= 0) throw IoError("trajectory metadata missing hypothesis_count");

    for (const Row& r : rows) {
        if (traj.iterations.empty() || traj.iterations.back() != r.iteration) {
            if (!traj.iterations.empty() && r.iteration < traj.iterations.back())
                throw IoError("trajectory iterations out of order");
            traj.iterations.push_back(r.iteration);
        }
        if (traj.iterations.size() == 1) {
            if (traj.agents.empty() || traj.agents.back() != r.agent)
                if (std::find(traj.agents.begin(), traj.agents.end(), r.agent) ==
                    traj.agents.end())
                    traj.agents.push_back(r.agent);
        }
    }
    const int na = static_cast<int>(traj.agents.size());
    const int h = traj.hypothesis_count;
    traj.log_psi.assign(traj.iterations.size(), Eigen::MatrixXd::Zero(na, h));
    traj.log_mu.assign(traj.iterations.size(), Eigen::MatrixXd::Zero(na, h));
    for (const Row& r : rows) {
        const int it = traj.index_of_iteration(r.iteration);
        const auto agent_it = std::find(traj.agents.begin(), traj.agents.end(), r.agent);
        if (it < 0 || agent_it == traj.agents.end() || r.theta < 0 || r.theta >= h)
            throw IoError("inconsistent trajectory row");
        const auto j = static_cast<Eigen::Index>(agent_it - traj.agents.begin());
        traj.log_psi[it](j, r.theta) = r.log_psi;
        traj.log_mu[it](j, r.theta) = r.log_mu;
    }
    return traj;
}

} // namespace weakgraph::io
