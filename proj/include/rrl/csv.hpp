#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rrl/errors.hpp"

namespace rrl {

// One row per simulated period.
struct TrajectoryRecord {
    std::uint64_t seed = 0;
    int episode = 0;
    int period = 0;
    int regime_id = 0;
    double belief = 0.0;  // the action actually taken this period
    double pi = 0.0;
    double i = 0.0;
    double m = 0.0;
    double reward = 0.0;
    double sigma = 0.0;
    double critic_loss = 0.0;
    double actor_objective = 0.0;
};

inline constexpr const char* kTrajectoryHeader =
    "seed,episode,period,regime_id,belief,pi,i,m,reward,sigma,critic_loss,"
    "actor_objective";

// 12 significant digits, shortest form
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string trajectory_row(const TrajectoryRecord& r) {
    std::ostringstream os;
    os << r.seed << ',' << r.episode << ',' << r.period << ',' << r.regime_id
       << ',' << format_double(r.belief) << ',' << format_double(r.pi) << ','
       << format_double(r.i) << ',' << format_double(r.m) << ','
       << format_double(r.reward) << ',' << format_double(r.sigma) << ','
       << format_double(r.critic_loss) << ','
       << format_double(r.actor_objective);
    return os.str();
}

inline void write_trajectory_csv(const std::filesystem::path& path,
                                 const std::vector<TrajectoryRecord>& rows) {
    std::ofstream out(path);
    if (!out) throw IoFailure("csv: cannot write '" + path.string() + "'");
    out << kTrajectoryHeader << '\n';
    for (const auto& r : rows) out << trajectory_row(r) << '\n';
    if (!out) throw IoFailure("csv: short write to '" + path.string() + "'");
}

inline std::vector<TrajectoryRecord> read_trajectory_csv(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("csv: cannot read '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line != kTrajectoryHeader)
        throw BadConfig("csv: '" + path.string() +
                        "' does not carry the trajectory header");
    std::vector<TrajectoryRecord> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 12)
            throw BadConfig("csv: '" + path.string() + "' line " +
                            std::to_string(lineno) + " has " +
                            std::to_string(cells.size()) + " fields");
        try {
            TrajectoryRecord r;
            r.seed = std::stoull(cells[0]);
            r.episode = std::stoi(cells[1]);
            r.period = std::stoi(cells[2]);
            r.regime_id = std::stoi(cells[3]);
            r.belief = std::stod(cells[4]);
            r.pi = std::stod(cells[5]);
            r.i = std::stod(cells[6]);
            r.m = std::stod(cells[7]);
            r.reward = std::stod(cells[8]);
            r.sigma = std::stod(cells[9]);
            r.critic_loss = std::stod(cells[10]);
            r.actor_objective = std::stod(cells[11]);
            rows.push_back(r);
        } catch (const std::exception&) {
            throw BadConfig("csv: '" + path.string() + "' line " +
                            std::to_string(lineno) + " is malformed");
        }
    }
    return rows;
}

}  // namespace rrl
