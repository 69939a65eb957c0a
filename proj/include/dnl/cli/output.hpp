#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dnl/diagnostics/energy.hpp"
#include "dnl/discretization.hpp"
#include "dnl/errors.hpp"
#include "dnl/semiflow.hpp"

namespace dnl::cli {

using json = nlohmann::json;

inline constexpr const char* trajectory_header = "t,E,F,G,ut_Linf,u_min,u_max,d2,dinf,newton_iters,dissipation";

/// 17 significant digits, '.' decimal point regardless of locale settings of the stream.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

/// One CSV row per recorded state.
inline void write_trajectory_csv(const std::filesystem::path& path, const TrajectorySegment& traj) {
    std::ofstream out = open_output(path);
    out << trajectory_header << '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const EnergyReport r = energy_report(traj.times[k], traj.states[k], traj.velocities[k], traj.model);
        out << fmt17(r.t) << ',' << fmt17(r.E) << ',' << fmt17(r.F) << ',' << fmt17(r.G) << ',' << fmt17(r.ut_Linf)
            << ',' << fmt17(r.u_min) << ',' << fmt17(r.u_max) << ',' << fmt17(r.d2_to_zero) << ','
            << fmt17(r.dinf_to_zero) << ',' << traj.newton_iters[k] << ',' << fmt17(r.dissipation) << '\n';
    }
}

/// Header-only trajectory table, for experiments that do not time-step.
inline void write_empty_trajectory_csv(const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    out << trajectory_header << '\n';
}

inline void write_field(const std::filesystem::path& path, const Field& u) {
    std::ofstream out = open_output(path);
    for (std::size_t i = 0; i < u.size(); ++i) out << fmt17(u.grid().x(i)) << ' ' << fmt17(u[i]) << '\n';
}

/// fields/state_00000.txt, ... one file per recorded state.
inline void write_fields(const std::filesystem::path& dir, const TrajectorySegment& traj) {
    for (std::size_t k = 0; k < traj.size(); ++k) {
        char name[48];
        std::snprintf(name, sizeof name, "state_%05zu.txt", k);
        write_field(dir / name, traj.states[k]);
    }
}

/// Generic numeric table with a header row.
inline void write_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                        const std::vector<std::vector<double>>& columns) {
    std::ofstream out = open_output(path);
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << fmt17(columns[c][r]);
        out << '\n';
    }
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out = open_output(path);
    out << j.dump(2) << '\n';
}

} // namespace dnl::cli
