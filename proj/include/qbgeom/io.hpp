#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

#include <json.hpp>

#include "qbgeom/manifest.hpp"
#include "qbgeom/observables.hpp"
#include "qbgeom/sweep.hpp"

namespace qbgeom {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Locale-independent decimal serialization with 17 significant digits
/// (round-trip exact for IEEE doubles).
inline std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

/// Writes content to path atomically: temp file in the same directory,
/// flushed, then renamed over the target.
inline void atomic_write_file(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    std::error_code ec;
    if (!fs::exists(dir, ec))
        throw IoError("output directory does not exist: " + dir.string());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            fs::remove(tmp, ec);
            throw IoError("write failed: " + tmp.string());
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("rename failed for: " + path.string());
    }
}

inline constexpr const char* trajectory_header =
    "t_gamma,lambda_t,re_c1,im_c1,re_c2,im_c2,population,energy,ergotropy,power,avg_power";

inline std::string trajectory_csv(const AmplitudeTrajectory& traj, const ObservableSeries& s,
                                  const ModelParams& p) {
    std::string out;
    out.reserve(traj.t_grid.size() * 200 + 128);
    out += trajectory_header;
    out += '\n';
    for (std::size_t k = 0; k < traj.t_grid.size(); ++k) {
        out += format_double(traj.t_grid[k]);
        out += ',';
        out += format_double(p.lambda * traj.t_grid[k]);
        out += ',';
        out += format_double(traj.c1[k].real());
        out += ',';
        out += format_double(traj.c1[k].imag());
        out += ',';
        out += format_double(traj.c2[k].real());
        out += ',';
        out += format_double(traj.c2[k].imag());
        out += ',';
        out += format_double(s.population[k]);
        out += ',';
        out += format_double(s.energy[k]);
        out += ',';
        out += format_double(s.ergotropy[k]);
        out += ',';
        out += format_double(s.power[k]);
        out += ',';
        out += format_double(s.avg_power[k]);
        out += '\n';
    }
    return out;
}

inline nlohmann::ordered_json trajectory_json(const AmplitudeTrajectory& traj,
                                              const ObservableSeries& s, const ModelParams& p) {
    nlohmann::ordered_json j;
    auto col = [&](const char* name, auto&& get) {
        auto& arr = j[name] = nlohmann::ordered_json::array();
        for (std::size_t k = 0; k < traj.t_grid.size(); ++k) arr.push_back(get(k));
    };
    col("t_gamma", [&](std::size_t k) { return traj.t_grid[k]; });
    col("lambda_t", [&](std::size_t k) { return p.lambda * traj.t_grid[k]; });
    col("re_c1", [&](std::size_t k) { return traj.c1[k].real(); });
    col("im_c1", [&](std::size_t k) { return traj.c1[k].imag(); });
    col("re_c2", [&](std::size_t k) { return traj.c2[k].real(); });
    col("im_c2", [&](std::size_t k) { return traj.c2[k].imag(); });
    col("population", [&](std::size_t k) { return s.population[k]; });
    col("energy", [&](std::size_t k) { return s.energy[k]; });
    col("ergotropy", [&](std::size_t k) { return s.ergotropy[k]; });
    col("power", [&](std::size_t k) { return s.power[k]; });
    col("avg_power", [&](std::size_t k) { return s.avg_power[k]; });
    return j;
}

/// Matrix CSV: header row carries the column-axis values (first cell names
/// the row axis), each data row leads with its row-axis value.
inline std::string matrix_csv(const SweepResult& res) {
    std::string out;
    out.reserve(res.values.size() * 22 + res.rows() * 24 + 64);
    out += to_string(res.row_axis.axis);
    for (std::size_t c = 0; c < res.cols(); ++c) {
        out += ',';
        out += format_double(res.col_axis.value(c));
    }
    out += '\n';
    for (std::size_t r = 0; r < res.rows(); ++r) {
        out += format_double(res.row_axis.value(r));
        for (std::size_t c = 0; c < res.cols(); ++c) {
            out += ',';
            out += format_double(res.at(r, c));
        }
        out += '\n';
    }
    return out;
}

inline nlohmann::ordered_json matrix_json(const SweepResult& res) {
    nlohmann::ordered_json j;
    j["row_axis"] = to_string(res.row_axis.axis);
    j["row_values"] = res.row_axis.values();
    j["col_axis"] = to_string(res.col_axis.axis);
    j["col_values"] = res.col_axis.values();
    j["observable"] = to_string(res.observable);
    auto& rows = j["values"] = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < res.rows(); ++r) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (std::size_t c = 0; c < res.cols(); ++c) row.push_back(res.at(r, c));
        rows.push_back(std::move(row));
    }
    return j;
}

/// Coarse character heatmap for terminal inspection.
inline std::string ascii_heatmap(const SweepResult& res, std::size_t max_cols = 72,
                                 std::size_t max_rows = 24) {
    static constexpr std::string_view ramp = " .:-=+*#%@";
    if (res.values.empty()) return "(empty)\n";
    double lo = res.values[0], hi = res.values[0];
    for (double v : res.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    const std::size_t nr = std::min(max_rows, res.rows());
    const std::size_t nc = std::min(max_cols, res.cols());
    std::string out;
    out.reserve((nc + 1) * nr + 96);
    for (std::size_t i = 0; i < nr; ++i) {
        const std::size_t r = i * (res.rows() - 1) / (nr > 1 ? nr - 1 : 1);
        for (std::size_t jx = 0; jx < nc; ++jx) {
            const std::size_t c = jx * (res.cols() - 1) / (nc > 1 ? nc - 1 : 1);
            const double f = (res.at(r, c) - lo) / span;
            const auto idx = static_cast<std::size_t>(f * (static_cast<double>(ramp.size()) - 1.0) + 0.5);
            out += ramp[std::min(idx, ramp.size() - 1)];
        }
        out += '\n';
    }
    out += "min=" + format_double(lo) + " max=" + format_double(hi) + "\n";
    return out;
}

inline void write_manifest(const std::filesystem::path& out_path, const RunManifest& m) {
    const std::filesystem::path mpath(out_path.string() + ".manifest.json");
    atomic_write_file(mpath, to_json(m).dump(2) + "\n");
}

} // namespace qbgeom
