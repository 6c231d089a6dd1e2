#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <string>

#include <json.hpp>

#include "qbgeom/model.hpp"
#include "qbgeom/version.hpp"

namespace qbgeom {

inline constexpr const char* unit_convention =
    "gamma = 1: rates and frequencies in units of gamma, times in 1/gamma; "
    "energy = omega0*population and ergotropy = omega0*(2p-1)*Theta(p-1/2) with "
    "omega0 = omega0_over_gamma (divide by omega0 for the omega0-normalized axis); "
    "power = d(energy)/dt in units of omega0*gamma";

/// Everything needed to reproduce an output file with a single CLI
/// invocation. Serializes to a flat JSON object with stable key order and
/// round-trips losslessly.
struct RunManifest {
    std::string artifact = "qbgeom";
    std::string version = qbgeom::version;
    std::string timestamp;            ///< ISO-8601 UTC, e.g. 2026-01-01T00:00:00Z
    std::string command;              ///< reproducing CLI invocation
    std::string solver;               ///< analytic | numeric
    std::string scheme;               ///< augmented-rk4 | volterra-trapezoid | ""
    double dt = 0.0;                  ///< numeric integrator step bound (0 = n/a)
    double omega0_over_gamma = 0.0;
    double zeta_over_gamma = 0.0;
    double lambda_over_gamma = 0.0;
    double l_over_lambda0 = 0.0;
    double gamma = 1.0;
    double t_max = 0.0;
    std::uint64_t n_steps = 0;
    std::string row_axis;             ///< sweep only; "" otherwise
    double row_min = 0.0;
    double row_max = 0.0;
    std::uint64_t row_points = 0;
    std::string row_spacing;
    std::string col_axis;
    double col_min = 0.0;
    double col_max = 0.0;
    std::uint64_t col_points = 0;
    std::string col_spacing;
    std::string observable;
    std::uint64_t workers = 1;
    std::uint64_t seed = 0;
    std::string units = unit_convention;

    static RunManifest from_params(const ModelParams& p) {
        RunManifest m;
        m.omega0_over_gamma = p.omega0;
        m.zeta_over_gamma = p.zeta;
        m.lambda_over_gamma = p.lambda;
        m.l_over_lambda0 = p.l_over_lambda0;
        m.gamma = p.gamma;
        m.t_max = p.t_max;
        m.n_steps = p.n_steps;
        return m;
    }
};

inline std::string iso8601_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline nlohmann::ordered_json to_json(const RunManifest& m) {
    nlohmann::ordered_json j;
    j["artifact"] = m.artifact;
    j["version"] = m.version;
    j["timestamp"] = m.timestamp;
    j["command"] = m.command;
    j["solver"] = m.solver;
    j["scheme"] = m.scheme;
    j["dt"] = m.dt;
    j["omega0_over_gamma"] = m.omega0_over_gamma;
    j["zeta_over_gamma"] = m.zeta_over_gamma;
    j["lambda_over_gamma"] = m.lambda_over_gamma;
    j["l_over_lambda0"] = m.l_over_lambda0;
    j["gamma"] = m.gamma;
    j["t_max"] = m.t_max;
    j["n_steps"] = m.n_steps;
    j["row_axis"] = m.row_axis;
    j["row_min"] = m.row_min;
    j["row_max"] = m.row_max;
    j["row_points"] = m.row_points;
    j["row_spacing"] = m.row_spacing;
    j["col_axis"] = m.col_axis;
    j["col_min"] = m.col_min;
    j["col_max"] = m.col_max;
    j["col_points"] = m.col_points;
    j["col_spacing"] = m.col_spacing;
    j["observable"] = m.observable;
    j["workers"] = m.workers;
    j["seed"] = m.seed;
    j["units"] = m.units;
    return j;
}

inline RunManifest manifest_from_json(const nlohmann::ordered_json& j) {
    RunManifest m;
    m.artifact = j.at("artifact").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.timestamp = j.at("timestamp").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.solver = j.at("solver").get<std::string>();
    m.scheme = j.at("scheme").get<std::string>();
    m.dt = j.at("dt").get<double>();
    m.omega0_over_gamma = j.at("omega0_over_gamma").get<double>();
    m.zeta_over_gamma = j.at("zeta_over_gamma").get<double>();
    m.lambda_over_gamma = j.at("lambda_over_gamma").get<double>();
    m.l_over_lambda0 = j.at("l_over_lambda0").get<double>();
    m.gamma = j.at("gamma").get<double>();
    m.t_max = j.at("t_max").get<double>();
    m.n_steps = j.at("n_steps").get<std::uint64_t>();
    m.row_axis = j.at("row_axis").get<std::string>();
    m.row_min = j.at("row_min").get<double>();
    m.row_max = j.at("row_max").get<double>();
    m.row_points = j.at("row_points").get<std::uint64_t>();
    m.row_spacing = j.at("row_spacing").get<std::string>();
    m.col_axis = j.at("col_axis").get<std::string>();
    m.col_min = j.at("col_min").get<double>();
    m.col_max = j.at("col_max").get<double>();
    m.col_points = j.at("col_points").get<std::uint64_t>();
    m.col_spacing = j.at("col_spacing").get<std::string>();
    m.observable = j.at("observable").get<std::string>();
    m.workers = j.at("workers").get<std::uint64_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.units = j.at("units").get<std::string>();
    return m;
}

} // namespace qbgeom
