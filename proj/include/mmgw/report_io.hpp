#pragma once

#include "mmgw/harness.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <sstream>
#include <string>

namespace mmgw {

enum class ReportFormat { json, csv };

namespace io {

using nlohmann::json;

/// Shortest round-trip decimal representation.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double number_or_nan(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

inline json vec_to_json(const Vec5& v) { return json::array({v(0), v(1), v(2), v(3), v(4)}); }

inline json mat_to_json(const Mat5& m) {
    json out = json::array();
    for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 5; ++c) out.push_back(m(r, c));
    }
    return out;
}

inline Vec5 vec_from_json(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 5) {
        throw invalid_input(std::string(what) + ": expected an array of 5 numbers");
    }
    Vec5 v;
    for (int i = 0; i < 5; ++i) v(i) = j.at(i).get<double>();
    return v;
}

/// Accepts 25 row-major reals, 5 diagonal reals, or 5 rows of 5.
inline Mat5 mat_from_json(const json& j, const char* what) {
    if (!j.is_array()) throw invalid_input(std::string(what) + ": expected an array");
    Mat5 m = Mat5::Zero();
    if (j.size() == 25) {
        for (int i = 0; i < 25; ++i) m(i / 5, i % 5) = j.at(i).get<double>();
    } else if (j.size() == 5 && j.at(0).is_array()) {
        for (int r = 0; r < 5; ++r) m.row(r) = vec_from_json(j.at(r), what).transpose();
    } else if (j.size() == 5) {
        m = vec_from_json(j, what).asDiagonal();
    } else {
        throw invalid_input(std::string(what) + ": expected 25 row-major or 5 diagonal entries");
    }
    return m;
}

inline HeuristicCriterion parse_criterion(const std::string& s) {
    if (s == "nll") return HeuristicCriterion::nll;
    if (s == "printed") return HeuristicCriterion::printed;
    throw invalid_input("unknown heuristic criterion '" + s + "'");
}

inline std::string to_string(HeuristicCriterion c) { return c == HeuristicCriterion::nll ? "nll" : "printed"; }

inline json to_json(const ScenarioConfig& c) {
    json methods = json::array();
    for (Method m : c.methods) methods.push_back(std::string(mmgw::to_string(m)));
    return {
        {"ground_truth", vec_to_json(c.ground_truth.vec())},
        {"cov1", mat_to_json(c.cov1)},
        {"cov2", mat_to_json(c.cov2)},
        {"runs", c.runs},
        {"mc_samples", c.mc_samples},
        {"seed", c.seed},
        {"swap_sensor2", c.swap_sensor2},
        {"methods", methods},
        {"heuristic_criterion", to_string(c.criterion)},
    };
}

/// Reads a scenario, taking every missing field from `base`. Validation is
/// left to ScenarioConfig::validate.
inline ScenarioConfig scenario_from_json(const json& j, ScenarioConfig base = {}) {
    if (!j.is_object()) throw invalid_input("scenario: expected a JSON object");
    ScenarioConfig c = std::move(base);
    try {
        if (j.contains("ground_truth")) c.ground_truth = EllipseState::from_vec(vec_from_json(j["ground_truth"], "ground_truth"));
        if (j.contains("cov1")) c.cov1 = mat_from_json(j["cov1"], "cov1");
        if (j.contains("cov2")) c.cov2 = mat_from_json(j["cov2"], "cov2");
        if (j.contains("runs")) {
            if (j["runs"].get<long long>() < 0) throw invalid_input("scenario: runs must be >= 1");
            c.runs = j["runs"].get<std::size_t>();
        }
        if (j.contains("mc_samples")) {
            if (j["mc_samples"].get<long long>() < 0) throw invalid_input("scenario: mc_samples must be >= 2");
            c.mc_samples = j["mc_samples"].get<std::size_t>();
        }
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("swap_sensor2")) c.swap_sensor2 = j["swap_sensor2"].get<bool>();
        if (j.contains("methods")) {
            c.methods.clear();
            for (const auto& m : j["methods"]) c.methods.push_back(parse_method(m.get<std::string>()));
        }
        if (j.contains("heuristic_criterion")) c.criterion = parse_criterion(j["heuristic_criterion"].get<std::string>());
    } catch (const json::exception& e) {
        throw invalid_input(std::string("scenario: ") + e.what());
    }
    return c;
}

inline json to_json(const RunReport& r) {
    json methods = json::object();
    for (const auto& m : r.methods) {
        json runs = json::array();
        for (const auto& v : m.per_run_gw) runs.push_back(v ? json(*v) : json(nullptr));
        methods[std::string(mmgw::to_string(m.method))] = {
            {"per_run_gw", runs},
            {"rmgw", number_or_null(m.rmgw)},
            {"mean_gw", number_or_null(m.mean_gw)},
            {"failed_runs", m.failed_runs},
        };
    }
    return {{"scenario", to_json(r.scenario)}, {"methods", methods}, {"wall_time", r.wall_time}};
}

inline RunReport report_from_json(const json& j) {
    RunReport r;
    try {
        r.scenario = scenario_from_json(j.at("scenario"));
        r.wall_time = j.value("wall_time", 0.0);
        const json& methods = j.at("methods");
        for (Method m : r.scenario.methods) {
            const json& mj = methods.at(std::string(mmgw::to_string(m)));
            MethodReport mr;
            mr.method = m;
            for (const auto& v : mj.at("per_run_gw")) {
                mr.per_run_gw.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
            }
            mr.rmgw = number_or_nan(mj.at("rmgw"));
            mr.mean_gw = number_or_nan(mj.at("mean_gw"));
            mr.failed_runs = mj.at("failed_runs").get<std::size_t>();
            r.methods.push_back(std::move(mr));
        }
    } catch (const json::exception& e) {
        throw invalid_input(std::string("report: ") + e.what());
    }
    return r;
}

inline std::string to_csv(const RunReport& r) {
    std::ostringstream out;
    out << "method,run_index,gw\n";
    for (const auto& m : r.methods) {
        for (std::size_t i = 0; i < m.per_run_gw.size(); ++i) {
            out << mmgw::to_string(m.method) << ',' << i << ',';
            if (m.per_run_gw[i]) out << format_double(*m.per_run_gw[i]);
            out << '\n';
        }
    }
    out << "\nmethod,rmgw,mean_gw,failed_runs\n";
    for (const auto& m : r.methods) {
        out << mmgw::to_string(m.method) << ',' << (std::isfinite(m.rmgw) ? format_double(m.rmgw) : "") << ','
            << (std::isfinite(m.mean_gw) ? format_double(m.mean_gw) : "") << ',' << m.failed_runs << '\n';
    }
    return out.str();
}

}  // namespace io

inline std::string serialize_report(const RunReport& report, ReportFormat format) {
    if (format == ReportFormat::csv) return io::to_csv(report);
    return io::to_json(report).dump(2) + "\n";
}

inline RunReport deserialize_report(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw invalid_input(std::string("report: ") + e.what());
    }
    return io::report_from_json(j);
}

}  // namespace mmgw
