#pragma once

// Command-line front end. Kept in a header so the test suite can drive the
// exact same code path as the executable.

#include "mmgw/mmgw.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <optional>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace mmgw::cli {

/// Stable exit codes for scripting.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

using nlohmann::json;

struct Formatting {
    bool full_precision = false;

    [[nodiscard]] double round(double v) const {
        if (full_precision || !std::isfinite(v)) return v;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6g", v);
        return std::stod(buf);
    }

    [[nodiscard]] json number(double v) const { return std::isfinite(v) ? json(round(v)) : json(nullptr); }

    [[nodiscard]] std::string text(double v) const {
        if (!std::isfinite(v)) return "nan";
        if (full_precision) return io::format_double(v);
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6g", v);
        return buf;
    }
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw invalid_input("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json parse_json_file(const std::string& path) {
    const std::string text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw invalid_input(path + ": " + e.what());
    }
}

/// Estimate file: {"mean": [m_x, m_y, alpha, l, w], "cov": 25 row-major or 5 diagonal reals}.
/// With `require_cov` false a missing covariance reads as zero.
inline GaussianEstimate load_estimate(const std::string& path, bool degrees, bool require_cov = true) {
    const json j = parse_json_file(path);
    GaussianEstimate e;
    try {
        if (!j.is_object() || !j.contains("mean")) throw invalid_input(path + ": missing \"mean\"");
        e.mean = EllipseState::from_vec(io::vec_from_json(j["mean"], "mean"));
        if (j.contains("cov")) {
            e.cov = io::mat_from_json(j["cov"], "cov");
        } else if (require_cov) {
            throw invalid_input(path + ": missing \"cov\"");
        }
    } catch (const json::exception& ex) {
        throw invalid_input(path + ": " + ex.what());
    }
    if (degrees) {
        constexpr double rad = kPi / 180.0;
        e.mean.alpha *= rad;
        e.cov.row(2) *= rad;
        e.cov.col(2) *= rad;
    }
    validate(e, path.c_str());
    return e;
}

inline json state_json(const EllipseState& s, const Formatting& f) {
    return {{"m_x", f.number(s.m_x)}, {"m_y", f.number(s.m_y)}, {"alpha", f.number(s.alpha)},
            {"l", f.number(s.l)},     {"w", f.number(s.w)}};
}

inline json vec_json(const Vec5& v, const Formatting& f) {
    json out = json::array();
    for (int i = 0; i < 5; ++i) out.push_back(f.number(v(i)));
    return out;
}

inline json fusion_json(const FusionResult& r, const Formatting& f) {
    json out;
    out["method"] = std::string(to_string(r.method));
    out["fused"] = state_json(r.fused, f);
    if (r.fused_transformed) {
        json cov = json::array();
        for (int i = 0; i < 25; ++i) cov.push_back(f.number(r.fused_transformed->cov(i / 5, i % 5)));
        out["fused_transformed"] = {{"mean", vec_json(r.fused_transformed->mean.vec(), f)}, {"cov", cov}};
    } else {
        out["fused_transformed"] = nullptr;
    }
    json diag = json::object();
    for (const auto& [k, v] : r.diagnostics) diag[k] = f.number(v);
    out["diagnostics"] = diag;
    return out;
}

inline void print_summary(const RunReport& report, const Formatting& f, std::ostream& out) {
    out << std::left << std::setw(12) << "method" << std::setw(14) << "rmgw" << std::setw(14) << "mean_gw"
        << "failed_runs\n";
    for (const auto& m : report.methods) {
        out << std::left << std::setw(12) << to_string(m.method) << std::setw(14) << f.text(m.rmgw) << std::setw(14)
            << f.text(m.mean_gw) << m.failed_runs << '\n';
    }
}

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fusion of elliptic extended-target estimates in Gaussian Wasserstein geometry", "mmgw"};
    app.require_subcommand(1);

    Formatting fmt;
    app.add_flag("--full-precision", fmt.full_precision, "Print shortest round-trip numbers instead of 6 digits");

    bool degrees = false;

    // fuse
    auto* fuse_cmd = app.add_subcommand("fuse", "Fuse two estimate files");
    std::string fuse_file1;
    std::string fuse_file2;
    std::string method_name = "mmgw_mc";
    std::size_t samples = 1000;
    std::uint64_t seed = 0;
    std::string criterion = "nll";
    fuse_cmd->add_option("file1", fuse_file1, "First estimate (JSON)")->required();
    fuse_cmd->add_option("file2", fuse_file2, "Second estimate (JSON)")->required();
    fuse_cmd->add_option("--method", method_name, "naive | shape_mean | mmgw_lin | mmgw_mc | heuristic")
        ->capture_default_str();
    fuse_cmd->add_option("-m,--samples", samples, "Particles per estimate for mmgw_mc")->capture_default_str();
    fuse_cmd->add_option("--seed", seed, "RNG seed for mmgw_mc")->capture_default_str();
    fuse_cmd->add_option("--criterion", criterion, "Heuristic selection rule: nll | printed")->capture_default_str();
    fuse_cmd->add_flag("--degrees", degrees, "Angles in the input files are degrees");

    // distance
    auto* dist_cmd = app.add_subcommand("distance", "GW distance between two ellipses");
    std::string dist_file1;
    std::string dist_file2;
    std::string variant = "exact";
    dist_cmd->add_option("file1", dist_file1)->required();
    dist_cmd->add_option("file2", dist_file2)->required();
    dist_cmd->add_option("--variant", variant, "exact | approx | frobenius")->capture_default_str();
    dist_cmd->add_flag("--degrees", degrees, "Angles in the input files are degrees");

    // transform
    auto* tr_cmd = app.add_subcommand("transform", "Print T(x) and its canonical inverse");
    std::string tr_file;
    tr_cmd->add_option("file", tr_file)->required();
    tr_cmd->add_flag("--degrees", degrees, "Angles in the input file are degrees");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Run the seeded Monte-Carlo comparison");
    std::string config_path;
    std::string out_path;
    std::string format_name = "json";
    bool use_reference = false;
    std::optional<std::uint64_t> eval_seed;
    std::optional<std::size_t> eval_runs;
    eval_cmd->add_option("--config", config_path, "Scenario config (JSON)");
    eval_cmd->add_flag("--paper", use_reference, "Use the reference two-sensor scenario as defaults");
    eval_cmd->add_option("--seed", eval_seed, "Override the scenario seed");
    eval_cmd->add_option("--runs", eval_runs, "Override the number of runs");
    eval_cmd->add_option("--out", out_path, "Report output path")->required();
    eval_cmd->add_option("--format", format_name, "json | csv")->capture_default_str();

    std::vector<std::string> argv_store;
    argv_store.reserve(args.size() + 1);
    argv_store.emplace_back("mmgw");
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }

    try {
        if (*fuse_cmd) {
            const Method method = parse_method(method_name);
            const HeuristicCriterion crit = io::parse_criterion(criterion);
            const FusionInput in{load_estimate(fuse_file1, degrees), load_estimate(fuse_file2, degrees)};
            FuseOptions opts;
            opts.mc_samples = samples;
            opts.seed = seed;
            opts.criterion = crit;
            const FusionResult r = fuse(in, method, opts);
            out << fusion_json(r, fmt).dump(2) << '\n';
        } else if (*dist_cmd) {
            const EllipseState a = load_estimate(dist_file1, degrees, false).mean;
            const EllipseState b = load_estimate(dist_file2, degrees, false).mean;
            double v = 0.0;
            if (variant == "exact") {
                v = gw_exact(a, b);
            } else if (variant == "approx") {
                v = gw_approx(a, b);
            } else if (variant == "frobenius") {
                v = gw_approx_frobenius(a, b);
            } else {
                throw invalid_input("unknown distance variant '" + variant + "'");
            }
            out << fmt.text(v) << '\n';
        } else if (*tr_cmd) {
            const EllipseState s = load_estimate(tr_file, degrees, false).mean;
            const TransformedState t = transform(s);
            json j;
            j["transformed"] = vec_json(t.vec(), fmt);
            j["canonical"] = state_json(inverse_transform(t), fmt);
            out << j.dump(2) << '\n';
        } else if (*eval_cmd) {
            if (config_path.empty() && !use_reference) {
                throw invalid_input("eval: pass --config and/or --paper");
            }
            ScenarioConfig base;
            if (use_reference) base = ScenarioConfig::reference();
            ScenarioConfig config = base;
            if (!config_path.empty()) {
                const json j = parse_json_file(config_path);
                if (!use_reference && (!j.contains("ground_truth") || !j.contains("cov1") || !j.contains("cov2"))) {
                    throw invalid_input(config_path + ": ground_truth, cov1 and cov2 are required without --paper");
                }
                config = io::scenario_from_json(j, base);
            }
            if (eval_seed) config.seed = *eval_seed;
            if (eval_runs) config.runs = *eval_runs;
            config.validate();

            ReportFormat format = ReportFormat::json;
            if (format_name == "csv") {
                format = ReportFormat::csv;
            } else if (format_name != "json") {
                throw invalid_input("unknown report format '" + format_name + "'");
            }

            const RunReport report = run_experiment(config);
            std::ofstream file(out_path, std::ios::binary);
            if (!file) throw invalid_input("cannot write '" + out_path + "'");
            file << serialize_report(report, format);
            if (!file) throw invalid_input("failed writing '" + out_path + "'");
            print_summary(report, fmt, out);
        }
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::runtime_error& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}

}  // namespace mmgw::cli
