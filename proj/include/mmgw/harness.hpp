#pragma once

#include "mmgw/fusion.hpp"
#include "mmgw/metrics.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mmgw {

struct ScenarioConfig {
    EllipseState ground_truth;
    Mat5 cov1 = Mat5::Zero();
    Mat5 cov2 = Mat5::Zero();
    std::size_t runs = 100;
    std::size_t mc_samples = 1000;
    std::uint64_t seed = 0;
    /// Report sensor 2 in the k = 1 parametrization (alpha + pi/2, axes swapped).
    bool swap_sensor2 = true;
    std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
    HeuristicCriterion criterion = HeuristicCriterion::nll;

    /// The two-sensor scenario with the reference constants:
    /// x_g = [0, 1, pi/2, 4, 2], C1 = diag(.5, .5, .2, 1, .2),
    /// C2 = diag(1.5, 1.5, .2, 1, .2), 100 runs, 1000 particles.
    static ScenarioConfig reference(std::uint64_t seed = 0) {
        ScenarioConfig c;
        c.ground_truth = {0.0, 1.0, kHalfPi, 4.0, 2.0};
        c.cov1 = Vec5(0.5, 0.5, 0.2, 1.0, 0.2).asDiagonal();
        c.cov2 = Vec5(1.5, 1.5, 0.2, 1.0, 0.2).asDiagonal();
        c.runs = 100;
        c.mc_samples = 1000;
        c.seed = seed;
        c.swap_sensor2 = true;
        return c;
    }

    void validate() const {
        detail::require_finite(ground_truth, "scenario ground_truth");
        if (runs < 1) throw invalid_input("scenario: runs must be >= 1");
        if (mc_samples < 2) throw invalid_input("scenario: mc_samples must be >= 2");
        validate_covariance(cov1, "scenario cov1");
        validate_covariance(cov2, "scenario cov2");
    }
};

struct MethodReport {
    Method method = Method::naive;
    /// One entry per run; empty where the fuser failed on that run.
    std::vector<std::optional<double>> per_run_gw;
    /// Root mean GW over successful runs (NaN if none succeeded).
    double rmgw = 0.0;
    double mean_gw = 0.0;
    std::size_t failed_runs = 0;

    [[nodiscard]] std::vector<double> successful() const {
        std::vector<double> out;
        out.reserve(per_run_gw.size());
        for (const auto& v : per_run_gw) {
            if (v) out.push_back(*v);
        }
        return out;
    }
};

struct RunReport {
    ScenarioConfig scenario;
    std::vector<MethodReport> methods;
    double wall_time = 0.0;

    [[nodiscard]] const MethodReport* find(Method m) const {
        for (const auto& r : methods) {
            if (r.method == m) return &r;
        }
        return nullptr;
    }
};

/// Recomputes rmgw, mean_gw and failed_runs from per_run_gw.
inline void refresh_aggregates(MethodReport& r) {
    const std::vector<double> ok = r.successful();
    r.failed_runs = r.per_run_gw.size() - ok.size();
    if (ok.empty()) {
        r.rmgw = std::numeric_limits<double>::quiet_NaN();
        r.mean_gw = std::numeric_limits<double>::quiet_NaN();
    } else {
        r.rmgw = aggregate_rmgw(ok);
        r.mean_gw = aggregate_mean_gw(ok);
    }
}

/// Draws the two sensor estimates of one run. The streams depend only on
/// (seed, run_index, sensor), never on how many runs came before.
inline FusionInput generate_trial(const ScenarioConfig& config, std::size_t run_index) {
    const Vec5 truth = config.ground_truth.vec();
    Engine engine1(stream_seed(config.seed, {run_index, 0}));
    Engine engine2(stream_seed(config.seed, {run_index, 1}));
    GaussianSampler sensor1(truth, config.cov1);
    GaussianSampler sensor2(truth, config.cov2);

    FusionInput in;
    in.est1 = {EllipseState::from_vec(sensor1(engine1)), config.cov1};
    in.est2 = {EllipseState::from_vec(sensor2(engine2)), config.cov2};
    if (config.swap_sensor2) {
        in.est2 = equivalent_estimate(in.est2, 1);
    }
    return in;
}

inline std::uint64_t trial_mc_seed(const ScenarioConfig& config, std::size_t run_index) {
    return stream_seed(config.seed, {run_index, 2});
}

/// Runs every configured fuser on every trial and scores it against the
/// ground truth with the exact GW distance. A fuser failing on a run is
/// recorded as a failed run and left out of the aggregates.
inline RunReport run_experiment(const ScenarioConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();

    RunReport report;
    report.scenario = config;
    for (Method m : config.methods) {
        MethodReport r;
        r.method = m;
        r.per_run_gw.resize(config.runs);
        report.methods.push_back(std::move(r));
    }

    for (std::size_t run = 0; run < config.runs; ++run) {
        const FusionInput trial = generate_trial(config, run);
        FuseOptions opts;
        opts.mc_samples = config.mc_samples;
        opts.seed = trial_mc_seed(config, run);
        opts.criterion = config.criterion;
        for (auto& r : report.methods) {
            try {
                const FusionResult fused = fuse(trial, r.method, opts);
                r.per_run_gw[run] = gw_exact(fused.fused, config.ground_truth);
            } catch (const std::runtime_error&) {
                r.per_run_gw[run].reset();
            }
        }
    }

    for (auto& r : report.methods) refresh_aggregates(r);
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace mmgw
