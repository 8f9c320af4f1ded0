#pragma once

#include "mmgw/core.hpp"
#include "mmgw/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace mmgw {

enum class Method { naive, shape_mean, mmgw_lin, mmgw_mc, heuristic };

inline constexpr std::array<Method, 5> kAllMethods{Method::naive, Method::shape_mean, Method::mmgw_lin,
                                                   Method::heuristic, Method::mmgw_mc};

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::naive: return "naive";
        case Method::shape_mean: return "shape_mean";
        case Method::mmgw_lin: return "mmgw_lin";
        case Method::mmgw_mc: return "mmgw_mc";
        case Method::heuristic: return "heuristic";
    }
    return "unknown";
}

/// Accepts both the underscore and the dashed spelling ("mmgw-lin").
inline Method parse_method(std::string_view name) {
    std::string s(name);
    for (char& c : s) {
        if (c == '-') c = '_';
    }
    for (Method m : kAllMethods) {
        if (to_string(m) == s) return m;
    }
    throw invalid_input("unknown fusion method '" + std::string(name) + "'");
}

struct FusionInput {
    GaussianEstimate est1;
    GaussianEstimate est2;
};

struct FusionResult {
    EllipseState fused;
    std::optional<TransformedGaussian> fused_transformed;
    Method method = Method::naive;
    std::map<std::string, double> diagnostics;
};

/// Selection rule of the heuristic fuser.
enum class HeuristicCriterion {
    nll,      ///< Gaussian negative log likelihood
    printed,  ///< ½(-ν'Sν + log det S⁻¹ - 5 log 2π), kept for comparison only
};

struct CombinedGaussian {
    Vec5 mean;
    Mat5 cov;
    /// True when P1 + P2 was singular and the pseudo-inverse branch was used.
    bool degenerate = false;
};

/// Kalman combination of two independent Gaussians:
///   mean = P2 (P1+P2)^-1 y1 + P1 (P1+P2)^-1 y2,  cov = P1 (P1+P2)^-1 P2.
///
/// Along directions where P1 + P2 vanishes both inputs carry no spread, and
/// the weights split equally (the limit of adding the same epsilon to both).
inline CombinedGaussian kalman_combine(const Vec5& y1, const Mat5& p1, const Vec5& y2, const Mat5& p2) {
    if (!y1.allFinite() || !y2.allFinite() || !p1.allFinite() || !p2.allFinite()) {
        throw numerical_error("kalman_combine: non-finite input");
    }
    const Mat5 sum = 0.5 * ((p1 + p2) + (p1 + p2).transpose());
    // Variances below the squared rounding level of the means carry no
    // information (e.g. sample scatter of identical particles).
    const double scale = std::max({1.0, y1.cwiseAbs().maxCoeff(), y2.cwiseAbs().maxCoeff()});
    const double floor = (1e-12 * scale) * (1e-12 * scale);

    CombinedGaussian out;
    Mat5 w1;  // weight applied to y2
    Mat5 w2;  // weight applied to y1

    Eigen::LDLT<Mat5> ldlt(sum);
    const bool regular = [&] {
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
        const Vec5 d = ldlt.vectorD();
        return d.minCoeff() > std::max(1e-12 * d.maxCoeff(), floor);
    }();
    if (regular) {
        // P S^-1 = (S^-1 P)^T for symmetric P and S.
        w1 = ldlt.solve(p1).transpose();
        w2 = ldlt.solve(p2).transpose();
    } else {
        Eigen::SelfAdjointEigenSolver<Mat5> es(sum);
        const Vec5& lambda = es.eigenvalues();
        const Mat5& v = es.eigenvectors();
        const double top = lambda.cwiseAbs().maxCoeff();
        const double tol = std::max(1e-12 * top, floor);
        if (lambda.minCoeff() < -std::max(tol, kPsdTol)) {
            throw numerical_error("kalman_combine: P1 + P2 is indefinite");
        }
        Vec5 inv = Vec5::Zero();
        Vec5 null = Vec5::Zero();
        for (int i = 0; i < 5; ++i) {
            if (lambda(i) > tol) {
                inv(i) = 1.0 / lambda(i);
            } else {
                null(i) = 0.5;
            }
        }
        const Mat5 pinv = v * inv.asDiagonal() * v.transpose();
        const Mat5 half_null = v * null.asDiagonal() * v.transpose();
        w1 = p1 * pinv + half_null;
        w2 = p2 * pinv + half_null;
        out.degenerate = true;
    }

    out.mean = w2 * y1 + w1 * y2;
    const Mat5 cov = w1 * p2;
    out.cov = 0.5 * (cov + cov.transpose());
    return out;
}

namespace detail {

inline void validate_input(const FusionInput& in) {
    validate(in.est1, "estimate 1");
    validate(in.est2, "estimate 2");
}

inline bool positive_definite(const Mat5& m) {
    Eigen::LLT<Mat5> llt(0.5 * (m + m.transpose()));
    return llt.info() == Eigen::Success;
}

inline FusionResult finish_transformed(const CombinedGaussian& c, Method method) {
    FusionResult r;
    r.method = method;
    const TransformedState mean = TransformedState::from_vec(c.mean);
    r.fused = inverse_transform(mean);
    r.fused_transformed = TransformedGaussian{mean, c.cov};
    return r;
}

}  // namespace detail

/// Kalman fusion directly in (m_x, m_y, alpha, l, w). Orientation is fused
/// as an ordinary real without wrapping.
inline FusionResult fuse_naive(const FusionInput& in) {
    detail::validate_input(in);
    const CombinedGaussian c = kalman_combine(in.est1.mean.vec(), in.est1.cov, in.est2.mean.vec(), in.est2.cov);
    FusionResult r;
    r.method = Method::naive;
    r.fused = canonicalize(EllipseState::from_vec(c.mean));
    return r;
}

/// Covariance-blind baseline: average centers and shape matrices.
inline FusionResult fuse_shape_mean(const FusionInput& in) {
    detail::validate_input(in);
    const ShapeMatrix x1 = shape_matrix(in.est1.mean);
    const ShapeMatrix x2 = shape_matrix(in.est2.mean);
    const ShapeMatrix avg{0.5 * (x1.x11 + x2.x11), 0.5 * (x1.x12 + x2.x12), 0.5 * (x1.x22 + x2.x22)};
    const ShapeMatrix root = sqrt_spd(avg);
    const TransformedState y{0.5 * (in.est1.mean.m_x + in.est2.mean.m_x), 0.5 * (in.est1.mean.m_y + in.est2.mean.m_y),
                             root.x11, root.x12, root.x22};
    FusionResult r;
    r.method = Method::shape_mean;
    r.fused = inverse_transform(y);
    return r;
}

/// MMGW fusion with linearized covariance propagation. Means go through the
/// exact transform, covariances through P = H C H^T.
inline FusionResult fuse_mmgw_lin(const FusionInput& in) {
    detail::validate_input(in);
    Mat5 h1;
    Mat5 h2;
    try {
        h1 = jacobian(in.est1.mean);
    } catch (const singularity_error& e) {
        throw singularity_error(std::string("mmgw_lin: estimate 1 is degenerate: ") + e.what());
    }
    try {
        h2 = jacobian(in.est2.mean);
    } catch (const singularity_error& e) {
        throw singularity_error(std::string("mmgw_lin: estimate 2 is degenerate: ") + e.what());
    }
    const Mat5 p1 = h1 * in.est1.cov * h1.transpose();
    const Mat5 p2 = h2 * in.est2.cov * h2.transpose();
    const CombinedGaussian c = kalman_combine(transform(in.est1.mean).vec(), p1, transform(in.est2.mean).vec(), p2);
    if (c.degenerate && detail::positive_definite(in.est1.cov + in.est2.cov)) {
        throw numerical_error("mmgw_lin: transformed covariance sum P1 + P2 is singular");
    }
    return detail::finish_transformed(c, Method::mmgw_lin);
}

/// Independent RNG sub-seeds for the two estimates.
struct McSeeds {
    std::uint64_t est1 = 0;
    std::uint64_t est2 = 0;

    static McSeeds from(std::uint64_t seed) { return {stream_seed(seed, {0}), stream_seed(seed, {1})}; }
};

namespace detail {

inline TransformedGaussian transformed_moments(const GaussianEstimate& e, std::size_t m, std::uint64_t seed) {
    // Sample in a fixed member of the equivalence class so that equivalent
    // inputs produce identical particles in transformed space.
    const GaussianEstimate rep = quadrant_representative(e);
    GaussianSampler sampler(rep.mean.vec(), rep.cov);
    Engine engine(seed);

    Eigen::Matrix<double, 5, Eigen::Dynamic> particles(5, static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
        particles.col(static_cast<Eigen::Index>(j)) = transform(EllipseState::from_vec(sampler(engine))).vec();
    }
    const Vec5 mean = particles.rowwise().mean();
    const auto centered = particles.colwise() - mean;
    const Mat5 cov = (centered * centered.transpose()) / static_cast<double>(m);
    return {TransformedState::from_vec(mean), 0.5 * (cov + cov.transpose())};
}

}  // namespace detail

/// MMGW fusion with Monte-Carlo moment matching of the transformed densities.
inline FusionResult fuse_mmgw_mc(const FusionInput& in, std::size_t m, McSeeds seeds) {
    detail::validate_input(in);
    if (m < 2) {
        throw invalid_input("mmgw_mc: need at least 2 samples per estimate");
    }
    const TransformedGaussian g1 = detail::transformed_moments(in.est1, m, seeds.est1);
    const TransformedGaussian g2 = detail::transformed_moments(in.est2, m, seeds.est2);
    const CombinedGaussian c = kalman_combine(g1.mean.vec(), g1.cov, g2.mean.vec(), g2.cov);
    if (c.degenerate && detail::positive_definite(in.est1.cov + in.est2.cov)) {
        throw numerical_error("mmgw_mc: sample covariance sum is singular; increase the sample count (m = " +
                              std::to_string(m) + ")");
    }
    FusionResult r = detail::finish_transformed(c, Method::mmgw_mc);
    r.diagnostics["samples"] = static_cast<double>(m);
    return r;
}

inline FusionResult fuse_mmgw_mc(const FusionInput& in, std::size_t m, std::uint64_t seed) {
    return fuse_mmgw_mc(in, m, McSeeds::from(seed));
}

namespace detail {

struct Likelihood {
    double nll = std::numeric_limits<double>::infinity();
    double printed = std::numeric_limits<double>::quiet_NaN();
};

// Negative log likelihood of innovation nu under N(0, s). A singular s is
// treated as a degenerate Gaussian on its range: innovations leaving the
// range are impossible (+inf).
inline Likelihood innovation_likelihood(const Vec5& nu, const Mat5& s) {
    constexpr double log_two_pi = 1.8378770664093454836;
    Eigen::SelfAdjointEigenSolver<Mat5> es(0.5 * (s + s.transpose()));
    const Vec5& lambda = es.eigenvalues();
    const Mat5& v = es.eigenvectors();
    const double top = lambda.cwiseAbs().maxCoeff();
    const double tol = 1e-12 * std::max(top, std::numeric_limits<double>::min());
    if (lambda.minCoeff() < -std::max(tol, kPsdTol)) {
        throw numerical_error("heuristic: innovation covariance is indefinite");
    }
    const Vec5 coords = v.transpose() * nu;
    const double nu_tol = 1e-9 * (1.0 + nu.norm());

    Likelihood out;
    double quad = 0.0;
    double log_det = 0.0;
    int rank = 0;
    bool in_range = true;
    for (int i = 0; i < 5; ++i) {
        if (lambda(i) > tol) {
            quad += coords(i) * coords(i) / lambda(i);
            log_det += std::log(lambda(i));
            ++rank;
        } else if (std::abs(coords(i)) > nu_tol) {
            in_range = false;
        }
    }
    if (in_range) {
        out.nll = 0.5 * (quad + log_det + rank * log_two_pi);
    }
    if (rank == 5) {
        const double printed_quad = nu.dot(s * nu);
        out.printed = 0.5 * (-printed_quad - log_det - 5.0 * log_two_pi);
    }
    return out;
}

}  // namespace detail

/// Enumerates the four parametrizations of estimate 2, picks the one most
/// likely to describe the same ellipse as estimate 1 and fuses the pair in
/// the original parameter space.
inline FusionResult fuse_heuristic(const FusionInput& in, HeuristicCriterion criterion = HeuristicCriterion::nll) {
    detail::validate_input(in);
    const EllipseState& x1 = in.est1.mean;

    std::array<GaussianEstimate, 4> variants;
    std::array<detail::Likelihood, 4> scores;
    for (int k = 0; k < 4; ++k) {
        GaussianEstimate v = equivalent_estimate(in.est2, k);
        // Take the 2 pi branch of the variant closest to estimate 1.
        v.mean.alpha += kTwoPi * std::round((x1.alpha - v.mean.alpha) / kTwoPi);
        const Vec5 nu = x1.vec() - v.mean.vec();
        scores[k] = detail::innovation_likelihood(nu, in.est1.cov + v.cov);
        variants[k] = v;
    }

    const auto key = [&](int k) {
        const double v = criterion == HeuristicCriterion::nll ? scores[k].nll : scores[k].printed;
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };
    int best = -1;
    for (int k = 0; k < 4; ++k) {
        if (!std::isfinite(key(k)) && key(k) > 0) continue;
        if (best < 0 || key(k) < key(best) - 1e-12) best = k;
    }
    if (best < 0) {
        throw numerical_error("heuristic: no parametrization has finite likelihood (singular innovation covariance)");
    }

    FusionResult r = fuse_naive({in.est1, variants[best]});
    r.method = Method::heuristic;
    r.diagnostics["k_opt"] = best;
    for (int k = 0; k < 4; ++k) {
        r.diagnostics["nll_k" + std::to_string(k)] = scores[k].nll;
        r.diagnostics["printed_k" + std::to_string(k)] = scores[k].printed;
    }
    return r;
}

struct FuseOptions {
    std::size_t mc_samples = 1000;
    std::uint64_t seed = 0;
    HeuristicCriterion criterion = HeuristicCriterion::nll;
};

inline FusionResult fuse(const FusionInput& in, Method method, const FuseOptions& opts = {}) {
    switch (method) {
        case Method::naive: return fuse_naive(in);
        case Method::shape_mean: return fuse_shape_mean(in);
        case Method::mmgw_lin: return fuse_mmgw_lin(in);
        case Method::mmgw_mc: return fuse_mmgw_mc(in, opts.mc_samples, opts.seed);
        case Method::heuristic: return fuse_heuristic(in, opts.criterion);
    }
    throw invalid_input("fuse: unknown method");
}

}  // namespace mmgw
