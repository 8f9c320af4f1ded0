#pragma once

#include "mmgw/types.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mmgw {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Derives an independent stream seed from a root seed and a path of
/// indices, e.g. (seed, run_index, estimate_index). Order of evaluation of
/// other streams never affects the result.
inline std::uint64_t stream_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = detail::splitmix64(root);
    for (std::uint64_t p : path) {
        h = detail::splitmix64(h ^ detail::splitmix64(p + 0x632BE59BD9B4E019ULL));
    }
    return h;
}

using Engine = std::mt19937_64;

/// Draws from N(mean, cov) for PSD (possibly singular) cov using the
/// symmetric square-root factor.
class GaussianSampler {
public:
    GaussianSampler(const Vec5& mean, const Mat5& cov) : mean_(mean) {
        Eigen::SelfAdjointEigenSolver<Mat5> es(0.5 * (cov + cov.transpose()));
        const Vec5 roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        factor_ = es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
    }

    Vec5 operator()(Engine& engine) {
        Vec5 z;
        for (int i = 0; i < 5; ++i) z(i) = normal_(engine);
        return mean_ + factor_ * z;
    }

    [[nodiscard]] const Mat5& factor() const { return factor_; }

private:
    Vec5 mean_;
    Mat5 factor_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace mmgw
