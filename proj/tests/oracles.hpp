#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the closed forms under test except where noted (finite
// differences evaluate the transform itself, by construction).

#include "mmgw/core.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using mmgw::EllipseState;
using mmgw::Mat2;
using mmgw::Mat5;
using mmgw::Vec5;

/// R diag(l^2, w^2) R^T through Eigen's rotation type.
inline Mat2 rotated_shape(const EllipseState& s) {
    const Mat2 r = Eigen::Rotation2Dd(s.alpha).toRotationMatrix();
    return r * Eigen::Vector2d(s.l * s.l, s.w * s.w).asDiagonal() * r.transpose();
}

/// Principal square root by eigendecomposition.
inline Mat2 sqrt_psd(const Mat2& x) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (x + x.transpose()));
    const Eigen::Vector2d roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

/// Textbook GW: |dm|^2 + tr(Z + X - 2 sqrt(Z^1/2 X Z^1/2)).
inline double gw_exact(const EllipseState& a, const EllipseState& b) {
    const Mat2 z = rotated_shape(a);
    const Mat2 x = rotated_shape(b);
    const Mat2 zh = sqrt_psd(z);
    const Mat2 inner = zh * x * zh;
    const double dx = a.m_x - b.m_x;
    const double dy = a.m_y - b.m_y;
    return dx * dx + dy * dy + (z + x - 2.0 * sqrt_psd(inner)).trace();
}

/// Canonical parameters read off the eigendecomposition of X.
inline EllipseState canonical_from_shape(const EllipseState& s) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(rotated_shape(s));
    const Eigen::Vector2d major = es.eigenvectors().col(1);
    double alpha = std::atan2(major(1), major(0));
    alpha = std::fmod(alpha, mmgw::kPi);
    if (alpha < 0) alpha += mmgw::kPi;
    return {s.m_x, s.m_y, alpha, std::sqrt(std::max(es.eigenvalues()(1), 0.0)),
            std::sqrt(std::max(es.eigenvalues()(0), 0.0))};
}

/// Difference of two angles modulo pi, in [0, pi/2].
inline double angle_gap_mod_pi(double a, double b) {
    double d = std::fmod(std::abs(a - b), mmgw::kPi);
    return std::min(d, mmgw::kPi - d);
}

/// Central finite-difference Jacobian of the transform.
inline Mat5 fd_jacobian(const EllipseState& s, double h = 1e-6) {
    Mat5 out;
    const Vec5 x = s.vec();
    for (int j = 0; j < 5; ++j) {
        Vec5 xp = x;
        Vec5 xm = x;
        xp(j) += h;
        xm(j) -= h;
        out.col(j) = (mmgw::transform(EllipseState::from_vec(xp)).vec() -
                      mmgw::transform(EllipseState::from_vec(xm)).vec()) /
                     (2.0 * h);
    }
    return out;
}

/// Kalman combination with explicit matrix inverses.
inline Vec5 kalman_mean(const Vec5& y1, const Mat5& p1, const Vec5& y2, const Mat5& p2) {
    const Mat5 inv = (p1 + p2).inverse();
    return p2 * inv * y1 + p1 * inv * y2;
}

/// Gauss-Hermite nodes and weights for the probabilists' standard normal
/// (Golub-Welsch on the Jacobi matrix of the Hermite_e recurrence).
inline std::pair<std::vector<double>, std::vector<double>> gauss_hermite_normal(int n) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        j(i, i - 1) = j(i - 1, i) = std::sqrt(static_cast<double>(i));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    std::vector<double> nodes(n);
    std::vector<double> weights(n);
    for (int i = 0; i < n; ++i) {
        nodes[i] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        weights[i] = v0 * v0;
    }
    return {nodes, weights};
}

/// E{T(X)} for X ~ N(mean, diag(var)) by tensor Gauss-Hermite quadrature over
/// (alpha, l, w). The square root is evaluated as R diag(|l|, |w|) R^T.
inline Vec5 expected_transform(const Vec5& mean, const Vec5& var, int n = 40) {
    const auto [z, wt] = gauss_hermite_normal(n);
    Vec5 acc = Vec5::Zero();
    acc(0) = mean(0);
    acc(1) = mean(1);
    for (int i = 0; i < n; ++i) {
        const double a = mean(2) + std::sqrt(var(2)) * z[i];
        const double c = std::cos(a);
        const double s = std::sin(a);
        for (int j = 0; j < n; ++j) {
            const double l = std::abs(mean(3) + std::sqrt(var(3)) * z[j]);
            for (int k = 0; k < n; ++k) {
                const double w = std::abs(mean(4) + std::sqrt(var(4)) * z[k]);
                const double weight = wt[i] * wt[j] * wt[k];
                acc(2) += weight * (l * c * c + w * s * s);
                acc(3) += weight * (l - w) * c * s;
                acc(4) += weight * (l * s * s + w * c * c);
            }
        }
    }
    return acc;
}

/// Uniform random ellipse with alpha in [0, 2 pi) and axes in [lo, hi].
inline EllipseState random_state(std::mt19937_64& rng, double lo, double hi, double center_span = 10.0) {
    std::uniform_real_distribution<double> angle(0.0, mmgw::kTwoPi);
    std::uniform_real_distribution<double> axis(lo, hi);
    std::uniform_real_distribution<double> center(-center_span, center_span);
    return {center(rng), center(rng), angle(rng), axis(rng), axis(rng)};
}

/// Random symmetric PSD 5x5 matrix with eigenvalues in [lo, hi].
inline Mat5 random_spd(std::mt19937_64& rng, double lo, double hi) {
    std::normal_distribution<double> n(0.0, 1.0);
    Mat5 g;
    for (int i = 0; i < 25; ++i) g(i / 5, i % 5) = n(rng);
    Eigen::HouseholderQR<Mat5> qr(g);
    const Mat5 q = qr.householderQ();
    std::uniform_real_distribution<double> ev(lo, hi);
    Vec5 d;
    for (int i = 0; i < 5; ++i) d(i) = ev(rng);
    const Mat5 m = q * d.asDiagonal() * q.transpose();
    return 0.5 * (m + m.transpose());
}

}  // namespace oracle
