#pragma once

#include "mmgw/types.hpp"

#include <array>
#include <cmath>
#include <string>

namespace mmgw {

namespace detail {

// ad - bc with a single rounding error (Kahan). The naive product
// difference loses all precision for eccentric ellipses.
inline double det2(double a, double b, double c, double d) {
    const double bc = b * c;
    const double err = std::fma(-b, c, bc);
    const double ad_minus_bc = std::fma(a, d, -bc);
    return ad_minus_bc + err;
}

inline double psd_scale(double x11, double x22) { return std::max(1.0, std::abs(x11) + std::abs(x22)); }

}  // namespace detail

/// Reduces an angle into [0, pi).
inline double wrap_pi(double a) {
    double r = std::fmod(a, kPi);
    if (r < 0.0) r += kPi;
    if (r >= kPi) r -= kPi;
    return r;
}

/// Reduces an angle into [0, 2*pi).
inline double wrap_two_pi(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r -= kTwoPi;
    return r;
}

/// X = R(alpha) diag(l^2, w^2) R(alpha)^T.
inline ShapeMatrix shape_matrix(const EllipseState& s) {
    detail::require_finite(s, "shape_matrix");
    const double c = std::cos(s.alpha);
    const double sn = std::sin(s.alpha);
    const double l2 = s.l * s.l;
    const double w2 = s.w * s.w;
    return {l2 * c * c + w2 * sn * sn, (l2 - w2) * c * sn, l2 * sn * sn + w2 * c * c};
}

/// Principal square root of a symmetric PSD 2x2 matrix.
///
/// Uses S = (X + d I) / t with d = sqrt(det X), t = sqrt(tr X + 2 d), which
/// follows from Cayley-Hamilton. Throws domain_error for indefinite input.
inline ShapeMatrix sqrt_spd(const ShapeMatrix& x) {
    if (!std::isfinite(x.x11) || !std::isfinite(x.x12) || !std::isfinite(x.x22)) {
        throw invalid_input("sqrt_spd: non-finite matrix entries");
    }
    const double tol = kPsdTol * detail::psd_scale(x.x11, x.x22);
    double det = detail::det2(x.x11, x.x12, x.x12, x.x22);
    if (x.x11 < -tol || x.x22 < -tol || det < -tol * detail::psd_scale(x.x11, x.x22)) {
        throw domain_error("sqrt_spd: matrix is not positive semidefinite");
    }
    det = std::max(det, 0.0);
    const double delta = std::sqrt(det);
    const double tau2 = x.x11 + x.x22 + 2.0 * delta;
    if (tau2 <= 0.0) {
        return {0.0, 0.0, 0.0};
    }
    const double tau = std::sqrt(tau2);
    return {(x.x11 + delta) / tau, x.x12 / tau, (x.x22 + delta) / tau};
}

/// T(x) = [m_x, m_y, s11, s12, s22] with S = X^{1/2}.
inline TransformedState transform(const EllipseState& s) {
    const ShapeMatrix root = sqrt_spd(shape_matrix(s));
    return {s.m_x, s.m_y, root.x11, root.x12, root.x22};
}

/// Canonical representative of an ellipse parametrization:
/// alpha in [0, pi), l >= w >= 0. Works on the parameters directly, so the
/// orientation of a circle is kept as given (reduced mod pi).
inline EllipseState canonicalize(const EllipseState& s) {
    detail::require_finite(s, "canonicalize");
    EllipseState out = s;
    out.l = std::abs(s.l);
    out.w = std::abs(s.w);
    if (out.l < out.w) {
        std::swap(out.l, out.w);
        out.alpha += kHalfPi;
    }
    out.alpha = wrap_pi(out.alpha);
    return out;
}

/// T^{-1}: eigendecomposition of the implied root matrix S (which shares
/// eigenvectors with X = S S). Returns the canonical ellipse; a circle
/// reports alpha = 0.
inline EllipseState inverse_transform(const TransformedState& y) {
    if (!y.vec().allFinite()) {
        throw invalid_input("inverse_transform: non-finite transformed state");
    }
    const double half_tr = 0.5 * (y.s11 + y.s22);
    const double radius = std::hypot(0.5 * (y.s11 - y.s22), y.s12);
    const double mu1 = half_tr + radius;
    double mu2 = half_tr - radius;
    const double tol = kPsdTol * detail::psd_scale(y.s11, y.s22);
    if (mu2 < -tol) {
        throw domain_error("inverse_transform: implied square-root matrix is indefinite");
    }
    if (mu1 > 0.0) {
        // Same eigenvalue without the cancellation in half_tr - radius.
        mu2 = detail::det2(y.s11, y.s12, y.s12, y.s22) / mu1;
    }
    mu2 = std::max(mu2, 0.0);
    double alpha = 0.0;
    if (radius > 0.0) {
        alpha = wrap_pi(0.5 * std::atan2(2.0 * y.s12, y.s11 - y.s22));
    }
    return {y.m_x, y.m_y, alpha, std::max(mu1, 0.0), mu2};
}

/// Analytic Jacobian of T with respect to (m_x, m_y, alpha, l, w).
///
/// Quotient-rule chain through the shape-matrix entries t11, t12, t22 with
/// d = sqrt(t11 t22 - t12^2) and t = sqrt(t11 + t22 + 2 d). Throws
/// singularity_error for circles and (near-)zero axes.
inline Mat5 jacobian(const EllipseState& s) {
    detail::require_finite(s, "jacobian");
    const double al = std::abs(s.l);
    const double aw = std::abs(s.w);
    if (std::min(al, aw) < kPsdTol) {
        throw singularity_error("jacobian: semi-axis is (numerically) zero");
    }
    if (std::abs(al - aw) < kPsdTol) {
        throw singularity_error("jacobian: circular extent, orientation is unidentifiable");
    }

    const double l = s.l;
    const double w = s.w;
    const double c = std::cos(s.alpha);
    const double sn = std::sin(s.alpha);
    const double c2 = c * c;
    const double sn2 = sn * sn;
    const double sin2a = std::sin(2.0 * s.alpha);
    const double cos2a = std::cos(2.0 * s.alpha);

    const double t11 = l * l * c2 + w * w * sn2;
    const double t12 = (l * l - w * w) * c * sn;
    const double t22 = l * l * sn2 + w * w * c2;
    const double d = std::sqrt(std::max(detail::det2(t11, t12, t12, t22), 0.0));
    const double t = std::sqrt(t11 + t22 + 2.0 * d);

    // Partials of (t11, t12, t22) with respect to (alpha, l, w).
    const std::array<double, 3> dt11{(w * w - l * l) * sin2a, 2.0 * l * c2, 2.0 * w * sn2};
    const std::array<double, 3> dt12{(l * l - w * w) * cos2a, 2.0 * l * c * sn, -2.0 * w * sn * c};
    const std::array<double, 3> dt22{(l * l - w * w) * sin2a, 2.0 * l * sn2, 2.0 * w * c2};

    Mat5 h = Mat5::Zero();
    h(0, 0) = 1.0;
    h(1, 1) = 1.0;
    for (int u = 0; u < 3; ++u) {
        const double dd = (dt11[u] * t22 + t11 * dt22[u] - 2.0 * dt12[u] * t12) / (2.0 * d);
        const double dt = (dt11[u] + dt22[u] + 2.0 * dd) / (2.0 * t);
        const double inv_t = 1.0 / t;
        const double inv_t2 = inv_t * inv_t;
        h(2, 2 + u) = -inv_t2 * dt * (t11 + d) + inv_t * (dt11[u] + dd);
        h(3, 2 + u) = -inv_t2 * dt * t12 + inv_t * dt12[u];
        h(4, 2 + u) = -inv_t2 * dt * (t22 + d) + inv_t * (dt22[u] + dd);
    }
    return h;
}

/// The k-th equivalent parametrization: alpha + k pi/2 (mod 2 pi), with the
/// axes swapped for odd k. Same shape matrix for every k.
inline EllipseState equivalent_parametrization(const EllipseState& s, int k) {
    detail::require_finite(s, "equivalent_parametrization");
    if (k < 0 || k > 3) {
        throw invalid_input("equivalent_parametrization: k must be in {0, 1, 2, 3}, got " + std::to_string(k));
    }
    EllipseState out = s;
    out.alpha = wrap_two_pi(s.alpha + k * kHalfPi);
    if (k % 2 == 1) {
        std::swap(out.l, out.w);
    }
    return out;
}

inline std::array<EllipseState, 4> equivalent_parametrizations(const EllipseState& s) {
    return {equivalent_parametrization(s, 0), equivalent_parametrization(s, 1), equivalent_parametrization(s, 2),
            equivalent_parametrization(s, 3)};
}

/// Swaps the l/w rows and columns for odd k; identity for even k.
inline Mat5 permute_covariance(const Mat5& cov, int k) {
    if (k < 0 || k > 3) {
        throw invalid_input("permute_covariance: k must be in {0, 1, 2, 3}, got " + std::to_string(k));
    }
    Mat5 out = cov;
    if (k % 2 == 1) {
        out.row(3).swap(out.row(4));
        out.col(3).swap(out.col(4));
    }
    return out;
}

inline GaussianEstimate equivalent_estimate(const GaussianEstimate& e, int k) {
    return {equivalent_parametrization(e.mean, k), permute_covariance(e.cov, k)};
}

/// Picks the member of the estimate's equivalence class whose orientation
/// lies in [0, pi/2). All four equivalent inputs map to the same
/// representative, which makes sampling-based fusers parametrization
/// invariant sample-by-sample.
inline GaussianEstimate quadrant_representative(const GaussianEstimate& e) {
    detail::require_finite(e.mean, "quadrant_representative");
    double q = std::floor(e.mean.alpha / kHalfPi);
    double rest = e.mean.alpha - q * kHalfPi;
    if (rest >= kHalfPi) {
        rest = 0.0;
        q += 1.0;
    } else if (rest < 0.0) {
        rest = 0.0;
    }
    const auto k = static_cast<int>(((-static_cast<long long>(q)) % 4 + 4) % 4);
    GaussianEstimate out = equivalent_estimate(e, k);
    out.mean.alpha = rest;
    return out;
}

}  // namespace mmgw
