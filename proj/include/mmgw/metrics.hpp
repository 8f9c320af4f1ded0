#pragma once

#include "mmgw/core.hpp"

#include <cmath>
#include <span>

namespace mmgw {

namespace detail {

inline double squared_center_distance(const EllipseState& a, const EllipseState& b) {
    const double dx = a.m_x - b.m_x;
    const double dy = a.m_y - b.m_y;
    return dx * dx + dy * dy;
}

inline double frobenius2(const ShapeMatrix& a, const ShapeMatrix& b) {
    const double d11 = a.x11 - b.x11;
    const double d12 = a.x12 - b.x12;
    const double d22 = a.x22 - b.x22;
    return d11 * d11 + 2.0 * d12 * d12 + d22 * d22;
}

}  // namespace detail

/// Exact Gaussian Wasserstein distance (squared; meters^2):
///   |n - m|^2 + Tr{Z + X - 2 (Z^{1/2} X Z^{1/2})^{1/2}}.
///
/// With A = Z^{1/2}, B = X^{1/2} and C = A B, the trace term of the 2x2 case
/// equals |A - B|_F^2 - 2 (|C|_* - tr C), and |C|_*^2 - (tr C)^2 collapses to
/// the squared commutator entry (C_12 - C_21)^2. Evaluating it in that form
/// avoids the catastrophic cancellation of the textbook expression, so equal
/// shapes give exactly zero and commuting shapes give exactly the Frobenius
/// form.
inline double gw_exact(const EllipseState& a, const EllipseState& b) {
    const ShapeMatrix ra = sqrt_spd(shape_matrix(a));
    const ShapeMatrix rb = sqrt_spd(shape_matrix(b));

    const double commutator = rb.x12 * (ra.x11 - ra.x22) - ra.x12 * (rb.x11 - rb.x22);
    double correction = 0.0;
    if (commutator != 0.0) {
        const Mat2 c = ra.mat() * rb.mat();
        const double det_c = std::max(detail::det2(ra.x11, ra.x12, ra.x12, ra.x22), 0.0) *
                             std::max(detail::det2(rb.x11, rb.x12, rb.x12, rb.x22), 0.0);
        // Grouped so that swapping the arguments (C -> C^T) is bit-identical.
        const double frob2 = (c(0, 0) * c(0, 0) + c(1, 1) * c(1, 1)) + (c(0, 1) * c(0, 1) + c(1, 0) * c(1, 0));
        const double nuclear = std::sqrt(frob2 + 2.0 * det_c);
        const double denom = nuclear + c.trace();
        if (denom > 0.0) {
            correction = 2.0 * commutator * commutator / denom;
        }
    }
    const double value = detail::squared_center_distance(a, b) + detail::frobenius2(ra, rb) - correction;
    return std::max(value, 0.0);
}

/// |T(a) - T(b)|^2, the square-root-space distance the MMGW estimator
/// minimizes. The off-diagonal root entry is counted once.
inline double gw_approx(const EllipseState& a, const EllipseState& b) {
    return std::max((transform(a).vec() - transform(b).vec()).squaredNorm(), 0.0);
}

/// |n - m|^2 + |Z^{1/2} - X^{1/2}|_F^2 (off-diagonal counted twice).
inline double gw_approx_frobenius(const EllipseState& a, const EllipseState& b) {
    const ShapeMatrix ra = sqrt_spd(shape_matrix(a));
    const ShapeMatrix rb = sqrt_spd(shape_matrix(b));
    return detail::squared_center_distance(a, b) + detail::frobenius2(ra, rb);
}

/// Root mean GW: sqrt(mean of the per-run squared distances).
inline double aggregate_rmgw(std::span<const double> per_run_gw) {
    if (per_run_gw.empty()) {
        throw invalid_input("aggregate_rmgw: empty list");
    }
    double sum = 0.0;
    for (double v : per_run_gw) sum += v;
    return std::sqrt(sum / static_cast<double>(per_run_gw.size()));
}

/// Plain mean GW, for sensitivity checks against the root-mean reading.
inline double aggregate_mean_gw(std::span<const double> per_run_gw) {
    if (per_run_gw.empty()) {
        throw invalid_input("aggregate_mean_gw: empty list");
    }
    double sum = 0.0;
    for (double v : per_run_gw) sum += v;
    return sum / static_cast<double>(per_run_gw.size());
}

}  // namespace mmgw
