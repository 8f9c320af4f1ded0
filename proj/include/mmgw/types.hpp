#pragma once

#include <Eigen/Dense>

#include <algorithm>

#include <stdexcept>
#include <string>

namespace mmgw {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;
using Mat2 = Eigen::Matrix2d;

/// Absolute tolerance for positive-semidefiniteness checks.
inline constexpr double kPsdTol = 1e-12;
/// Tolerance for symmetry and round-trip checks.
inline constexpr double kSymTol = 1e-9;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kHalfPi = kPi / 2.0;
inline constexpr double kTwoPi = 2.0 * kPi;

// Error hierarchy. Everything derives from std::runtime_error or
// std::invalid_argument so callers can catch coarsely.
struct invalid_input : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct singularity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Elliptic extent: center, orientation (radians) and the two semi-axes.
///
/// Raw values may be any finite reals; only canonicalized states are
/// guaranteed to satisfy alpha in [0, pi) and l >= w >= 0.
struct EllipseState {
    double m_x = 0.0;
    double m_y = 0.0;
    double alpha = 0.0;
    double l = 0.0;
    double w = 0.0;

    [[nodiscard]] Vec5 vec() const {
        Vec5 v;
        v << m_x, m_y, alpha, l, w;
        return v;
    }

    static EllipseState from_vec(const Vec5& v) { return {v(0), v(1), v(2), v(3), v(4)}; }

    [[nodiscard]] bool finite() const { return vec().allFinite(); }

    friend bool operator==(const EllipseState&, const EllipseState&) = default;
};

/// Symmetric 2x2 extent matrix stored by its upper triangle.
struct ShapeMatrix {
    double x11 = 0.0;
    double x12 = 0.0;
    double x22 = 0.0;

    [[nodiscard]] Mat2 mat() const {
        Mat2 m;
        m << x11, x12, x12, x22;
        return m;
    }

    static ShapeMatrix from_mat(const Mat2& m) { return {m(0, 0), 0.5 * (m(0, 1) + m(1, 0)), m(1, 1)}; }

    [[nodiscard]] double trace() const { return x11 + x22; }

    friend bool operator==(const ShapeMatrix&, const ShapeMatrix&) = default;
};

/// Point in square-root space: center plus upper triangle of X^{1/2}.
struct TransformedState {
    double m_x = 0.0;
    double m_y = 0.0;
    double s11 = 0.0;
    double s12 = 0.0;
    double s22 = 0.0;

    [[nodiscard]] Vec5 vec() const {
        Vec5 v;
        v << m_x, m_y, s11, s12, s22;
        return v;
    }

    static TransformedState from_vec(const Vec5& v) { return {v(0), v(1), v(2), v(3), v(4)}; }

    [[nodiscard]] ShapeMatrix root() const { return {s11, s12, s22}; }

    friend bool operator==(const TransformedState&, const TransformedState&) = default;
};

struct GaussianEstimate {
    EllipseState mean;
    Mat5 cov = Mat5::Zero();
};

struct TransformedGaussian {
    TransformedState mean;
    Mat5 cov = Mat5::Zero();
};

namespace detail {

inline void require_finite(const EllipseState& s, const char* what) {
    if (!s.finite()) {
        throw invalid_input(std::string(what) + ": ellipse state has non-finite components");
    }
}

inline double max_abs(const Mat5& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace detail

/// Throws invalid_input unless `cov` is finite, symmetric and PSD within tolerance.
inline void validate_covariance(const Mat5& cov, const char* what = "covariance") {
    if (!cov.allFinite()) {
        throw invalid_input(std::string(what) + " has non-finite entries");
    }
    const double scale = std::max(1.0, detail::max_abs(cov));
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > kSymTol * scale) {
        throw invalid_input(std::string(what) + " is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat5> es(0.5 * (cov + cov.transpose()), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kPsdTol * scale) {
        throw invalid_input(std::string(what) + " is not positive semidefinite");
    }
}

inline void validate(const GaussianEstimate& e, const char* what = "estimate") {
    detail::require_finite(e.mean, what);
    validate_covariance(e.cov, what);
}

}  // namespace mmgw
