#include "mmgw/core.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mmgw;

namespace {

void expect_shape_eq(const ShapeMatrix& a, const ShapeMatrix& b, double tol) {
    EXPECT_NEAR(a.x11, b.x11, tol);
    EXPECT_NEAR(a.x12, b.x12, tol);
    EXPECT_NEAR(a.x22, b.x22, tol);
}

}  // namespace

TEST(ShapeMatrix, AxisAligned) {
    expect_shape_eq(shape_matrix({0, 0, 0, 4, 2}), {16, 0, 4}, 1e-12);
}

TEST(ShapeMatrix, QuarterTurnWithSwappedAxesIsSameMatrix) {
    expect_shape_eq(shape_matrix({0, 0, kHalfPi, 2, 4}), {16, 0, 4}, 1e-12);
}

TEST(ShapeMatrix, FortyFiveDegrees) {
    const ShapeMatrix x = shape_matrix({0, 0, kPi / 4, 4, 2});
    const Mat2 ref = oracle::rotated_shape({0, 0, kPi / 4, 4, 2});
    expect_shape_eq(x, {10, 6, 10}, 1e-12);
    EXPECT_NEAR(x.x12, ref(0, 1), 1e-12);
}

TEST(ShapeMatrix, SignFlipsOfAxesAreIrrelevant) {
    const EllipseState s{1, 2, 0.4, 3, 1.5};
    expect_shape_eq(shape_matrix({1, 2, 0.4, -3, 1.5}), shape_matrix(s), 1e-12);
    expect_shape_eq(shape_matrix({1, 2, 0.4, 3, -1.5}), shape_matrix(s), 1e-12);
}

TEST(ShapeMatrix, EigenvaluesAreSquaredAxes) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const EllipseState s = oracle::random_state(rng, 0.01, 100);
        Eigen::SelfAdjointEigenSolver<Mat2> es(shape_matrix(s).mat());
        const double big = std::max(s.l * s.l, s.w * s.w);
        const double small = std::min(s.l * s.l, s.w * s.w);
        EXPECT_NEAR(es.eigenvalues()(1), big, 1e-9 * std::max(1.0, big));
        EXPECT_NEAR(es.eigenvalues()(0), small, 1e-9 * std::max(1.0, big));
    }
}

TEST(ShapeMatrix, RejectsNonFinite) {
    EXPECT_THROW(shape_matrix({0, 0, std::nan(""), 1, 1}), invalid_input);
}

TEST(SqrtSpd, DiagonalAndIdentity) {
    expect_shape_eq(sqrt_spd({16, 0, 4}), {4, 0, 2}, 1e-14);
    expect_shape_eq(sqrt_spd({1, 0, 1}), {1, 0, 1}, 1e-14);
}

TEST(SqrtSpd, OffDiagonalMatchesEigenOracle) {
    // sqrt([[10, 6], [6, 10]]) = [[3, 1], [1, 3]]
    const ShapeMatrix s = sqrt_spd({10, 6, 10});
    expect_shape_eq(s, {3, 1, 3}, 1e-14);
    const Mat2 ref = oracle::sqrt_psd(ShapeMatrix{10, 6, 10}.mat());
    EXPECT_NEAR(s.x12, ref(0, 1), 1e-12);
}

TEST(SqrtSpd, ZeroAndRankOne) {
    expect_shape_eq(sqrt_spd({0, 0, 0}), {0, 0, 0}, 0);
    const ShapeMatrix x = shape_matrix({0, 0, 0.3, 2, 0});
    const Mat2 s = sqrt_spd(x).mat();
    EXPECT_LT((s * s - x.mat()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SqrtSpd, RejectsIndefinite) {
    EXPECT_THROW(sqrt_spd({1, 2, 1}), domain_error);
    EXPECT_THROW(sqrt_spd({-1, 0, 1}), domain_error);
}

TEST(SqrtSpd, SquaresBackOnRandomMatrices) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 1000; ++i) {
        const EllipseState st = oracle::random_state(rng, 0.01, 100);
        const ShapeMatrix x = shape_matrix(st);
        const Mat2 s = sqrt_spd(x).mat();
        ASSERT_LT((s * s - x.mat()).cwiseAbs().maxCoeff(), 1e-10) << "alpha=" << st.alpha << " l=" << st.l
                                                                  << " w=" << st.w;
        ASSERT_LT((s - oracle::sqrt_psd(x.mat())).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Transform, Examples) {
    EXPECT_EQ(transform({0, 1, 0, 4, 2}), (TransformedState{0, 1, 4, 0, 2}));
    const TransformedState t = transform({0, 1, kHalfPi, 2, 4});
    EXPECT_NEAR(t.s11, 4, 1e-14);
    EXPECT_NEAR(t.s12, 0, 1e-14);
    EXPECT_NEAR(t.s22, 2, 1e-14);
    const TransformedState r = transform({3, -2, kPi / 4, 4, 2});
    EXPECT_EQ(r.m_x, 3);
    EXPECT_EQ(r.m_y, -2);
    EXPECT_NEAR(r.s11, 3, 1e-14);
    EXPECT_NEAR(r.s12, 1, 1e-14);
    EXPECT_NEAR(r.s22, 3, 1e-14);
}

TEST(Transform, ConstantOnEquivalenceClasses) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 500; ++i) {
        const EllipseState s = oracle::random_state(rng, 0.01, 100);
        const Vec5 ref = transform(s).vec();
        for (const EllipseState& v : equivalent_parametrizations(s)) {
            ASSERT_LT((transform(v).vec() - ref).cwiseAbs().maxCoeff(), 1e-10);
        }
    }
}

TEST(InverseTransform, Examples) {
    EXPECT_EQ(inverse_transform({0, 1, 4, 0, 2}), (EllipseState{0, 1, 0, 4, 2}));
    // circle: orientation reported as 0
    EXPECT_EQ(inverse_transform({0, 1, 2, 0, 2}), (EllipseState{0, 1, 0, 2, 2}));
    const EllipseState e = inverse_transform(transform({3, -2, kPi / 4, 4, 2}));
    EXPECT_NEAR(e.m_x, 3, 1e-15);
    EXPECT_NEAR(e.m_y, -2, 1e-15);
    EXPECT_NEAR(e.alpha, kPi / 4, 1e-14);
    EXPECT_NEAR(e.l, 4, 1e-14);
    EXPECT_NEAR(e.w, 2, 1e-14);
}

TEST(InverseTransform, ClampsTinyNegativeEigenvalueAndRejectsIndefinite) {
    const EllipseState e = inverse_transform({0, 0, 1, 1 + 1e-14, 1});
    EXPECT_GE(e.w, 0.0);
    EXPECT_THROW(inverse_transform({0, 0, 1, 2, 1}), domain_error);
}

TEST(InverseTransform, RoundTripIsCanonicalization) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 1000; ++i) {
        const EllipseState s = oracle::random_state(rng, 0.01, 100);
        const EllipseState back = inverse_transform(transform(s));
        const EllipseState ref = oracle::canonical_from_shape(s);
        ASSERT_GE(back.alpha, 0.0);
        ASSERT_LT(back.alpha, kPi);
        ASSERT_GE(back.l, back.w);
        const Mat2 d = shape_matrix(back).mat() - shape_matrix(s).mat();
        ASSERT_LT(d.cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, s.l * s.l + s.w * s.w));
        ASSERT_NEAR(back.l, ref.l, 1e-9 * std::max(1.0, ref.l));
        ASSERT_NEAR(back.w, ref.w, 1e-9 * std::max(1.0, ref.l));
        if (std::abs(s.l - s.w) > 1e-3) {
            ASSERT_LT(oracle::angle_gap_mod_pi(back.alpha, ref.alpha), 1e-9);
        }
        // and T o T^-1 is the identity on valid points
        ASSERT_LT((transform(back).vec() - transform(s).vec()).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Canonicalize, KeepsCircleOrientationAndFixesAxes) {
    const EllipseState c = canonicalize({0, 0, kPi / 4, 3, 3});
    EXPECT_DOUBLE_EQ(c.alpha, kPi / 4);
    const EllipseState s = canonicalize({1, 2, -0.1, -1, 3});
    EXPECT_DOUBLE_EQ(s.l, 3);
    EXPECT_DOUBLE_EQ(s.w, 1);
    EXPECT_NEAR(s.alpha, kHalfPi - 0.1, 1e-15);
}

TEST(Jacobian, AxisAlignedValues) {
    const Mat5 h = jacobian({5, -1, 0, 4, 2});
    EXPECT_NEAR(h(2, 3), 1, 1e-14);  // dh3/dl
    EXPECT_NEAR(h(2, 4), 0, 1e-14);  // dh3/dw
    EXPECT_NEAR(h(4, 4), 1, 1e-14);  // dh5/dw
    EXPECT_NEAR(h(3, 2), 2, 1e-14);  // dh4/dalpha = l - w
    EXPECT_NEAR(h(2, 2), 0, 1e-14);  // dh3/dalpha
}

TEST(Jacobian, CenterBlockPassesThrough) {
    const Mat5 h = jacobian({1, 2, 0.7, 3, 1});
    Vec5 r0;
    r0 << 1, 0, 0, 0, 0;
    Vec5 r1;
    r1 << 0, 1, 0, 0, 0;
    EXPECT_EQ(Vec5(h.row(0).transpose()), r0);
    EXPECT_EQ(Vec5(h.row(1).transpose()), r1);
    EXPECT_TRUE((h.block<3, 2>(2, 0).isZero(0.0)));
}

TEST(Jacobian, MatchesFiniteDifferencesAtFortyFiveDegrees) {
    const EllipseState s{0, 0, kPi / 4, 4, 2};
    const Mat5 diff = jacobian(s) - oracle::fd_jacobian(s);
    EXPECT_LT(diff.cwiseAbs().maxCoeff(), 1e-7);
}

TEST(Jacobian, MatchesFiniteDifferencesOnRandomStates) {
    std::mt19937_64 rng(13);
    int checked = 0;
    while (checked < 100) {
        EllipseState s = oracle::random_state(rng, 0.1, 20);
        if (std::abs(s.l - s.w) <= 0.1) continue;
        if (checked % 3 == 0) s.w = -s.w;  // negative draws are valid inputs
        const Mat5 a = jacobian(s);
        const Mat5 f = oracle::fd_jacobian(s);
        for (int i = 0; i < 5; ++i) {
            for (int j = 0; j < 5; ++j) {
                ASSERT_LT(std::abs(a(i, j) - f(i, j)) / std::max(std::abs(f(i, j)), 1.0), 1e-5)
                    << "entry (" << i << "," << j << ")";
            }
        }
        ++checked;
    }
}

TEST(Jacobian, SingularInputs) {
    EXPECT_THROW(jacobian({0, 0, 0.2, 2, 2}), singularity_error);
    EXPECT_THROW(jacobian({0, 0, 0.2, 2, 0}), singularity_error);
}

TEST(Equivalence, FourVariantsOfAxisAlignedEllipse) {
    const auto v = equivalent_parametrizations({0, 0, 0, 4, 2});
    EXPECT_EQ(v[0], (EllipseState{0, 0, 0, 4, 2}));
    EXPECT_EQ(v[1], (EllipseState{0, 0, kHalfPi, 2, 4}));
    EXPECT_EQ(v[2], (EllipseState{0, 0, kPi, 4, 2}));
    EXPECT_NEAR(v[3].alpha, 3 * kHalfPi, 1e-15);
    EXPECT_EQ(v[3].l, 2);
    EXPECT_EQ(v[3].w, 4);
}

TEST(Equivalence, OddKSwapsAxes) {
    const EllipseState v = equivalent_parametrization({1, 2, kPi / 3, 5, 1}, 1);
    EXPECT_NEAR(v.alpha, kPi / 3 + kHalfPi, 1e-15);
    EXPECT_EQ(v.l, 1);
    EXPECT_EQ(v.w, 5);
    EXPECT_THROW(equivalent_parametrization({}, 4), invalid_input);
}

TEST(Equivalence, SameShapeMatrix) {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 200; ++i) {
        const EllipseState s = oracle::random_state(rng, 0.01, 10);
        const ShapeMatrix ref = shape_matrix(s);
        for (const auto& v : equivalent_parametrizations(s)) expect_shape_eq(shape_matrix(v), ref, 1e-12);
    }
}

TEST(PermuteCovariance, Rules) {
    Vec5 d;
    d << 1, 2, 3, 4, 5;
    Vec5 swapped;
    swapped << 1, 2, 3, 5, 4;
    EXPECT_EQ(permute_covariance(d.asDiagonal(), 1), Mat5(swapped.asDiagonal()));

    std::mt19937_64 rng(19);
    const Mat5 m = oracle::random_spd(rng, 0.1, 3.0);
    EXPECT_EQ(permute_covariance(m, 2), m);
    EXPECT_EQ(permute_covariance(m, 0), m);

    const Mat5 p = permute_covariance(m, 3);
    EXPECT_EQ(p, p.transpose());
    Eigen::SelfAdjointEigenSolver<Mat5> a(m, Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Mat5> b(p, Eigen::EigenvaluesOnly);
    EXPECT_LT((a.eigenvalues() - b.eigenvalues()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(p(3, 3), m(4, 4));
    EXPECT_EQ(p(0, 3), m(0, 4));
    EXPECT_THROW(permute_covariance(m, -1), invalid_input);
}

TEST(QuadrantRepresentative, EquivalentInputsShareRepresentative) {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 200; ++i) {
        GaussianEstimate e{oracle::random_state(rng, 0.5, 5), oracle::random_spd(rng, 0.01, 1)};
        e.mean.alpha += 2 * kTwoPi * (i % 3 - 1);
        const GaussianEstimate ref = quadrant_representative(e);
        EXPECT_GE(ref.mean.alpha, 0.0);
        EXPECT_LT(ref.mean.alpha, kHalfPi);
        for (int k = 0; k < 4; ++k) {
            const GaussianEstimate r = quadrant_representative(equivalent_estimate(e, k));
            ASSERT_LT((r.mean.vec() - ref.mean.vec()).cwiseAbs().maxCoeff(), 1e-12);
            ASSERT_EQ(r.cov, ref.cov);
        }
    }
}
