#include <qflow/convex_body.hpp>

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

using namespace qflow;

namespace {

double max_rel(const std::vector<double>& a, const std::vector<double>& b)
{
    double e = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        e = std::max(e, std::abs(a[i] - b[i]) / std::abs(b[i]));
    return e;
}

SupportField shifted_disk(int N, double q)
{
    return SupportField::from_function(Backend::circle, N, [q](double t) { return 1.0 + q * std::cos(t); });
}

} // namespace

// --- closed-form radii oracles ---------------------------------------------

TEST(RadiiOracle, EllipseRadiusOfCurvature)
{
    const double a = 2, b = 1;
    const auto e = make_body(shape::Ellipse{a, b}, 256);
    const auto rf = radii(e);
    std::vector<double> got, want;
    for (int j = 0; j < e.size(); ++j) {
        got.push_back(rf.at(j)[0]);
        want.push_back(a * a * b * b / std::pow(e[j], 3));
    }
    EXPECT_LE(max_rel(got, want), 1e-10);
}

TEST(RadiiOracle, EllipsoidOfRevolutionPrincipalRadii)
{
    const double a = 1, c = 1.6;
    const auto body = make_body(shape::EllipsoidRev{a, c}, 256);
    const auto rf = radii(body);
    double e1 = 0, e2 = 0, pole = 0;
    for (int j = 0; j < body.size(); ++j) {
        const double u = body[j];
        e1 = std::max(e1, std::abs(rf.at(j)[0] - a * a * c * c / (u * u * u)) * u * u * u / (a * a * c * c));
        const double r2 = a * a / u;
        const double err = std::abs(rf.at(j)[1] - r2) / r2;
        if (j < 2 || j >= body.size() - 2)
            pole = std::max(pole, err);
        else
            e2 = std::max(e2, err);
    }
    EXPECT_LE(e1, 1e-6);
    EXPECT_LE(e2, 1e-6);
    EXPECT_LE(pole, 1e-3); // umbilic blend at the axis
}

TEST(RadiiOracle, ReductionMatchesDirectPerNodeEvaluation)
{
    const auto body = make_body(shape::RandomTrig{3, 4, 0.2, Backend::axisymmetric}, 128);
    const auto rf = radii(body);
    for (int k = 0; k <= 2; ++k) {
        std::vector<double> f(body.size());
        for (int j = 0; j < body.size(); ++j) {
            const auto r = rf.at(j);
            const std::vector<double> lam{1 / r[0], 1 / r[1]};
            const double ek = k == 0 ? 1.0 : elem_sym(lam, k);
            f[j] = ek * r[0] * r[1];
        }
        const double direct = integrate(body.grid(), f);
        EXPECT_NEAR(curvature_integral(body, rf, k), direct, 1e-12 * std::abs(direct));
    }
}

// --- construction ------------------------------------------------------------

TEST(MakeBody, Examples)
{
    const auto s = make_body(shape::Sphere{1.0, Backend::circle}, 64);
    const auto rs = radii(s);
    for (int j = 0; j < 64; ++j) {
        EXPECT_EQ(s[j], 1.0);
        EXPECT_NEAR(rs.at(j)[0], 1.0, 1e-14);
    }
    const auto sa = make_body(shape::Sphere{1.0, Backend::axisymmetric}, 64);
    const auto ra = radii(sa);
    for (double r : ra.flat())
        EXPECT_NEAR(r, 1.0, 1e-12);

    const auto e = make_body(shape::Ellipse{2, 1}, 64);
    EXPECT_DOUBLE_EQ(e[0], 2.0);
    EXPECT_NEAR(e[16], 1.0, 1e-15);

    const auto rt = make_body(shape::RandomTrig{7, 4, 0.1, Backend::circle}, 128);
    EXPECT_GE(radii(rt).margin(), 0.1);
    const auto rt2 = make_body(shape::RandomTrig{7, 4, 0.1, Backend::axisymmetric}, 128);
    EXPECT_GE(radii(rt2).margin(), 0.1);
}

TEST(MakeBody, RandomTrigDeterministic)
{
    const auto a = make_body(shape::RandomTrig{42, 5, 0.2, Backend::circle}, 128);
    const auto b = make_body(shape::RandomTrig{42, 5, 0.2, Backend::circle}, 128);
    for (int j = 0; j < 128; ++j)
        EXPECT_EQ(a[j], b[j]);
}

TEST(MakeBodyErrors, Rejections)
{
    EXPECT_THROW(make_body(shape::RandomTrig{1, 4, 2.0, Backend::circle}, 64), ConstructionError);
    EXPECT_THROW(make_body(shape::Ellipse{-1, 1}, 64), ConstructionError);
    EXPECT_THROW(make_body(shape::Sphere{0.0, Backend::circle}, 64), ConstructionError);
    EXPECT_THROW(make_body(shape::Ellipse{2, 1}, 63), DomainError);
    EXPECT_THROW(make_body(shape::Ellipse{2, 1}, 8), DomainError);
    EXPECT_THROW(SupportField(Backend::circle, std::vector<double>(64, -1.0)), DomainError);
}

TEST(Radii, ConvexityLossCarriesNode)
{
    const auto body = SupportField::from_function(Backend::circle, 64, [](double t) { return 1.0 + 0.5 * std::cos(3 * t); });
    try {
        radii(body);
        FAIL() << "expected convexity loss";
    } catch (const ConvexityLoss& e) {
        // r = 1 - 4 cos(3t): most negative at t = 0
        EXPECT_EQ(e.node(), 0);
        EXPECT_LT(e.margin(), 0.0);
    }
}

// --- quadrature functionals ----------------------------------------------------

TEST(Functionals, ClosedForms)
{
    const auto c = make_body(shape::Sphere{1.0, Backend::circle}, 128);
    EXPECT_NEAR(area(c), 2 * M_PI, 1e-10 * 2 * M_PI);
    EXPECT_NEAR(volume(c), M_PI, 1e-10 * M_PI);
    EXPECT_NEAR(curvature_integral(c, 1), 2 * M_PI, 1e-12);

    const auto e = make_body(shape::Ellipse{2, 1}, 128);
    EXPECT_NEAR(volume(e), 2 * M_PI, 1e-12);
    EXPECT_NEAR(curvature_integral(e, 1), 2 * M_PI, 1e-10);
    EXPECT_NEAR(area(e), 4 * 2 * std::comp_ellint_2(std::sqrt(0.75)), 1e-12);

    const auto s = make_body(shape::Sphere{1.0, Backend::axisymmetric}, 256);
    EXPECT_NEAR(area(s), 4 * M_PI, 1e-6 * 4 * M_PI);
    EXPECT_NEAR(volume(s), 4 * M_PI / 3, 1e-6 * 4 * M_PI / 3);
    EXPECT_NEAR(curvature_integral(s, 2), 4 * M_PI, 1e-6 * 4 * M_PI);
}

TEST(Functionals, SpectralOnCircleAtLeastSecondOrderOnAxis)
{
    const double P = 4 * 2 * std::comp_ellint_2(std::sqrt(0.75));
    const double e64 = std::abs(area(make_body(shape::Ellipse{2, 1}, 64)) - P);
    const double e128 = std::abs(area(make_body(shape::Ellipse{2, 1}, 128)) - P);
    EXPECT_TRUE(e128 <= e64 / 16 || e128 < 1e-13);

    const double V = 4 * M_PI / 3 * 1.6;
    double prev = 0;
    for (int N : {64, 128, 256}) {
        const double err = std::abs(volume(make_body(shape::EllipsoidRev{1, 1.6}, N)) - V);
        if (prev > 0)
            EXPECT_GE(std::log2(prev / err), 2.0);
        prev = err;
    }
}

TEST(MixedVolumes, BallsAndHomogeneity)
{
    for (Backend b : {Backend::circle, Backend::axisymmetric}) {
        const int n = dimension(b);
        const double kappa = unit_ball_volume(n);
        for (double R : {1.0, 0.5, 3.0}) {
            const auto ball = make_body(shape::Sphere{R, b}, 256);
            const auto V = mixed_volumes(ball);
            ASSERT_EQ(static_cast<int>(V.size()), n + 2);
            for (int i = 0; i <= n + 1; ++i)
                EXPECT_NEAR(V[i], kappa * std::pow(R, i), 1e-12 * kappa * std::pow(R, i));
        }
    }
}

TEST(MixedVolumes, VolumeAndBoundaryNormalization)
{
    const auto e = make_body(shape::RandomTrig{5, 4, 0.2, Backend::axisymmetric}, 128);
    const auto rf = radii(e);
    const auto V = mixed_volumes(e, rf);
    EXPECT_NEAR(V[3], volume(e, rf), 1e-12 * V[3]);
    // V_n = A/(n+1), the normalization that makes the Steiner polynomial hold
    EXPECT_NEAR(3 * V[2], area(e, rf), 1e-12 * V[2]);
    EXPECT_NEAR(V[0], 4 * M_PI / 3, 1e-6);
}

TEST(MixedVolumes, SteinerCrossCheckOnEllipse)
{
    const auto e = make_body(shape::Ellipse{2, 1}, 256);
    const double L = area(e);
    for (double t : {0.1, 1.0, 3.0}) {
        EXPECT_NEAR(steiner_volume(e, t), 2 * M_PI + L * t + M_PI * t * t, 1e-8);
        EXPECT_NEAR(steiner_volume(e, t), steiner_polynomial(mixed_volumes(e), t), 1e-8);
    }
}

TEST(IsoRatio, BallValueScaleInvarianceStrictness)
{
    EXPECT_NEAR(iso_ratio(make_body(shape::Sphere{2.0, Backend::circle}, 64), 1), M_PI, 1e-12);
    const auto e = make_body(shape::Ellipse{2, 1}, 256);
    const double I = iso_ratio(e, 1);
    EXPECT_GT(I, M_PI + 1e-3);
    for (double c : {0.5, 2.0}) {
        std::vector<double> u(e.values().begin(), e.values().end());
        for (auto& x : u)
            x *= c;
        EXPECT_NEAR(iso_ratio(e.with_values(u), 1), I, 1e-10 * I);
        EXPECT_NEAR(af_deficit(e.with_values(u), 1, 2), af_deficit(e, 1, 2), 1e-10);
    }
    const auto ball3 = make_body(shape::Sphere{1.0, Backend::axisymmetric}, 128);
    EXPECT_NEAR(iso_ratio(ball3, 1), std::pow(4 * M_PI / 3, 1), 1e-10);
    EXPECT_NEAR(iso_ratio(ball3, 2), std::pow(4 * M_PI / 3, 2), 1e-10);
    EXPECT_THROW(iso_ratio(e, 2), DomainError);
}

TEST(RadiiBounds, Examples)
{
    const auto s = make_body(shape::Sphere{1.3, Backend::axisymmetric}, 64);
    const auto bs = radii_bounds(s);
    EXPECT_NEAR(bs.inner, 1.3, 1e-12);
    EXPECT_NEAR(bs.outer, 1.3, 1e-12);

    const auto e = radii_bounds(make_body(shape::Ellipse{2, 1}, 128));
    EXPECT_NEAR(e.inner, 1.0, 1e-12);
    EXPECT_NEAR(e.outer, 2.0, 1e-12);

    const auto d = radii_bounds(shifted_disk(128, 0.3));
    EXPECT_NEAR(d.inner, 1.0, 1e-12);
    EXPECT_NEAR(d.outer, 1.0, 1e-12);
    EXPECT_NEAR(d.outer_center[0], 0.3, 1e-12);
    EXPECT_NEAR(d.outer_center[1], 0.0, 1e-12);
}

TEST(RadiiBounds, OrderedOnRandomBodies)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        for (Backend b : {Backend::circle, Backend::axisymmetric}) {
            const auto body = make_body(shape::RandomTrig{seed, 4, 0.1, b}, 64);
            const auto r = radii_bounds(body);
            EXPECT_GT(r.inner, 0.0);
            EXPECT_LE(r.inner, r.outer);
        }
    }
}

TEST(Minkowski, Identities)
{
    EXPECT_NEAR(minkowski_residual(make_body(shape::Sphere{1.0, Backend::circle}, 64), 0), 0.0, 1e-13);
    const auto rt = make_body(shape::RandomTrig{9, 4, 0.1, Backend::circle}, 256);
    EXPECT_LE(std::abs(minkowski_residual(rt, 0)), 1e-10 * area(rt));
    const auto s = make_body(shape::Sphere{1.0, Backend::axisymmetric}, 256);
    EXPECT_NEAR(minkowski_residual(s, 1), 0.0, 1e-6);
    EXPECT_NEAR(minkowski_residual(s, 0), 0.0, 1e-6);
    EXPECT_THROW(minkowski_residual(s, 2), DomainError);
}

TEST(Ros, DeficitSignsAndEquality)
{
    EXPECT_NEAR(ros_deficit(make_body(shape::Sphere{1.0, Backend::axisymmetric}, 256)), 0.0, 1e-6);
    for (double R : {0.5, 2.0})
        EXPECT_NEAR(ros_deficit(make_body(shape::Sphere{R, Backend::axisymmetric}, 256)), 0.0, 1e-6);
    EXPECT_GT(ros_deficit(make_body(shape::EllipsoidRev{1, 1.5}, 256)), 1e-3);
}

TEST(AlexandrovFenchel, DeficitSignsAndEquality)
{
    EXPECT_NEAR(af_deficit(make_body(shape::Sphere{1.0, Backend::circle}, 64), 1, 2), 0.0, 1e-12);
    EXPECT_NEAR(af_deficit(make_body(shape::Sphere{3.0, Backend::circle}, 64), 1, 2), 0.0, 1e-12);
    const auto ball = make_body(shape::Sphere{1.0, Backend::axisymmetric}, 128);
    for (auto [m, l] : std::array<std::pair<int, int>, 3>{{{1, 2}, {1, 3}, {2, 3}}})
        EXPECT_NEAR(af_deficit(ball, m, l), 0.0, 1e-8);
    EXPECT_GT(af_deficit(make_body(shape::Ellipse{2, 1}, 128), 1, 2), 1e-3);
    EXPECT_THROW(af_deficit(ball, 2, 2), DomainError);
    EXPECT_THROW(af_deficit(ball, 0, 2), DomainError);
    EXPECT_THROW(af_deficit(ball, 1, 4), DomainError);
}

TEST(Recenter, ShiftRecoveryAndInvariance)
{
    const auto d = shifted_disk(128, 0.3);
    const auto r = recenter(d);
    for (int j = 0; j < r.size(); ++j)
        EXPECT_NEAR(r[j], 1.0, 1e-12);
    EXPECT_NEAR(r.origin_offset()[0], 0.3, 1e-12);

    const auto body = make_body(shape::RandomTrig{4, 4, 0.1, Backend::circle}, 128);
    const auto moved = translate_origin(body, {0.1, -0.05, 0.0});
    const auto back = recenter(moved);
    EXPECT_NEAR(volume(back), volume(body), 1e-12 * volume(body));
    EXPECT_NEAR(area(back), area(body), 1e-12 * area(body));
    EXPECT_LE(std::abs(minkowski_residual(back, 0)), 1e-10 * area(back));

    const auto ax = make_body(shape::EllipsoidRev{1, 1.6}, 128);
    const auto axm = translate_origin(ax, {0.0, 0.0, 0.2});
    // fourth-order differences on the meridian: invariant only to truncation error
    EXPECT_NEAR(volume(axm), volume(ax), 1e-8 * volume(ax));
    EXPECT_NEAR(radii_bounds(axm).outer_center[2], -0.2, 1e-12);
}

TEST(Hausdorff, BestBall)
{
    EXPECT_NEAR(hausdorff_to_ball(make_body(shape::Sphere{2.0, Backend::circle}, 64)), 0.0, 1e-14);
    const auto fit = fit_ball(make_body(shape::Ellipse{2, 1}, 128));
    EXPECT_NEAR(fit.distance, 0.5, 1e-12);
    EXPECT_NEAR(fit.radius, 1.5, 1e-12);
    EXPECT_NEAR(hausdorff_to_ball(shifted_disk(128, 0.3)), 0.0, 1e-12);
}

TEST(Reconstruct, CircleAndMeridian)
{
    const auto e = make_body(shape::Ellipse{2, 1}, 64);
    for (const auto& p : reconstruct(e))
        EXPECT_NEAR(p[0] * p[0] / 4 + p[1] * p[1], 1.0, 1e-12);
    const auto s = make_body(shape::EllipsoidRev{1, 1.6}, 128);
    for (const auto& p : reconstruct(s))
        EXPECT_NEAR(p[0] * p[0] + p[1] * p[1] / (1.6 * 1.6), 1.0, 1e-5);
}
