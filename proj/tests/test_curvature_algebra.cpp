#include <qflow/curvature_algebra.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace qflow;

namespace {

// Sum over all k-subsets, the definition itself.
double brute_elem_sym(const std::vector<double>& x, int k)
{
    const int n = static_cast<int>(x.size());
    double s = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != k)
            continue;
        double p = 1.0;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i))
                p *= x[i];
        s += p;
    }
    return s;
}

std::vector<double> random_cone(std::mt19937_64& rng, int n, double lo, double hi)
{
    std::uniform_real_distribution<double> d(std::log(lo), std::log(hi));
    std::vector<double> x(n);
    for (auto& v : x)
        v = std::exp(d(rng));
    return x;
}

} // namespace

TEST(ElemSymOracle, MatchesSubsetEnumeration)
{
    std::mt19937_64 rng(11);
    for (int n = 1; n <= 8; ++n) {
        for (int trial = 0; trial < 50; ++trial) {
            const auto x = random_cone(rng, n, 0.1, 10.0);
            for (int k = 0; k <= n; ++k) {
                const double ref = brute_elem_sym(x, k);
                EXPECT_NEAR(elem_sym(x, k), ref, 1e-13 * ref) << "n=" << n << " k=" << k;
            }
        }
    }
}

TEST(ElemSymOracle, ReciprocalSubstitution)
{
    std::mt19937_64 rng(12);
    for (int n = 1; n <= 6; ++n) {
        for (int k = 1; k <= n; ++k) {
            for (int trial = 0; trial < 200; ++trial) {
                const auto r = random_cone(rng, n, 0.1, 10.0);
                std::vector<double> lam(n);
                for (int i = 0; i < n; ++i)
                    lam[i] = 1.0 / r[i];
                for (double a : {0.5, 1.0, 2.0}) {
                    const SpeedLaw law(n, k, a);
                    const double s = speed(Curvatures{lam}, law);
                    EXPECT_NEAR(speed_from_radii(Radii{r}, law), s, 1e-12 * s);
                }
            }
        }
    }
}

TEST(ElemSym, WorkedExamples)
{
    const std::vector<double> l{1, 2, 3};
    EXPECT_DOUBLE_EQ(elem_sym(l, 0), 1.0);
    EXPECT_DOUBLE_EQ(elem_sym(l, 1), 6.0);
    EXPECT_DOUBLE_EQ(elem_sym(l, 2), 11.0);
    EXPECT_DOUBLE_EQ(elem_sym(l, 3), 6.0);
    EXPECT_DOUBLE_EQ(elem_sym(l, 4), 0.0);
    EXPECT_DOUBLE_EQ(norm_sym(l, 2), 11.0 / 3.0);

    std::vector<double> all(4);
    elem_sym_all(l, all);
    EXPECT_EQ(all, (std::vector<double>{1, 6, 11, 6}));
}

TEST(ElemSym, PermutationAndHomogeneity)
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        auto x = random_cone(rng, 5, 1e-2, 1e2);
        const double e3 = elem_sym(x, 3);
        std::shuffle(x.begin(), x.end(), rng);
        EXPECT_NEAR(elem_sym(x, 3), e3, 1e-13 * e3);
        std::vector<double> cx(x);
        for (auto& v : cx)
            v *= 2.5;
        EXPECT_NEAR(elem_sym(cx, 3), std::pow(2.5, 3) * e3, 1e-12 * e3);
    }
}

TEST(Speed, WorkedExamples)
{
    const std::vector<double> l{1, 2, 3};
    EXPECT_DOUBLE_EQ(speed(Curvatures{l}, SpeedLaw(3, 2, 1.0)), 11.0);
    EXPECT_NEAR(speed(Curvatures{l}, SpeedLaw(3, 2, 0.5)), std::sqrt(11.0), 1e-15);

    const std::vector<double> r{1.0, 0.5, 1.0 / 3.0};
    EXPECT_NEAR(speed_from_radii(Radii{r}, SpeedLaw(3, 2, 1.0)), 11.0, 1e-13);
}

TEST(Speed, SphereDiagonal)
{
    for (int n = 1; n <= 6; ++n) {
        for (int k = 1; k <= n; ++k) {
            for (double a : {0.5, 1.0, 2.0}) {
                const double R = 1.7;
                const SpeedLaw law(n, k, a);
                const std::vector<double> lam(n, 1.0 / R), rad(n, R);
                const double expect = std::pow(binomial(n, k), a) * std::pow(R, -a * k);
                EXPECT_NEAR(speed(Curvatures{lam}, law), expect, 1e-13 * expect);
                EXPECT_NEAR(speed_from_radii(Radii{rad}, law), expect, 1e-13 * expect);
                const double p = R * std::pow(binomial(n, k), -1.0 / k);
                EXPECT_NEAR(phi(Radii{rad}, law), p, 1e-13 * p);
            }
        }
    }
}

TEST(SpeedGrad, WorkedExamples)
{
    const std::vector<double> ones{1, 1};
    EXPECT_EQ(speed_grad(Curvatures{ones}, SpeedLaw(2, 1, 1.0)), (std::vector<double>{1, 1}));
    const std::vector<double> l{1, 2, 3};
    EXPECT_EQ(speed_grad(Curvatures{l}, SpeedLaw(3, 2, 1.0)), (std::vector<double>{5, 4, 3}));
}

TEST(SpeedGrad, CentralDifferencesConvergeAtSecondOrder)
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto l = random_cone(rng, 4, 0.2, 5.0);
        const SpeedLaw law(4, 3, 1.7);
        const auto g = speed_grad(Curvatures{l}, law);
        for (int i = 0; i < 4; ++i) {
            auto fd = [&](double h) {
                auto lp = l, lm = l;
                lp[i] += h;
                lm[i] -= h;
                return (speed(Curvatures{lp}, law) - speed(Curvatures{lm}, law)) / (2 * h);
            };
            const double e1 = std::abs(fd(1e-2) - g[i]);
            const double e2 = std::abs(fd(5e-3) - g[i]);
            EXPECT_LT(e1, 1e-3 * g[i]);
            if (e1 > 1e-11 * g[i])
                EXPECT_GT(e1 / e2, 3.5) << "not second order";
        }
    }
}

TEST(SpeedGrad, PositiveAndEuler)
{
    std::mt19937_64 rng(6);
    for (int n = 1; n <= 6; ++n) {
        for (int k = 1; k <= n; ++k) {
            for (double a : {0.5, 1.0, 2.0}) {
                const SpeedLaw law(n, k, a);
                const auto l = random_cone(rng, n, 1e-3, 1e3);
                const auto g = speed_grad(Curvatures{l}, law);
                double dot = 0;
                for (int i = 0; i < n; ++i) {
                    EXPECT_GT(g[i], 0.0);
                    dot += g[i] * l[i];
                }
                const double s = speed(Curvatures{l}, law);
                EXPECT_NEAR(dot, a * k * s, 1e-12 * a * k * s);
            }
        }
    }
}

TEST(Phi, HomogeneityAndMidpointConcavity)
{
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> pick(1, 6);
    for (int trial = 0; trial < 10000; ++trial) {
        const int n = pick(rng);
        const int k = std::uniform_int_distribution<int>(1, n)(rng);
        const SpeedLaw law(n, k, 1.3);
        const auto r = random_cone(rng, n, 0.1, 10.0);
        const auto s = random_cone(rng, n, 0.1, 10.0);
        std::vector<double> mid(n), twice(n);
        for (int i = 0; i < n; ++i) {
            mid[i] = 0.5 * (r[i] + s[i]);
            twice[i] = 2 * r[i];
        }
        const double pr = phi(Radii{r}, law), ps = phi(Radii{s}, law);
        EXPECT_NEAR(phi(Radii{twice}, law), 2 * pr, 1e-13 * pr);
        EXPECT_GE(phi(Radii{mid}, law), 0.5 * (pr + ps) - 1e-13 * (pr + ps));
    }
}

TEST(IdentityResiduals, WorkedExamples)
{
    const std::vector<double> diag(4, 1.0);
    const auto d = identity_residuals(Curvatures{diag}, SpeedLaw(4, 2, 1.0));
    EXPECT_NEAR(d.max(), 0.0, 1e-15);

    // sum dE_2/dl_i l_i^2 = 5 + 16 + 27 = 48 = H E_2 - 3 E_3 = 66 - 18
    const std::vector<double> l{1, 2, 3};
    const auto r = identity_residuals(Curvatures{l}, SpeedLaw(3, 2, 1.0));
    EXPECT_EQ(r.trace, 0.0);
    EXPECT_EQ(r.trace_lower, 0.0);
    EXPECT_EQ(r.maclaurin, 0.0);
}

TEST(IdentityResiduals, RandomConeWideSpread)
{
    std::mt19937_64 rng(9);
    for (int n = 1; n <= 6; ++n) {
        for (int k = 1; k <= n; ++k) {
            for (int trial = 0; trial < 2000; ++trial) {
                const auto l = random_cone(rng, n, 1e-3, 1e3);
                EXPECT_LE(identity_residuals(Curvatures{l}, SpeedLaw(n, k, 2.0)).max(), 1e-10);
            }
        }
    }
}

TEST(Maclaurin, EqualityOnDiagonalOnly)
{
    const std::vector<double> diag(3, 2.0);
    const double lo = std::pow(norm_sym(diag, 2), 0.5);
    const double hi = norm_sym(diag, 1);
    EXPECT_NEAR(lo, hi, 1e-15);
    const std::vector<double> off{1.0, 2.0, 4.0};
    EXPECT_LT(std::pow(norm_sym(off, 2), 0.5), norm_sym(off, 1));
}

TEST(CurvatureAlgebraErrors, PositivityAndRanges)
{
    const std::vector<double> bad{1.0, 0.0};
    EXPECT_THROW(speed(Curvatures{bad}, SpeedLaw(2, 1, 1.0)), PositivityError);
    EXPECT_THROW(speed_grad(Curvatures{bad}, SpeedLaw(2, 1, 1.0)), PositivityError);
    const std::vector<double> neg{-1.0, 1.0};
    EXPECT_THROW(speed_from_radii(Radii{neg}, SpeedLaw(2, 1, 1.0)), PositivityError);
    EXPECT_THROW(phi(Radii{neg}, SpeedLaw(2, 1, 1.0)), PositivityError);
    EXPECT_THROW(identity_residuals(Curvatures{neg}, SpeedLaw(2, 1, 1.0)), PositivityError);

    const std::vector<double> ok{1.0, 2.0};
    EXPECT_THROW(elem_sym(ok, 4), DomainError);
    EXPECT_THROW(elem_sym(ok, -1), DomainError);
    EXPECT_THROW(elem_sym(std::vector<double>{}, 0), DomainError);
    EXPECT_THROW(elem_sym_grad(ok, 0), DomainError);
    EXPECT_THROW(speed(Curvatures{ok}, SpeedLaw(3, 1, 1.0)), DomainError);

    EXPECT_THROW(SpeedLaw(2, 0, 1.0), DomainError);
    EXPECT_THROW(SpeedLaw(2, 3, 1.0), DomainError);
    EXPECT_THROW(SpeedLaw(0, 1, 1.0), DomainError);
    EXPECT_THROW(SpeedLaw(kMaxDim + 1, 1, 1.0), DomainError);
    try {
        SpeedLaw(2, 1, 0.0);
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_STREQ(e.what(), "alpha > 0 required");
    }
}

TEST(Constants, BinomialAndBallVolume)
{
    EXPECT_EQ(binomial(6, 3), 20.0);
    EXPECT_EQ(binomial(5, 0), 1.0);
    EXPECT_EQ(binomial(5, 6), 0.0);
    EXPECT_DOUBLE_EQ(unit_ball_volume(1), M_PI);
    EXPECT_DOUBLE_EQ(unit_ball_volume(2), 4 * M_PI / 3);
    EXPECT_NEAR(unit_ball_volume(3), M_PI * M_PI / 2, 1e-14);
}
