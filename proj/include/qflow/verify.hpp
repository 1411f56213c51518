#ifndef QFLOW_VERIFY_HPP
#define QFLOW_VERIFY_HPP

// Randomized identity and inequality suites behind `qflow verify`.
// Each suite is a list of named checks; a suite passes iff all do.

#include <qflow/body_io.hpp>
#include <qflow/convex_body.hpp>
#include <qflow/curvature_algebra.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace qflow {

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct SuiteResult {
    std::string suite;
    std::uint64_t seed = 0;
    std::vector<Check> checks;
    double seconds = 0.0;

    bool ok() const
    {
        for (const auto& c : checks)
            if (!c.pass)
                return false;
        return true;
    }
};

namespace detail {

inline std::string fmt(const char* f, double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

inline std::string sci3(double x) { return fmt("%.3e", x); }

// Log-uniform sample in (lo, hi), so every decade is exercised equally.
inline double log_uniform(std::mt19937_64& rng, double lo, double hi)
{
    std::uniform_real_distribution<double> d(std::log(lo), std::log(hi));
    return std::exp(d(rng));
}

inline double observed_order(double e_coarse, double e_fine) { return std::log2(e_coarse / e_fine); }

class Timer {
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

} // namespace detail

/// Symmetric-polynomial identities, Maclaurin, Euler, gradient, reciprocal
/// substitution and concavity of Phi on random points of the positive cone.
inline SuiteResult verify_algebra(std::uint64_t seed, int samples = 100000)
{
    const detail::Timer timer;
    SuiteResult res{"algebra", seed, {}, 0.0};
    std::mt19937_64 rng(seed);
    const double alphas[] = {0.5, 1.0, 2.0};
    std::vector<double> lam;

    for (int n = 1; n <= 6; ++n) {
        lam.resize(n);
        for (int k = 1; k <= n; ++k) {
            const SpeedLaw law1(n, k, 1.0);
            double trace = 0, lower = 0, mac = 0, euler = 0;
            for (int s = 0; s < samples; ++s) {
                for (auto& x : lam)
                    x = detail::log_uniform(rng, 1e-3, 1e3);
                const auto r = identity_residuals(Curvatures{lam}, law1);
                trace = std::max(trace, std::abs(r.trace));
                lower = std::max(lower, r.trace_lower);
                mac = std::max(mac, r.maclaurin);
                euler = std::max(euler, std::abs(r.euler));
                for (double a : {alphas[0], alphas[2]}) {
                    const auto ra = identity_residuals(Curvatures{lam}, SpeedLaw(n, k, a));
                    euler = std::max(euler, std::abs(ra.euler));
                }
            }
            const std::string tag = "n=" + std::to_string(n) + " k=" + std::to_string(k);
            res.checks.push_back({"trace identity " + tag, trace <= 1e-10, "max " + detail::sci3(trace)});
            res.checks.push_back({"trace lower bound " + tag, lower <= 1e-10, "max slack " + detail::sci3(lower)});
            res.checks.push_back({"maclaurin " + tag, mac <= 1e-10, "max slack " + detail::sci3(mac)});
            res.checks.push_back({"euler " + tag, euler <= 1e-10, "max " + detail::sci3(euler)});
        }
    }

    // Gradient against central differences, reciprocal substitution,
    // 1-homogeneity and midpoint concavity of Phi.
    double grad = 0, recip = 0, homog = 0, concave = 0;
    std::uniform_int_distribution<int> pick_n(1, 6);
    std::uniform_real_distribution<double> pick_a(0.25, 3.0);
    for (int s = 0; s < 10000; ++s) {
        const int n = pick_n(rng);
        const int k = std::uniform_int_distribution<int>(1, n)(rng);
        const SpeedLaw law(n, k, pick_a(rng));
        std::vector<double> l(n), r(n), q(n), mid(n), inv(n), twice(n);
        for (int i = 0; i < n; ++i) {
            l[i] = detail::log_uniform(rng, 0.1, 10.0);
            r[i] = detail::log_uniform(rng, 0.1, 10.0);
            q[i] = detail::log_uniform(rng, 0.1, 10.0);
            mid[i] = 0.5 * (r[i] + q[i]);
            inv[i] = 1.0 / r[i];
            twice[i] = 2.0 * r[i];
        }
        const auto g = speed_grad(Curvatures{l}, law);
        for (int i = 0; i < n; ++i) {
            const double step = 1e-5 * l[i];
            auto lp = l, lm = l;
            lp[i] += step;
            lm[i] -= step;
            const double fd = (speed(Curvatures{lp}, law) - speed(Curvatures{lm}, law)) / (2 * step);
            grad = std::max(grad, std::abs(fd - g[i]) / std::abs(g[i]));
        }
        const double sr = speed_from_radii(Radii{r}, law);
        recip = std::max(recip, std::abs(sr - speed(Curvatures{inv}, law)) / sr);
        const double pr = phi(Radii{r}, law);
        homog = std::max(homog, std::abs(phi(Radii{twice}, law) - 2 * pr) / pr);
        const double pq = phi(Radii{q}, law);
        const double gap = (0.5 * (pr + pq) - phi(Radii{mid}, law)) / (pr + pq);
        concave = std::max(concave, gap);
    }
    res.checks.push_back({"speed_grad vs central differences", grad <= 1e-6, "max rel " + detail::sci3(grad)});
    res.checks.push_back({"reciprocal substitution", recip <= 1e-12, "max rel " + detail::sci3(recip)});
    res.checks.push_back({"phi 1-homogeneity", homog <= 1e-12, "max rel " + detail::sci3(homog)});
    res.checks.push_back({"phi midpoint concavity", concave <= 1e-12, "max violation " + detail::sci3(concave)});
    res.seconds = timer.seconds();
    return res;
}

namespace detail {

inline double ellipse_perimeter(double a, double b)
{
    const double e2 = 1.0 - (b * b) / (a * a);
    return 4.0 * a * std::comp_ellint_2(std::sqrt(e2));
}

// Surface area of the prolate spheroid (a, a, c), c > a.
inline double prolate_area(double a, double c)
{
    const double e = std::sqrt(1.0 - (a * a) / (c * c));
    return 2.0 * M_PI * a * a * (1.0 + c / (a * e) * std::asin(e));
}

} // namespace detail

/// Quadrature and radii accuracy against closed forms, refinement orders on
/// N = 64, 128, 256, support-function extremal problems and serialization.
inline SuiteResult verify_body(std::uint64_t seed)
{
    const detail::Timer timer;
    SuiteResult res{"body", seed, {}, 0.0};
    auto rel = [](double x, double ref) { return std::abs(x - ref) / std::abs(ref); };

    {
        const auto c = make_body(shape::Sphere{1.0, Backend::circle}, 128);
        const double e = std::max(rel(area(c), 2 * M_PI), rel(volume(c), M_PI));
        res.checks.push_back({"unit circle perimeter/area N=128", e <= 1e-10, "rel " + detail::sci3(e)});
        const auto s = make_body(shape::Sphere{1.0, Backend::axisymmetric}, 256);
        const double es = std::max(rel(area(s), 4 * M_PI), rel(volume(s), 4 * M_PI / 3));
        res.checks.push_back({"unit sphere area/volume N=256", es <= 1e-6, "rel " + detail::sci3(es)});
        const double ts = rel(curvature_integral(s, 2), 4 * M_PI);
        res.checks.push_back({"unit sphere total Gauss curvature", ts <= 1e-6, "rel " + detail::sci3(ts)});
    }

    // Refinement: ellipse(2,1) perimeter and ellipsoid_rev(1,1.6) area/volume.
    const int Ns[] = {64, 128, 256};
    std::vector<double> ell, elv;
    double ell_r = 0, elr1 = 0, elr2 = 0;
    for (int N : Ns) {
        const auto e = make_body(shape::Ellipse{2.0, 1.0}, N);
        const auto rf = radii(e);
        ell.push_back(std::max(rel(area(e, rf), detail::ellipse_perimeter(2, 1)), rel(volume(e, rf), 2 * M_PI)));
        ell_r = 0;
        for (int j = 0; j < N; ++j)
            ell_r = std::max(ell_r, rel(rf.at(j)[0], 4.0 / (e[j] * e[j] * e[j])));

        const auto p = make_body(shape::EllipsoidRev{1.0, 1.6}, N);
        const auto pf = radii(p);
        elv.push_back(std::max(rel(area(p, pf), detail::prolate_area(1.0, 1.6)),
                               rel(volume(p, pf), 4 * M_PI / 3 * 1.6)));
        elr1 = elr2 = 0;
        for (int j = 0; j < N; ++j) {
            const double u = p[j];
            elr1 = std::max(elr1, rel(pf.at(j)[0], 1.6 * 1.6 / (u * u * u)));
            if (j >= 2 && j < N - 2) // pole-blended nodes carry an O(dphi^2) term
                elr2 = std::max(elr2, rel(pf.at(j)[1], 1.0 / u));
        }
    }
    std::ostringstream orders;
    bool axis_order_ok = true;
    for (int i = 0; i < 2; ++i) {
        const double oc = detail::observed_order(ell[i], ell[i + 1]);
        const double oa = detail::observed_order(elv[i], elv[i + 1]);
        orders << "N=" << Ns[i] << "->" << Ns[i + 1] << ": circle " << (ell[i + 1] < 1e-13 ? "round-off" : detail::fmt("%.2f", oc))
               << ", axisymmetric " << detail::fmt("%.2f", oa) << "; ";
        axis_order_ok = axis_order_ok && oa >= 2.0;
    }
    res.checks.push_back({"ellipse(2,1) perimeter/area refinement", ell.back() <= 1e-12,
                          "errors " + detail::sci3(ell[0]) + " " + detail::sci3(ell[1]) + " " + detail::sci3(ell[2])});
    res.checks.push_back({"ellipsoid_rev(1,1.6) area/volume refinement", axis_order_ok && elv.back() <= 1e-6,
                          "errors " + detail::sci3(elv[0]) + " " + detail::sci3(elv[1]) + " " + detail::sci3(elv[2])});
    res.checks.push_back({"convergence orders", axis_order_ok, orders.str()});
    res.checks.push_back({"ellipse radii a^2 b^2/u^3 N=256", ell_r <= 1e-10, "max rel " + detail::sci3(ell_r)});
    res.checks.push_back({"ellipsoid radii a^2 c^2/u^3 N=256", elr1 <= 1e-6, "max rel " + detail::sci3(elr1)});
    res.checks.push_back({"ellipsoid radii a^2/u off-pole N=256", elr2 <= 1e-6, "max rel " + detail::sci3(elr2)});

    {
        const auto e = make_body(shape::Ellipse{2.0, 1.0}, 256);
        const auto b = radii_bounds(e);
        const double err = std::max(std::abs(b.inner - 1.0), std::abs(b.outer - 2.0));
        res.checks.push_back({"ellipse(2,1) in/circumradius (1, 2)", err <= 1e-10, "err " + detail::sci3(err)});
        const auto fit = fit_ball(e);
        const double ferr = std::max(std::abs(fit.distance - 0.5), std::abs(fit.radius - 1.5));
        res.checks.push_back({"ellipse(2,1) best ball (0.5, R=1.5)", ferr <= 1e-10, "err " + detail::sci3(ferr)});
        const auto shifted = SupportField::from_function(Backend::circle, 256, [](double t) { return 1.0 + 0.3 * std::cos(t); });
        const auto sb = radii_bounds(shifted);
        const double serr = std::max({std::abs(sb.inner - 1), std::abs(sb.outer - 1), std::abs(sb.outer_center[0] - 0.3)});
        res.checks.push_back({"shifted disk recovered", serr <= 1e-10, "err " + detail::sci3(serr)});
    }

    {
        std::mt19937_64 rng(seed);
        bool margins = true, roundtrip = true;
        for (int i = 0; i < 10; ++i) {
            const auto backend = i % 2 ? Backend::axisymmetric : Backend::circle;
            const auto body = make_body(shape::RandomTrig{rng(), 4, 0.1, backend}, 128);
            margins = margins && radii(body).margin() >= 0.1;
            std::stringstream ss;
            write_body(ss, body);
            const auto back = read_body(ss);
            for (int j = 0; j < body.size(); ++j)
                roundtrip = roundtrip && back[j] == body[j];
        }
        res.checks.push_back({"random_trig convexity margin", margins, "10 bodies"});
        res.checks.push_back({"body text round trip bit-exact", roundtrip, "10 bodies"});
    }
    res.seconds = timer.seconds();
    return res;
}

/// Minkowski identities, Steiner polynomial, Alexandrov-Fenchel and Ros
/// inequalities on random bodies, test shapes and balls.
inline SuiteResult verify_static_inequalities(std::uint64_t seed, int bodies = 50)
{
    const detail::Timer timer;
    SuiteResult res{"static-inequalities", seed, {}, 0.0};
    std::mt19937_64 rng(seed);

    struct Named {
        std::string name;
        SupportField body;
        bool ball;
    };
    std::vector<Named> set;
    // The axisymmetric grid differentiates at 4th order, so the identities
    // are checked where its truncation error is below the 1e-8 budget.
    for (int i = 0; i < bodies; ++i) {
        const auto backend = i % 2 ? Backend::axisymmetric : Backend::circle;
        const int N = backend == Backend::circle ? 256 : 1024;
        set.push_back({"random", make_body(shape::RandomTrig{rng(), 4, 0.1, backend}, N), false});
    }
    set.push_back({"ellipse(2,1)", make_body(shape::Ellipse{2, 1}, 256), false});
    set.push_back({"ellipsoid_rev(1,1.6)", make_body(shape::EllipsoidRev{1, 1.6}, 1024), false});
    set.push_back({"ellipsoid_rev(1,1.5)", make_body(shape::EllipsoidRev{1, 1.5}, 1024), false});
    for (double R : {0.5, 1.0, 2.0, 3.0}) {
        set.push_back({"disk", make_body(shape::Sphere{R, Backend::circle}, 256), true});
        set.push_back({"ball", make_body(shape::Sphere{R, Backend::axisymmetric}, 256), true});
    }

    double mink = 0, af_min = INFINITY, ros_min = INFINITY, ball_af = 0, ball_ros = 0;
    for (const auto& [name, body, ball] : set) {
        const auto rf = radii(body);
        const double A = area(body, rf);
        for (int l = 0; l < body.dim(); ++l)
            mink = std::max(mink, std::abs(minkowski_residual(body, rf, l)) / A);
        const auto V = mixed_volumes(body, rf);
        const int n = body.dim();
        for (int m = 1; m <= n + 1; ++m) {
            for (int l = m + 1; l <= n + 1; ++l) {
                const double d = af_deficit(V, m, l);
                af_min = std::min(af_min, d);
                if (ball)
                    ball_af = std::max(ball_af, std::abs(d));
            }
        }
        const double ros = ros_deficit(body, rf);
        ros_min = std::min(ros_min, ros);
        if (ball)
            ball_ros = std::max(ball_ros, std::abs(ros));
    }
    res.checks.push_back({"minkowski identities", mink <= 1e-8, "max |res|/A " + detail::sci3(mink)});
    res.checks.push_back({"alexandrov-fenchel deficit >= -1e-8", af_min >= -1e-8, "min " + detail::sci3(af_min)});
    res.checks.push_back({"ros deficit >= -1e-6", ros_min >= -1e-6, "min " + detail::sci3(ros_min)});
    res.checks.push_back({"equality on balls", ball_af <= 1e-8 && ball_ros <= 1e-6,
                          "af " + detail::sci3(ball_af) + ", ros " + detail::sci3(ball_ros)});

    {
        const auto e = make_body(shape::Ellipse{2, 1}, 256);
        const auto V = mixed_volumes(e);
        double worst = 0;
        for (double t : {0.1, 1.0, 3.0})
            worst = std::max(worst, std::abs(steiner_volume(e, t) - steiner_polynomial(V, t)));
        res.checks.push_back({"steiner polynomial ellipse(2,1)", worst <= 1e-8, "max " + detail::sci3(worst)});
        const auto s = make_body(shape::EllipsoidRev{1, 1.6}, 256);
        const auto Vs = mixed_volumes(s);
        double ws = 0;
        for (double t : {0.1, 1.0, 3.0})
            ws = std::max(ws, std::abs(steiner_volume(s, t) - steiner_polynomial(Vs, t)) / steiner_volume(s, t));
        res.checks.push_back({"steiner polynomial ellipsoid_rev(1,1.6)", ws <= 1e-8, "max rel " + detail::sci3(ws)});
    }
    res.seconds = timer.seconds();
    return res;
}

inline std::vector<SuiteResult> verify_suite(const std::string& name, std::uint64_t seed)
{
    if (name == "algebra")
        return {verify_algebra(seed)};
    if (name == "body")
        return {verify_body(seed)};
    if (name == "static-inequalities")
        return {verify_static_inequalities(seed)};
    if (name == "all")
        return {verify_algebra(seed), verify_body(seed), verify_static_inequalities(seed)};
    throw DomainError("unknown suite '" + name + "' (algebra, body, static-inequalities, all)");
}

inline void print_suite(std::ostream& os, const SuiteResult& r)
{
    os << "suite " << r.suite << " seed " << r.seed << '\n';
    for (const auto& c : r.checks)
        os << "  " << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    os << "suite " << r.suite << (r.ok() ? " passed" : " FAILED") << " in " << detail::fmt("%.2f", r.seconds) << " s\n";
}

} // namespace qflow

#endif
