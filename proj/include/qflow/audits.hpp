#ifndef QFLOW_AUDITS_HPP
#define QFLOW_AUDITS_HPP

// Post-hoc checks over a recorded series of DiagnosticsRecords. Every
// audit is a pure function of the records and its context.

#include <qflow/curvature_algebra.hpp>
#include <qflow/diagnostics.hpp>
#include <qflow/errors.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace qflow {

enum class Verdict { pass, fail, not_applicable };

inline std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    default: return "not_applicable";
    }
}

struct Clause {
    std::string name;
    Verdict verdict = Verdict::not_applicable;
    std::string detail;
};

struct AuditReport {
    std::string name;
    Verdict verdict = Verdict::not_applicable;
    double worst_violation = 0.0;
    long location = -1; // record index of the first violation
    std::map<std::string, double> fitted;
    std::vector<Clause> clauses;
    std::string note;

    bool ok() const { return verdict != Verdict::fail; }

    void add(Clause c)
    {
        clauses.push_back(std::move(c));
        bool any_pass = false, any_fail = false;
        for (const auto& x : clauses) {
            any_pass = any_pass || x.verdict == Verdict::pass;
            any_fail = any_fail || x.verdict == Verdict::fail;
        }
        verdict = any_fail ? Verdict::fail : (any_pass ? Verdict::pass : Verdict::not_applicable);
    }
};

struct AuditContext {
    int k = 1;
    double alpha = 1.0;
    /// Hausdorff tolerance for "converged"; decay audits apply below 10x this.
    double roundness_tol = 1e-3;
    double drift_budget = 1e-4;
    /// Discretization allowance for monotonicity, from a paired coarse run.
    double eps_disc = 0.0;
};

inline int series_dim(const std::vector<DiagnosticsRecord>& recs)
{
    return recs.empty() ? 0 : static_cast<int>(recs.front().mixed_volumes.size()) - 2;
}

inline std::vector<DiagnosticsRecord> reversed(std::vector<DiagnosticsRecord> recs)
{
    std::reverse(recs.begin(), recs.end());
    return recs;
}

/// int E_{k-1} d(mu) and I_{n-k+1} non-increasing between consecutive
/// records up to 1e-9 |value| + eps_disc.
inline AuditReport audit_monotone(const std::vector<DiagnosticsRecord>& recs, const AuditContext& ctx)
{
    AuditReport rep;
    rep.name = "monotone";
    rep.fitted["eps_disc"] = ctx.eps_disc;
    if (recs.size() < 2) {
        rep.note = "fewer than 2 records";
        return rep;
    }
    auto check = [&](const char* label, double DiagnosticsRecord::*field) {
        Clause c{label, Verdict::pass, ""};
        for (std::size_t i = 1; i < recs.size(); ++i) {
            const double prev = recs[i - 1].*field;
            const double rise = recs[i].*field - prev;
            const double slack = 1e-9 * std::abs(prev) + ctx.eps_disc;
            rep.worst_violation = std::max(rep.worst_violation, rise);
            if (rise > slack && c.verdict == Verdict::pass) {
                c.verdict = Verdict::fail;
                c.detail = "increase " + detail::format_double(rise) + " at record " + std::to_string(i);
                if (rep.location < 0 || static_cast<long>(i) < rep.location)
                    rep.location = static_cast<long>(i);
            }
        }
        rep.add(c);
    };
    check("curvature_integral_km1", &DiagnosticsRecord::curvature_integral_km1);
    check("iso_ratio", &DiagnosticsRecord::iso_ratio);
    return rep;
}

/// Finite difference of int E_{k-1} d(mu) over each record interval against
/// the midpoint value of -k int (sigma - h)(E_k - h^{1/alpha}) d(mu).
/// Relative mismatch <= 5% where l2_deviation > 1e-10 at both ends; near
/// equilibrium both sides must vanish to 1e-8 absolute.
inline AuditReport audit_balance(const std::vector<DiagnosticsRecord>& recs, const AuditContext& /*ctx*/)
{
    if (recs.size() < 3)
        throw InsufficientData("balance audit needs at least 3 records");
    AuditReport rep;
    rep.name = "balance";
    Clause rel{"relative_mismatch", Verdict::not_applicable, ""};
    Clause eq{"equilibrium", Verdict::not_applicable, ""};
    double worst_rel = 0.0;
    long checked = 0, unresolved = 0;
    for (std::size_t i = 0; i + 1 < recs.size(); ++i) {
        const auto& a = recs[i];
        const auto& b = recs[i + 1];
        const double dt = b.t - a.t;
        if (!(dt > 0.0))
            continue;
        const double fd = (b.curvature_integral_km1 - a.curvature_integral_km1) / dt;
        const double mid = 0.5 * (a.balance_rhs + b.balance_rhs);
        if (a.l2_deviation > 1e-10 && b.l2_deviation > 1e-10) {
            // The two-point difference only resolves intervals over which the
            // right-hand side changes by at most 25% (error ~1%); coarser
            // intervals, typically the initial transient, are counted apart.
            if (std::abs(b.balance_rhs - a.balance_rhs) > 0.25 * std::max(std::abs(a.balance_rhs), std::abs(b.balance_rhs))) {
                ++unresolved;
                continue;
            }
            const double m = std::abs(fd - mid) / std::abs(mid);
            ++checked;
            worst_rel = std::max(worst_rel, m);
            if (rel.verdict != Verdict::fail)
                rel.verdict = Verdict::pass;
            if (m > 0.05 && rel.verdict != Verdict::fail) {
                rel.verdict = Verdict::fail;
                rel.detail = "mismatch " + detail::format_double(m) + " on interval " + std::to_string(i);
                if (rep.location < 0)
                    rep.location = static_cast<long>(i + 1);
            }
        } else {
            const double d = std::abs(fd - mid);
            if (eq.verdict != Verdict::fail)
                eq.verdict = Verdict::pass;
            if (d > 1e-8 && eq.verdict != Verdict::fail) {
                eq.verdict = Verdict::fail;
                eq.detail = "absolute mismatch " + detail::format_double(d) + " on interval " + std::to_string(i);
                if (rep.location < 0)
                    rep.location = static_cast<long>(i + 1);
            }
        }
    }
    if (unresolved > 0 && checked == 0) {
        rel.verdict = Verdict::fail;
        rel.detail = "record spacing resolves no interval; lower snapshot_stride";
    }
    rep.worst_violation = worst_rel;
    rep.fitted["max_relative_mismatch"] = worst_rel;
    rep.fitted["intervals_checked"] = static_cast<double>(checked);
    rep.fitted["intervals_unresolved"] = static_cast<double>(unresolved);
    rep.add(rel);
    rep.add(eq);
    return rep;
}

/// lambda_min(t) >= (lambda_min(0)^{-1} + h* t)^{-1} (1 - 1e-2), h* the
/// running maximum of h.
inline AuditReport audit_pinching(const std::vector<DiagnosticsRecord>& recs, const AuditContext& /*ctx*/)
{
    AuditReport rep;
    rep.name = "pinching";
    if (recs.empty())
        return rep;
    Clause c{"lower_bound", Verdict::pass, ""};
    const double inv0 = 1.0 / recs.front().lambda_min;
    const double t0 = recs.front().t;
    double hstar = 0.0;
    double min_margin = INFINITY;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        hstar = std::max(hstar, recs[i].h);
        const double bound = (1.0 - 1e-2) / (inv0 + hstar * (recs[i].t - t0));
        const double margin = recs[i].lambda_min - bound;
        min_margin = std::min(min_margin, margin / bound);
        if (!(margin >= 0.0)) {
            rep.worst_violation = std::max(rep.worst_violation, -margin);
            if (c.verdict == Verdict::pass) {
                c.verdict = Verdict::fail;
                c.detail = "lambda_min " + detail::format_double(recs[i].lambda_min) + " below bound "
                           + detail::format_double(bound) + " at record " + std::to_string(i);
                rep.location = static_cast<long>(i);
            }
        }
    }
    rep.fitted["min_relative_margin"] = min_margin;
    rep.add(c);
    return rep;
}

namespace detail {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

// First index of the final decade of a positive, eventually decreasing
// series: from where it first falls to within 10x of its final value.
inline std::size_t final_decade_start(const std::vector<double>& v)
{
    const double last = v.back();
    std::size_t i = v.size() - 1;
    while (i > 0 && v[i - 1] <= 10.0 * last)
        --i;
    return i;
}

inline bool near_round(const std::vector<DiagnosticsRecord>& recs, const AuditContext& ctx)
{
    return !recs.empty() && recs.back().hausdorff_ball < 10.0 * ctx.roundness_tol;
}

} // namespace detail

/// Convergence to the ball of the same volume: (a) L2 speed deviation
/// decays below 1e-6; (b) log(R^+ - R_-) over its final decade is fitted by
/// a line of negative slope with R^2 >= 0.95; (c) final volume within the
/// drift budget and final Hausdorff distance below tolerance; (d) limit
/// radius matches the volume-matched ball to 1e-3; (e) isoperimetric ratio
/// sits on the ball's floor kappa^k to 1e-4 relative.
inline AuditReport audit_decay(const std::vector<DiagnosticsRecord>& recs, const AuditContext& ctx)
{
    AuditReport rep;
    rep.name = "decay";
    if (!detail::near_round(recs, ctx)) {
        rep.note = "trajectory not converged";
        return rep;
    }
    const auto& first = recs.front();
    const auto& last = recs.back();
    const int n = series_dim(recs);

    const bool l2_ok = last.l2_deviation < 1e-6 && (last.l2_deviation < first.l2_deviation || first.l2_deviation < 1e-20);
    rep.add({"l2_decay", l2_ok ? Verdict::pass : Verdict::fail,
             "final " + detail::format_double(last.l2_deviation)});
    rep.fitted["l2_final"] = last.l2_deviation;

    // Exponential rate of R^+ - R_-, above 10x the round-off floor.
    double rmax = 0.0;
    for (const auto& r : recs)
        rmax = std::max(rmax, r.R_plus);
    const double floor = 10.0 * 1e-12 * rmax;
    std::vector<double> gap, t;
    for (const auto& r : recs) {
        const double g = r.R_plus - r.R_minus;
        if (g > floor) {
            gap.push_back(g);
            t.push_back(r.t);
        } else {
            gap.clear(); // keep only the tail above the floor
            t.clear();
        }
    }
    Clause rate{"exponential_rate", Verdict::not_applicable, "gap at round-off floor"};
    if (gap.size() >= 3) {
        const std::size_t s = detail::final_decade_start(gap);
        std::vector<double> x(t.begin() + s, t.end()), y;
        for (std::size_t i = s; i < gap.size(); ++i)
            y.push_back(std::log(gap[i]));
        if (x.size() >= 3) {
            const auto fit = detail::least_squares(x, y);
            rep.fitted["rate_slope"] = fit.slope;
            rep.fitted["rate_r2"] = fit.r2;
            rep.fitted["rate_points"] = static_cast<double>(x.size());
            const bool ok = fit.slope < 0.0 && fit.r2 >= 0.95;
            rate = {"exponential_rate", ok ? Verdict::pass : Verdict::fail,
                    "slope " + detail::format_double(fit.slope) + ", R^2 " + detail::format_double(fit.r2)};
        }
    }
    rep.add(rate);

    const bool vol_ok = std::abs(last.volume_drift) <= ctx.drift_budget;
    const bool haus_ok = last.hausdorff_ball < ctx.roundness_tol;
    rep.add({"same_volume_ball", vol_ok && haus_ok ? Verdict::pass : Verdict::fail,
             "drift " + detail::format_double(last.volume_drift) + ", hausdorff "
                 + detail::format_double(last.hausdorff_ball)});

    const double vol0 = first.volume / (1.0 + first.volume_drift);
    const double ball_radius = std::pow(vol0 / unit_ball_volume(n), 1.0 / (n + 1));
    const double limit_radius = 0.5 * (last.R_plus + last.R_minus);
    rep.fitted["ball_radius"] = ball_radius;
    rep.fitted["limit_radius"] = limit_radius;
    rep.add({"limit_radius", std::abs(limit_radius - ball_radius) <= 1e-3 ? Verdict::pass : Verdict::fail,
             "limit " + detail::format_double(limit_radius) + " vs " + detail::format_double(ball_radius)});

    const double iso_ball = std::pow(unit_ball_volume(n), ctx.k);
    const double excess = (last.iso_ratio - iso_ball) / iso_ball;
    rep.fitted["iso_excess"] = excess;
    rep.add({"iso_floor", excess >= -1e-9 && excess <= 1e-4 ? Verdict::pass : Verdict::fail,
             "relative excess " + detail::format_double(excess)});
    if (ctx.alpha != 1.0)
        rep.note = "for alpha != 1 only a liminf statement holds; the recorded tail is checked the same way";
    return rep;
}

/// n = k = 2 only: Ros deficit stays >= -1e-6 throughout, and both
/// int |E_2^{-1/2} - h^{-1/2}| d(mu) and the Ros deficit decrease over their
/// final decade (within eps_disc) on converged trajectories.
inline AuditReport audit_ros_sequence(const std::vector<DiagnosticsRecord>& recs, const AuditContext& ctx)
{
    AuditReport rep;
    rep.name = "ros_sequence";
    if (series_dim(recs) != 2 || ctx.k != 2) {
        rep.note = "requires n = 2, k = 2";
        return rep;
    }
    Clause pos{"ros_nonnegative", Verdict::pass, ""};
    for (std::size_t i = 0; i < recs.size(); ++i) {
        if (recs[i].ros_deficit < -1e-6) {
            pos.verdict = Verdict::fail;
            pos.detail = "deficit " + detail::format_double(recs[i].ros_deficit) + " at record " + std::to_string(i);
            rep.location = static_cast<long>(i);
            break;
        }
    }
    rep.add(pos);

    if (!detail::near_round(recs, ctx) || recs.size() < 3) {
        rep.add({"decay", Verdict::not_applicable, "trajectory not converged"});
        return rep;
    }
    auto decays = [&](const char* label, double DiagnosticsRecord::*field) {
        std::vector<double> v;
        for (const auto& r : recs)
            v.push_back(std::max(r.*field, 0.0));
        Clause c{label, Verdict::pass, "final " + detail::format_double(v.back())};
        if (!(v.back() < v.front())) {
            c.verdict = Verdict::fail;
            c.detail = "did not decrease";
        }
        const std::size_t s = detail::final_decade_start(v);
        for (std::size_t i = std::max<std::size_t>(s, 1); i < v.size(); ++i) {
            const double rise = v[i] - v[i - 1];
            if (rise > 1e-9 * v[i - 1] + ctx.eps_disc && c.verdict == Verdict::pass) {
                c.verdict = Verdict::fail;
                c.detail = "increase " + detail::format_double(rise) + " at record " + std::to_string(i);
                rep.location = static_cast<long>(i);
            }
        }
        rep.fitted[std::string(label) + "_final"] = v.back();
        rep.add(c);
    };
    decays("ros_l1_deviation", &DiagnosticsRecord::ros_l1_deviation);
    decays("ros_deficit", &DiagnosticsRecord::ros_deficit);
    return rep;
}

/// Measured witnesses of the a-priori bounds: sigma_max and lambda_max stay
/// below 1.25x their initial scale, h stays within [h0/2, 2 h0], and (n >= 2)
/// min E_2 stays above a strictly positive floor.
inline AuditReport audit_envelopes(const std::vector<DiagnosticsRecord>& recs, const AuditContext& /*ctx*/)
{
    AuditReport rep;
    rep.name = "envelopes";
    if (recs.empty())
        return rep;
    const auto& r0 = recs.front();
    const double sigma_cap = 1.25 * std::max(r0.sigma_max, r0.h);
    const double lambda_cap = 1.25 * r0.lambda_max;
    double sigma_peak = 0, lambda_peak = 0, h_lo = INFINITY, h_hi = 0, e2_floor = INFINITY;
    for (const auto& r : recs) {
        sigma_peak = std::max(sigma_peak, r.sigma_max);
        lambda_peak = std::max(lambda_peak, r.lambda_max);
        h_lo = std::min(h_lo, r.h);
        h_hi = std::max(h_hi, r.h);
        e2_floor = std::min(e2_floor, r.e2_min);
    }
    rep.fitted["sigma_peak"] = sigma_peak;
    rep.fitted["lambda_peak"] = lambda_peak;
    rep.fitted["h_min"] = h_lo;
    rep.fitted["h_max"] = h_hi;
    rep.add({"sigma_bound", sigma_peak <= sigma_cap ? Verdict::pass : Verdict::fail,
             "peak " + detail::format_double(sigma_peak) + " cap " + detail::format_double(sigma_cap)});
    rep.add({"curvature_bound", lambda_peak <= lambda_cap ? Verdict::pass : Verdict::fail,
             "peak " + detail::format_double(lambda_peak) + " cap " + detail::format_double(lambda_cap)});
    rep.add({"h_two_sided", h_lo >= 0.5 * r0.h && h_hi <= 2.0 * r0.h ? Verdict::pass : Verdict::fail,
             "range [" + detail::format_double(h_lo) + ", " + detail::format_double(h_hi) + "]"});
    if (series_dim(recs) >= 2) {
        rep.fitted["e2_floor"] = e2_floor;
        rep.add({"e2_floor", e2_floor > 0.0 ? Verdict::pass : Verdict::fail,
                 "min E_2 " + detail::format_double(e2_floor)});
    }
    return rep;
}

/// All audits; an audit lacking data reports not_applicable.
inline std::vector<AuditReport> run_audits(const std::vector<DiagnosticsRecord>& recs, const AuditContext& ctx)
{
    std::vector<AuditReport> out;
    out.push_back(audit_monotone(recs, ctx));
    try {
        out.push_back(audit_balance(recs, ctx));
    } catch (const InsufficientData& e) {
        AuditReport r;
        r.name = "balance";
        r.note = e.what();
        out.push_back(r);
    }
    out.push_back(audit_pinching(recs, ctx));
    out.push_back(audit_decay(recs, ctx));
    out.push_back(audit_ros_sequence(recs, ctx));
    out.push_back(audit_envelopes(recs, ctx));
    return out;
}

inline bool all_ok(const std::vector<AuditReport>& reports)
{
    return std::all_of(reports.begin(), reports.end(), [](const AuditReport& r) { return r.ok(); });
}

/// Discretization allowance: largest discrepancy of the monitored monotone
/// quantities between a run and its half-resolution partner at the same
/// final time.
inline double estimate_eps_disc(const std::vector<DiagnosticsRecord>& fine, const std::vector<DiagnosticsRecord>& coarse)
{
    if (fine.empty() || coarse.empty())
        throw InsufficientData("eps_disc needs two non-empty series");
    const auto& a = fine.back();
    const auto& b = coarse.back();
    return std::max(std::abs(a.curvature_integral_km1 - b.curvature_integral_km1), std::abs(a.iso_ratio - b.iso_ratio));
}

} // namespace qflow

#endif
