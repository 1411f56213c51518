#ifndef QFLOW_DIAGNOSTICS_HPP
#define QFLOW_DIAGNOSTICS_HPP

// One row of audited scalars per recorded flow state, and its CSV form.

#include <qflow/convex_body.hpp>
#include <qflow/errors.hpp>
#include <qflow/flow.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace qflow {

struct DiagnosticsRecord {
    double t = 0.0;
    double dt = 0.0;
    double volume = 0.0;
    double area = 0.0;
    std::vector<double> mixed_volumes; // V_0 .. V_{n+1}
    double h = 0.0;
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double l2_deviation = 0.0;           // int |sigma - h|^2 d(mu)
    double iso_ratio = 0.0;              // I_{n-k+1}
    double curvature_integral_km1 = 0.0; // int E_{k-1} d(mu)
    double balance_rhs = 0.0;            // -k int (sigma - h)(E_k - h^{1/alpha}) d(mu)
    double R_minus = 0.0;
    double R_plus = 0.0;
    double hausdorff_ball = 0.0;
    double minkowski_res_0 = 0.0;
    double ros_deficit = 0.0;
    double volume_drift = 0.0;
    // Appended after the core columns.
    double step = 0.0;
    double ros_l1_deviation = 0.0; // int |E_2^{-1/2} - h^{-1/2}| d(mu), n >= 2
    double e2_min = 0.0;           // min E_2(lambda), n >= 2
};

inline DiagnosticsRecord snapshot(const FlowState& state, const SpeedLaw& law)
{
    const auto& body = state.body;
    const int n = law.n();
    const int k = law.k();
    const auto rf = radii(body);
    const auto speeds = detail::speed_field(body, rf, law);
    const auto& w = body.grid().weights();

    DiagnosticsRecord r;
    r.t = state.t;
    r.dt = state.dt;
    r.step = static_cast<double>(state.step_count);
    r.mixed_volumes = mixed_volumes(body, rf);
    r.volume = r.mixed_volumes[n + 1];
    r.area = area(body, rf);
    r.h = speeds.h;

    const double h_root = std::pow(r.h, 1.0 / law.alpha());
    r.sigma_min = r.lambda_min = r.e2_min = std::numeric_limits<double>::infinity();
    r.sigma_max = r.lambda_max = 0.0;
    double l2 = 0.0, balance = 0.0, ros_l1 = 0.0;
    for (int j = 0; j < body.size(); ++j) {
        const auto radii_j = rf.at(j);
        const double sigma = speeds.sigma[j];
        const double dmu = w[j] * speeds.measure[j];
        r.sigma_min = std::min(r.sigma_min, sigma);
        r.sigma_max = std::max(r.sigma_max, sigma);
        for (double ri : radii_j) {
            r.lambda_min = std::min(r.lambda_min, 1.0 / ri);
            r.lambda_max = std::max(r.lambda_max, 1.0 / ri);
        }
        const double ek = elem_sym(radii_j, n - k) / speeds.measure[j];
        l2 += (sigma - r.h) * (sigma - r.h) * dmu;
        balance += (sigma - r.h) * (ek - h_root) * dmu;
        if (n >= 2) {
            const double e2 = elem_sym(radii_j, n - 2) / speeds.measure[j];
            r.e2_min = std::min(r.e2_min, e2);
            ros_l1 += std::abs(1.0 / std::sqrt(e2) - 1.0 / std::sqrt(r.h)) * dmu;
        }
    }
    if (n < 2)
        r.e2_min = 0.0;
    r.l2_deviation = l2;
    r.balance_rhs = -k * balance;
    r.ros_l1_deviation = ros_l1;
    r.iso_ratio = iso_ratio(r.mixed_volumes, k);
    r.curvature_integral_km1 = curvature_integral(body, rf, k - 1);

    const auto bounds = radii_bounds(body);
    r.R_minus = bounds.inner;
    r.R_plus = bounds.outer;
    r.hausdorff_ball = hausdorff_to_ball(body);
    r.minkowski_res_0 = minkowski_residual(body, rf, 0);
    r.ros_deficit = ros_deficit(body, rf);
    r.volume_drift = (r.volume - state.vol0) / state.vol0;
    return r;
}

// ---------------------------------------------------------------------------
// CSV

inline std::vector<std::string> csv_columns(int n)
{
    std::vector<std::string> c{"t", "dt", "volume", "area"};
    for (int i = 0; i <= n + 1; ++i)
        c.push_back("V_" + std::to_string(i));
    for (const char* name : {"h", "sigma_min", "sigma_max", "lambda_min", "lambda_max", "l2_deviation",
                             "iso_ratio", "curvature_integral_km1", "balance_rhs", "R_minus", "R_plus",
                             "hausdorff_ball", "minkowski_res_0", "ros_deficit", "volume_drift", "step",
                             "ros_l1_deviation", "e2_min"})
        c.emplace_back(name);
    return c;
}

namespace detail {

template <class Rec, class F>
void for_each_field(Rec& r, F&& f)
{
    f(r.t);
    f(r.dt);
    f(r.volume);
    f(r.area);
    for (auto& v : r.mixed_volumes)
        f(v);
    f(r.h);
    f(r.sigma_min);
    f(r.sigma_max);
    f(r.lambda_min);
    f(r.lambda_max);
    f(r.l2_deviation);
    f(r.iso_ratio);
    f(r.curvature_integral_km1);
    f(r.balance_rhs);
    f(r.R_minus);
    f(r.R_plus);
    f(r.hausdorff_ball);
    f(r.minkowski_res_0);
    f(r.ros_deficit);
    f(r.volume_drift);
    f(r.step);
    f(r.ros_l1_deviation);
    f(r.e2_min);
}

inline std::string format_double(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline double parse_double(const std::string& s)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError("not a number: '" + s + "'");
    return v;
}

inline std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, sep))
        out.push_back(item);
    if (!line.empty() && line.back() == sep)
        out.emplace_back();
    return out;
}

} // namespace detail

inline void write_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& records, int n)
{
    const auto cols = csv_columns(n);
    for (std::size_t i = 0; i < cols.size(); ++i)
        os << (i ? "," : "") << cols[i];
    os << '\n';
    for (const auto& rec : records) {
        bool first = true;
        detail::for_each_field(rec, [&](double x) {
            os << (first ? "" : ",") << detail::format_double(x);
            first = false;
        });
        os << '\n';
    }
}

/// Parses a series written by write_csv; n is inferred from the header.
inline std::vector<DiagnosticsRecord> read_csv(std::istream& is, int* n_out = nullptr)
{
    std::string line;
    if (!std::getline(is, line))
        throw ParseError("empty series");
    const auto header = detail::split(line, ',');
    int n = -1;
    for (int cand = 1; cand <= kMaxDim; ++cand) {
        if (csv_columns(cand) == header) {
            n = cand;
            break;
        }
    }
    if (n < 0)
        throw ParseError("series header does not match the diagnostics columns");
    std::vector<DiagnosticsRecord> out;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty())
            continue;
        const auto cells = detail::split(line, ',');
        if (cells.size() != header.size())
            throw ParseError("series line " + std::to_string(lineno) + ": expected "
                             + std::to_string(header.size()) + " fields");
        DiagnosticsRecord rec;
        rec.mixed_volumes.resize(n + 2);
        std::size_t i = 0;
        detail::for_each_field(rec, [&](double& x) { x = detail::parse_double(cells[i++]); });
        out.push_back(std::move(rec));
    }
    if (n_out)
        *n_out = n;
    return out;
}

} // namespace qflow

#endif
