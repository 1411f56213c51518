#ifndef QFLOW_CURVATURE_ALGEBRA_HPP
#define QFLOW_CURVATURE_ALGEBRA_HPP

// Elementary symmetric polynomials of principal curvatures and the speed
// law sigma = E_k^alpha, evaluated in the positive cone.

#include <qflow/errors.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace qflow {

/// Largest dimension n supported by the fixed-size scratch buffers.
inline constexpr int kMaxDim = 32;

inline double binomial(int n, int k)
{
    if (k < 0 || k > n)
        return 0.0;
    k = std::min(k, n - k);
    double b = 1.0;
    for (int i = 1; i <= k; ++i)
        b = b * (n - k + i) / i;
    return std::round(b);
}

/// Volume of the unit ball in R^{n+1}.
inline double unit_ball_volume(int n)
{
    switch (n) {
    case 1: return M_PI;
    case 2: return 4.0 * M_PI / 3.0;
    default: {
        // pi^{d/2} / Gamma(d/2 + 1) with d = n + 1
        const double d = n + 1;
        return std::pow(M_PI, d / 2) / std::tgamma(d / 2 + 1);
    }
    }
}

class SpeedLaw {
public:
    SpeedLaw(int n, int k, double alpha) : n_(n), k_(k), alpha_(alpha)
    {
        if (n < 1 || n > kMaxDim)
            throw DomainError("speed law: n must be in [1, " + std::to_string(kMaxDim) + "]");
        if (k < 1 || k > n)
            throw DomainError("speed law: 1 <= k <= n required");
        if (!(alpha > 0.0) || !std::isfinite(alpha))
            throw DomainError("alpha > 0 required");
    }

    int n() const noexcept { return n_; }
    int k() const noexcept { return k_; }
    double alpha() const noexcept { return alpha_; }
    double homogeneity() const noexcept { return alpha_ * k_; }

    friend bool operator==(const SpeedLaw&, const SpeedLaw&) = default;

private:
    int n_;
    int k_;
    double alpha_;
};

/// Principal curvatures lambda_1..lambda_n at one point.
struct Curvatures {
    std::span<const double> values;
};

/// Principal radii r_i = 1/lambda_i at one point.
struct Radii {
    std::span<const double> values;
};

namespace detail {

using Scratch = std::array<double, kMaxDim + 2>;

inline void check_dim(std::size_t n)
{
    if (n < 1 || n > static_cast<std::size_t>(kMaxDim))
        throw DomainError("vector length must be in [1, " + std::to_string(kMaxDim) + "]");
}

inline void check_positive(std::span<const double> x, const char* what)
{
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0))
            throw PositivityError(std::string(what) + " entry " + std::to_string(i)
                                  + " is not positive (strict convexity violated)");
    }
}

// e[j] = E_j(x with entry `skip` removed), j = 0..kmax. skip < 0 keeps all.
inline void elem_sym_prefix(std::span<const double> x, int kmax, double* e, int skip = -1)
{
    e[0] = 1.0;
    for (int j = 1; j <= kmax; ++j)
        e[j] = 0.0;
    int used = 0;
    for (int i = 0; i < static_cast<int>(x.size()); ++i) {
        if (i == skip)
            continue;
        ++used;
        const double xi = x[i];
        for (int j = std::min(used, kmax); j >= 1; --j)
            e[j] += xi * e[j - 1];
    }
}

} // namespace detail

/// E_k(x) for 0 <= k <= n+1 (E_0 = 1, E_{n+1} = 0).
inline double elem_sym(std::span<const double> x, int k)
{
    detail::check_dim(x.size());
    const int n = static_cast<int>(x.size());
    if (k < 0 || k > n + 1)
        throw DomainError("elem_sym: k out of range");
    if (k == n + 1)
        return 0.0;
    detail::Scratch e;
    detail::elem_sym_prefix(x, k, e.data());
    return e[k];
}

/// All of E_0..E_n in one pass; out must hold n+1 entries.
inline void elem_sym_all(std::span<const double> x, std::span<double> out)
{
    detail::check_dim(x.size());
    detail::elem_sym_prefix(x, static_cast<int>(x.size()), out.data());
}

inline double norm_sym(std::span<const double> x, int k)
{
    const int n = static_cast<int>(x.size());
    if (k < 0 || k > n)
        throw DomainError("norm_sym: k out of range");
    return elem_sym(x, k) / binomial(n, k);
}

/// dE_k/dlambda_i = E_{k-1}(lambda without i), by the remove-one recurrence.
inline std::vector<double> elem_sym_grad(std::span<const double> x, int k)
{
    detail::check_dim(x.size());
    const int n = static_cast<int>(x.size());
    if (k < 1 || k > n)
        throw DomainError("elem_sym_grad: k out of range");
    std::vector<double> g(x.size());
    detail::Scratch e;
    for (int i = 0; i < n; ++i) {
        detail::elem_sym_prefix(x, k - 1, e.data(), i);
        g[i] = e[k - 1];
    }
    return g;
}

inline double speed(Curvatures lambda, const SpeedLaw& law)
{
    if (static_cast<int>(lambda.values.size()) != law.n())
        throw DomainError("speed: curvature vector length differs from n");
    detail::check_positive(lambda.values, "curvature");
    return std::pow(elem_sym(lambda.values, law.k()), law.alpha());
}

inline std::vector<double> speed_grad(Curvatures lambda, const SpeedLaw& law)
{
    if (static_cast<int>(lambda.values.size()) != law.n())
        throw DomainError("speed_grad: curvature vector length differs from n");
    detail::check_positive(lambda.values, "curvature");
    const double ek = elem_sym(lambda.values, law.k());
    const double factor = law.alpha() * std::pow(ek, law.alpha() - 1.0);
    auto g = elem_sym_grad(lambda.values, law.k());
    for (double& gi : g)
        gi *= factor;
#ifdef QFLOW_INJECT_SIGN_ERROR
    // Deliberate fault for the negative-control build of `qflow verify`.
    g.back() = -g.back();
#endif
    return g;
}

/// sigma(1/r) via E_k(1/r) = E_{n-k}(r) / E_n(r).
inline double speed_from_radii(Radii r, const SpeedLaw& law)
{
    if (static_cast<int>(r.values.size()) != law.n())
        throw DomainError("speed_from_radii: radii vector length differs from n");
    detail::check_positive(r.values, "radius");
    detail::Scratch e;
    detail::elem_sym_prefix(r.values, law.n(), e.data());
    return std::pow(e[law.n() - law.k()] / e[law.n()], law.alpha());
}

namespace detail {

// sigma(1/r) and E_n(r) from one pass over the radii.
inline void speed_and_measure(std::span<const double> r, const SpeedLaw& law, double& sigma, double& measure)
{
    check_positive(r, "radius");
    Scratch e;
    elem_sym_prefix(r, law.n(), e.data());
    const double ek = e[law.n() - law.k()] / e[law.n()];
    sigma = law.alpha() == 1.0 ? ek : std::pow(ek, law.alpha());
    measure = e[law.n()];
}

} // namespace detail

/// Phi(r) = sigma(1/r)^{-1/(alpha k)}; concave and 1-homogeneous.
inline double phi(Radii r, const SpeedLaw& law)
{
    return std::pow(speed_from_radii(r, law), -1.0 / law.homogeneity());
}

/// Relative residuals of the symmetric-polynomial identities at one point.
/// trace and euler vanish analytically; the two inequality slacks are
/// clamped at zero and positive only when the inequality is violated.
struct IdentityResiduals {
    double trace = 0.0;          // sum_i dE_k/dl_i l_i^2 - (H E_k - (k+1) E_{k+1})
    double trace_lower = 0.0;    // (k/n) H E_k - (H E_k - (k+1) E_{k+1}), clamped
    double maclaurin = 0.0;      // Ẽ_{k+1}^{1/(k+1)} - Ẽ_k^{1/k}, clamped
    double euler = 0.0;          // sum_i dsigma/dl_i l_i - alpha k sigma

    double max() const { return std::max({std::abs(trace), trace_lower, maclaurin, std::abs(euler)}); }
};

inline IdentityResiduals identity_residuals(Curvatures lambda, const SpeedLaw& law)
{
    const auto x = lambda.values;
    if (static_cast<int>(x.size()) != law.n())
        throw DomainError("identity_residuals: curvature vector length differs from n");
    detail::check_positive(x, "curvature");
    const int n = law.n();
    const int k = law.k();

    detail::Scratch e;
    detail::elem_sym_prefix(x, n, e.data());
    const double ek = e[k];
    const double ek1 = (k + 1 <= n) ? e[k + 1] : 0.0;
    const double h = e[1];

    const auto dek = elem_sym_grad(x, k);
    double lhs = 0.0;
    for (int i = 0; i < n; ++i)
        lhs += dek[i] * x[i] * x[i];
    const double rhs = h * ek - (k + 1) * ek1;

    IdentityResiduals res;
    const double trace_scale = std::max({std::abs(lhs), h * ek, (k + 1) * ek1});
    res.trace = (lhs - rhs) / trace_scale;
    res.trace_lower = std::max(0.0, (static_cast<double>(k) / n) * h * ek - rhs) / (h * ek);

    if (k < n) {
        const double lo = std::pow(ek1 / binomial(n, k + 1), 1.0 / (k + 1));
        const double hi = std::pow(ek / binomial(n, k), 1.0 / k);
        res.maclaurin = std::max(0.0, lo - hi) / hi;
    }

    const double sigma = std::pow(ek, law.alpha());
    const auto ds = speed_grad(lambda, law);
    double euler_lhs = 0.0;
    double euler_abs = 0.0;
    for (int i = 0; i < n; ++i) {
        euler_lhs += ds[i] * x[i];
        euler_abs += std::abs(ds[i] * x[i]);
    }
    const double target = law.homogeneity() * sigma;
    res.euler = (euler_lhs - target) / std::max(target, euler_abs);
    return res;
}

} // namespace qflow

#endif
