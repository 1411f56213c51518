#ifndef QFLOW_CONVEX_BODY_HPP
#define QFLOW_CONVEX_BODY_HPP

// Geometry of a strictly convex body given by its sampled support function:
// principal radii, quadrature functionals (area, volume, mixed volumes),
// inner/outer radii, and the integral identities and inequalities that
// hold for every convex body.
//
// All integrals are pulled back to the unit sphere through the Gauss map,
// where d(mu) = E_n(r) dz and E_k(1/r) E_n(r) = E_{n-k}(r).

#include <qflow/curvature_algebra.hpp>
#include <qflow/errors.hpp>
#include <qflow/minimax.hpp>
#include <qflow/support_field.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace qflow {

// ---------------------------------------------------------------------------
// Construction

namespace shape {

struct Sphere {
    double radius = 1.0;
    Backend backend = Backend::circle;
};

/// Planar ellipse with semi-axes a (along x) and b (along y).
struct Ellipse {
    double a = 2.0;
    double b = 1.0;
};

/// Ellipsoid of revolution with semi-axes (a, a, c), c along the axis.
struct EllipsoidRev {
    double a = 1.0;
    double c = 1.6;
};

/// 1 + low-order trigonometric (circle) or Legendre (axisymmetric)
/// perturbation, shrunk until the smallest principal radius reaches margin.
struct RandomTrig {
    std::uint64_t seed = 0;
    int modes = 4;
    double margin = 0.1;
    Backend backend = Backend::circle;
};

} // namespace shape

using ShapeSpec = std::variant<shape::Sphere, shape::Ellipse, shape::EllipsoidRev, shape::RandomTrig>;

class RadiiField {
public:
    RadiiField(int dim, int size, std::vector<double> r) : dim_(dim), size_(size), r_(std::move(r))
    {
        margin_ = r_.empty() ? 0.0 : r_[0];
        for (std::size_t i = 0; i < r_.size() && !std::isnan(margin_); ++i) {
            if (!(r_[i] >= margin_)) {
                margin_ = r_[i];
                margin_node_ = static_cast<int>(i) / dim_;
            }
        }
    }

    int dim() const noexcept { return dim_; }
    int size() const noexcept { return size_; }
    std::span<const double> at(int j) const noexcept
    {
        return std::span<const double>(r_).subspan(static_cast<std::size_t>(j) * dim_, dim_);
    }
    std::span<const double> flat() const noexcept { return r_; }
    /// Smallest radius over all nodes and indices.
    double margin() const noexcept { return margin_; }
    int margin_node() const noexcept { return margin_node_; }

private:
    int dim_;
    int size_;
    std::vector<double> r_;
    double margin_ = 0.0;
    int margin_node_ = 0;
};

namespace detail {

inline RadiiField compute_radii(const SupportField& body, const Derivatives& d)
{
    const int size = body.size();
    const auto u = body.values();
    if (body.backend() == Backend::circle) {
        std::vector<double> r(size);
        for (int j = 0; j < size; ++j)
            r[j] = d.second[j] + u[j];
        return RadiiField(1, size, std::move(r));
    }
    const auto& phi = body.grid().nodes();
    std::vector<double> r(2 * static_cast<std::size_t>(size));
    for (int j = 0; j < size; ++j) {
        const double meridian = d.second[j] + u[j];
        const double parallel = d.first[j] / std::tan(phi[j]) + u[j];
        // Umbilic limit r2 -> r1 on the axis, blended over the two nodes
        // nearest each pole.
        const int from_pole = std::min(j, size - 1 - j);
        const double w = from_pole == 0 ? 1.0 : (from_pole == 1 ? 0.5 : 0.0);
        r[2 * j] = meridian;
        r[2 * j + 1] = w * meridian + (1.0 - w) * parallel;
    }
    return RadiiField(2, size, std::move(r));
}

inline double mean(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

} // namespace detail

/// Principal radii at every node. Throws ConvexityLoss when the smallest
/// radius is not above 1e-8 times the mean radius.
inline RadiiField radii(const SupportField& body)
{
    RadiiField rf = detail::compute_radii(body, derivatives(body));
    const double floor = 1e-8 * std::abs(detail::mean(rf.flat()));
    if (!(rf.margin() > floor))
        throw ConvexityLoss("convexity lost at node " + std::to_string(rf.margin_node())
                                + " (smallest radius " + std::to_string(rf.margin()) + ")",
                            rf.margin_node(), rf.margin());
    return rf;
}

namespace detail {

// Per-node E_0..E_n of the radii.
inline std::vector<double> radii_syms(const RadiiField& rf)
{
    const int n = rf.dim();
    std::vector<double> e(static_cast<std::size_t>(rf.size()) * (n + 1));
    for (int j = 0; j < rf.size(); ++j)
        elem_sym_all(rf.at(j), std::span<double>(e).subspan(static_cast<std::size_t>(j) * (n + 1), n + 1));
    return e;
}

} // namespace detail

inline SupportField make_body(const ShapeSpec& spec, int size)
{
    return std::visit(
        [size](const auto& s) -> SupportField {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, shape::Sphere>) {
                if (!(s.radius > 0.0))
                    throw ConstructionError("sphere radius must be positive");
                return SupportField(s.backend, std::vector<double>(size, s.radius));
            } else if constexpr (std::is_same_v<T, shape::Ellipse>) {
                if (!(s.a > 0.0 && s.b > 0.0))
                    throw ConstructionError("ellipse semi-axes must be positive");
                return SupportField::from_function(Backend::circle, size, [&](double t) {
                    return std::sqrt(s.a * s.a * std::cos(t) * std::cos(t) + s.b * s.b * std::sin(t) * std::sin(t));
                });
            } else if constexpr (std::is_same_v<T, shape::EllipsoidRev>) {
                if (!(s.a > 0.0 && s.c > 0.0))
                    throw ConstructionError("ellipsoid semi-axes must be positive");
                return SupportField::from_function(Backend::axisymmetric, size, [&](double p) {
                    return std::sqrt(s.c * s.c * std::cos(p) * std::cos(p) + s.a * s.a * std::sin(p) * std::sin(p));
                });
            } else {
                if (s.modes < 1)
                    throw ConstructionError("random_trig needs at least one mode");
                std::mt19937_64 rng(s.seed);
                std::uniform_real_distribution<double> coef(-1.0, 1.0);
                std::vector<double> ca(s.modes + 1), cb(s.modes + 1);
                for (int m = 1; m <= s.modes; ++m) {
                    ca[m] = coef(rng) / m;
                    cb[m] = coef(rng) / m;
                }
                const auto grid = Grid::get(s.backend, size);
                double amplitude = 1.0;
                for (int attempt = 0; attempt < 60; ++attempt, amplitude *= 0.5) {
                    std::vector<double> u(size);
                    bool positive = true;
                    for (int j = 0; j < size; ++j) {
                        const double t = grid->nodes()[j];
                        double p = 0.0;
                        for (int m = 1; m <= s.modes; ++m) {
                            if (s.backend == Backend::circle)
                                p += ca[m] * std::cos(m * t) + cb[m] * std::sin(m * t);
                            else
                                p += ca[m] * std::legendre(m, std::cos(t));
                        }
                        u[j] = 1.0 + amplitude * p;
                        positive = positive && u[j] > 0.0;
                    }
                    if (!positive)
                        continue;
                    SupportField body(s.backend, std::move(u));
                    const auto rf = detail::compute_radii(body, derivatives(body));
                    if (rf.margin() >= s.margin)
                        return body;
                }
                throw ConstructionError("random_trig: could not reach convexity margin "
                                        + std::to_string(s.margin));
            }
        },
        spec);
}

// ---------------------------------------------------------------------------
// Quadrature functionals

/// Surface measure A = int E_n(r) dz.
inline double area(const SupportField& body, const RadiiField& rf)
{
    const int n = rf.dim();
    std::vector<double> f(body.size());
    for (int j = 0; j < body.size(); ++j)
        f[j] = elem_sym(rf.at(j), n);
    return integrate(body.grid(), f);
}

/// Enclosed volume (n+1)^{-1} int u E_n(r) dz.
inline double volume(const SupportField& body, const RadiiField& rf)
{
    const int n = rf.dim();
    std::vector<double> f(body.size());
    for (int j = 0; j < body.size(); ++j)
        f[j] = body[j] * elem_sym(rf.at(j), n);
    return integrate(body.grid(), f) / (n + 1);
}

/// int_M E_k(lambda) d(mu) = int E_{n-k}(r) dz, 0 <= k <= n.
inline double curvature_integral(const SupportField& body, const RadiiField& rf, int k)
{
    const int n = rf.dim();
    if (k < 0 || k > n)
        throw DomainError("curvature_integral: k out of range");
    std::vector<double> f(body.size());
    for (int j = 0; j < body.size(); ++j)
        f[j] = elem_sym(rf.at(j), n - k);
    return integrate(body.grid(), f);
}

/// V_0..V_{n+1}; V_{n+1} = volume, V_{n-k} = int Ẽ_k d(mu) / (n+1).
inline std::vector<double> mixed_volumes(const SupportField& body, const RadiiField& rf)
{
    const int n = rf.dim();
    std::vector<double> v(n + 2);
    const auto e = detail::radii_syms(rf);
    for (int k = 0; k <= n; ++k) {
        std::vector<double> f(body.size());
        for (int j = 0; j < body.size(); ++j)
            f[j] = e[static_cast<std::size_t>(j) * (n + 1) + (n - k)];
        v[n - k] = integrate(body.grid(), f) / (binomial(n, k) * (n + 1));
    }
    v[n + 1] = volume(body, rf);
    return v;
}

inline double area(const SupportField& body) { return area(body, radii(body)); }
inline double volume(const SupportField& body) { return volume(body, radii(body)); }
inline double curvature_integral(const SupportField& body, int k)
{
    return curvature_integral(body, radii(body), k);
}
inline std::vector<double> mixed_volumes(const SupportField& body) { return mixed_volumes(body, radii(body)); }

/// Vol(Omega + tB), computed by evaluating the volume of u + t.
inline double steiner_volume(const SupportField& body, double t)
{
    std::vector<double> u(body.values().begin(), body.values().end());
    for (double& x : u)
        x += t;
    return volume(body.with_values(std::move(u)));
}

/// sum_i binom(n+1, i) V_{n+1-i} t^i for mixed volumes V_0..V_{n+1}.
inline double steiner_polynomial(std::span<const double> v, double t)
{
    const int n = static_cast<int>(v.size()) - 2;
    double s = 0.0;
    double tp = 1.0;
    for (int i = 0; i <= n + 1; ++i, tp *= t)
        s += binomial(n + 1, i) * v[n + 1 - i] * tp;
    return s;
}

/// I_{n-k+1} = V_{n-k+1}^{n+1} / Vol^{n-k+1}, 1 <= k <= n.
inline double iso_ratio(std::span<const double> v, int k)
{
    const int n = static_cast<int>(v.size()) - 2;
    if (k < 1 || k > n)
        throw DomainError("iso_ratio: 1 <= k <= n required");
    const double vol = v[n + 1];
    if (!(vol > 0.0))
        throw DomainError("iso_ratio: zero volume");
    return std::pow(v[n - k + 1], n + 1) / std::pow(vol, n - k + 1);
}

inline double iso_ratio(const SupportField& body, int k) { return iso_ratio(mixed_volumes(body), k); }

/// int Ẽ_l d(mu) - int u Ẽ_{l+1} d(mu), 0 <= l <= n-1; zero for any interior origin.
inline double minkowski_residual(const SupportField& body, const RadiiField& rf, int l)
{
    const int n = rf.dim();
    if (l < 0 || l > n - 1)
        throw DomainError("minkowski_residual: 0 <= l <= n-1 required");
    const auto e = detail::radii_syms(rf);
    const double bl = binomial(n, l);
    const double bl1 = binomial(n, l + 1);
    std::vector<double> f(body.size());
    for (int j = 0; j < body.size(); ++j) {
        const double* ej = &e[static_cast<std::size_t>(j) * (n + 1)];
        f[j] = ej[n - l] / bl - body[j] * ej[n - l - 1] / bl1;
    }
    return integrate(body.grid(), f);
}

inline double minkowski_residual(const SupportField& body, int l)
{
    return minkowski_residual(body, radii(body), l);
}

/// int 1/Ẽ_1 d(mu) - (n+1) Vol, nonnegative with equality for spheres.
inline double ros_deficit(const SupportField& body, const RadiiField& rf)
{
    const int n = rf.dim();
    const auto e = detail::radii_syms(rf);
    std::vector<double> f(body.size());
    for (int j = 0; j < body.size(); ++j) {
        const double* ej = &e[static_cast<std::size_t>(j) * (n + 1)];
        // 1/Ẽ_1(1/r) = n E_n(r) / E_{n-1}(r), times d(mu) = E_n(r) dz
        f[j] = n * ej[n] * ej[n] / ej[n - 1];
    }
    return integrate(body.grid(), f) - (n + 1) * volume(body, rf);
}

inline double ros_deficit(const SupportField& body) { return ros_deficit(body, radii(body)); }

/// kappa^{m-l} - V_l^m / V_m^l for 1 <= m < l <= n+1; nonnegative, zero on balls.
inline double af_deficit(std::span<const double> v, int m, int l)
{
    const int n = static_cast<int>(v.size()) - 2;
    if (m < 1 || m >= l || l > n + 1)
        throw DomainError("af_deficit: 1 <= m < l <= n+1 required");
    return std::pow(unit_ball_volume(n), m - l) - std::pow(v[l], m) / std::pow(v[m], l);
}

inline double af_deficit(const SupportField& body, int m, int l) { return af_deficit(mixed_volumes(body), m, l); }

// ---------------------------------------------------------------------------
// Radii bounds, translations, distance to balls

struct RadiiBounds {
    double inner = 0.0;
    double outer = 0.0;
    Point3 inner_center{};
    Point3 outer_center{};
};

namespace detail {

inline Point3 to_point(const Grid& grid, std::span<const double> x)
{
    Point3 p{};
    for (int a = 0; a < grid.translation_dim(); ++a) {
        const Point3 e = grid.translation_basis(a);
        for (int i = 0; i < 3; ++i)
            p[i] += x[a] * e[i];
    }
    return p;
}

inline double support_shift(const Grid& grid, int j, const Point3& q)
{
    double s = 0.0;
    for (int a = 0; a < grid.translation_dim(); ++a) {
        const Point3 e = grid.translation_basis(a);
        s += grid.direction(j, a) * (e[0] * q[0] + e[1] * q[1] + e[2] * q[2]);
    }
    return s;
}

} // namespace detail

/// Inradius and circumradius over the grid directions, with their centers
/// relative to the current origin.
inline RadiiBounds radii_bounds(const SupportField& body)
{
    const Grid& grid = body.grid();
    const int m = grid.translation_dim();
    const int size = body.size();
    std::vector<double> c(static_cast<std::size_t>(size) * m), b(size);
    for (int j = 0; j < size; ++j) {
        for (int a = 0; a < m; ++a)
            c[static_cast<std::size_t>(j) * m + a] = grid.direction(j, a);
        b[j] = body[j];
    }
    RadiiBounds out;
    const auto outer = minimax(m, c, b);
    out.outer = outer.value;
    out.outer_center = detail::to_point(grid, outer.x);

    for (auto& x : c)
        x = -x;
    for (auto& x : b)
        x = -x;
    const auto inner = minimax(m, c, b);
    out.inner = -inner.value;
    out.inner_center = detail::to_point(grid, inner.x);
    return out;
}

/// Support function of the body seen from origin q: u_j - <q, z_j>.
/// Only the components of q along the grid's translation subspace count.
inline SupportField translate_origin(const SupportField& body, const Point3& q)
{
    std::vector<double> u(body.values().begin(), body.values().end());
    for (int j = 0; j < body.size(); ++j)
        u[j] -= detail::support_shift(body.grid(), j, q);
    Point3 offset = body.origin_offset();
    for (int i = 0; i < 3; ++i)
        offset[i] += q[i];
    return SupportField(body.backend(), std::move(u), offset);
}

/// Moves the origin to the circumcenter.
inline SupportField recenter(const SupportField& body)
{
    return translate_origin(body, radii_bounds(body).outer_center);
}

struct BallFit {
    double distance = 0.0; // sup-norm of the support-function difference
    double radius = 0.0;
    Point3 center{};
};

/// Best-fit ball in the Hausdorff (support sup-norm) sense.
inline BallFit fit_ball(const SupportField& body)
{
    const Grid& grid = body.grid();
    const int m = grid.translation_dim();
    const int size = body.size();
    const int vars = m + 1; // center components, then radius
    std::vector<double> c(static_cast<std::size_t>(2 * size) * vars), b(2 * size);
    for (int j = 0; j < size; ++j) {
        for (int a = 0; a < m; ++a) {
            c[static_cast<std::size_t>(j) * vars + a] = grid.direction(j, a);
            c[static_cast<std::size_t>(size + j) * vars + a] = -grid.direction(j, a);
        }
        c[static_cast<std::size_t>(j) * vars + m] = 1.0;
        c[static_cast<std::size_t>(size + j) * vars + m] = -1.0;
        b[j] = body[j];
        b[size + j] = -body[j];
    }
    const auto res = minimax(vars, c, b);
    BallFit fit;
    fit.distance = std::max(0.0, res.value);
    fit.radius = res.x[m];
    fit.center = detail::to_point(grid, std::span<const double>(res.x).first(m));
    return fit;
}

inline double hausdorff_to_ball(const SupportField& body) { return fit_ball(body).distance; }

/// Point of the boundary with outward normal at node j, in the plane of the
/// grid parameter: (x, y) for the circle, (rho, z) meridian for the
/// axisymmetric backend. Coordinates include the origin offset.
inline std::vector<std::array<double, 2>> reconstruct(const SupportField& body)
{
    const auto d = derivatives(body);
    const auto& t = body.grid().nodes();
    const auto& off = body.origin_offset();
    std::vector<std::array<double, 2>> pts(body.size());
    for (int j = 0; j < body.size(); ++j) {
        const double u = body[j];
        const double c = std::cos(t[j]);
        const double s = std::sin(t[j]);
        if (body.backend() == Backend::circle)
            pts[j] = {u * c - d.first[j] * s + off[0], u * s + d.first[j] * c + off[1]};
        else
            pts[j] = {u * s + d.first[j] * c, u * c - d.first[j] * s + off[2]};
    }
    return pts;
}

} // namespace qflow

#endif
