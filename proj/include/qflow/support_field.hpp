#ifndef QFLOW_SUPPORT_FIELD_HPP
#define QFLOW_SUPPORT_FIELD_HPP

// Sampled support function of a convex body on a sphere-parameter grid.
//
// Two backends:
//   circle        S^1, theta_j = 2 pi j / N, spectral differentiation,
//                 periodic trapezoid quadrature.
//   axisymmetric  S^2 body of revolution about the z-axis, u = u(phi) with
//                 phi the polar angle of the normal; cell-centred nodes
//                 phi_j = (j + 1/2) pi / N (no node on a pole), 4th-order
//                 central differences with even ghost values across both
//                 poles, Fejer-type weights in cos(phi).

#include <qflow/errors.hpp>

#include <unsupported/Eigen/FFT>

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qflow {

using Point3 = std::array<double, 3>;

enum class Backend { circle, axisymmetric };

inline int dimension(Backend b) { return b == Backend::circle ? 1 : 2; }

inline std::string to_string(Backend b)
{
    return b == Backend::circle ? "CIRCLE" : "AXISYMMETRIC";
}

inline Backend backend_from_string(const std::string& s)
{
    if (s == "CIRCLE")
        return Backend::circle;
    if (s == "AXISYMMETRIC")
        return Backend::axisymmetric;
    throw ParseError("unknown backend '" + s + "'");
}

/// Immutable per-(backend, N) data: nodes, quadrature weights, and the
/// components of each normal along the admissible translation directions
/// (x, y for the circle; the symmetry axis for the axisymmetric grid).
class Grid {
public:
    static std::shared_ptr<const Grid> get(Backend backend, int size)
    {
        static std::mutex mutex;
        static std::map<std::pair<Backend, int>, std::shared_ptr<const Grid>> cache;
        std::lock_guard lock(mutex);
        auto& slot = cache[{backend, size}];
        if (!slot)
            slot = std::shared_ptr<const Grid>(new Grid(backend, size));
        return slot;
    }

    Backend backend() const noexcept { return backend_; }
    int size() const noexcept { return size_; }
    int dim() const noexcept { return dimension(backend_); }
    double spacing() const noexcept { return spacing_; }

    /// theta_j (circle) or phi_j (axisymmetric).
    const std::vector<double>& nodes() const noexcept { return nodes_; }
    /// sum_j w_j f_j approximates the integral of f over S^n.
    const std::vector<double>& weights() const noexcept { return weights_; }

    int translation_dim() const noexcept { return backend_ == Backend::circle ? 2 : 1; }
    /// <e_a, z_j> for translation basis vector a.
    double direction(int j, int a) const noexcept { return dirs_[j * translation_dim() + a]; }
    /// Basis vectors of the translation subspace, as points of R^3.
    Point3 translation_basis(int a) const noexcept
    {
        if (backend_ == Backend::axisymmetric)
            return {0.0, 0.0, 1.0};
        return a == 0 ? Point3{1.0, 0.0, 0.0} : Point3{0.0, 1.0, 0.0};
    }

    /// Largest magnitude of the discrete second-derivative symbol.
    double second_derivative_bound() const noexcept
    {
        if (backend_ == Backend::circle)
            return 0.25 * size_ * size_;
        return 16.0 / (3.0 * spacing_ * spacing_);
    }

private:
    Grid(Backend backend, int size) : backend_(backend), size_(size)
    {
        if (size < 16)
            throw DomainError("grid size must be at least 16");
        if (backend == Backend::circle && size % 2 != 0)
            throw DomainError("circle grid size must be even");
        nodes_.resize(size);
        weights_.resize(size);
        if (backend == Backend::circle) {
            spacing_ = 2.0 * M_PI / size;
            dirs_.resize(2 * size);
            for (int j = 0; j < size; ++j) {
                nodes_[j] = spacing_ * j;
                weights_[j] = spacing_;
                dirs_[2 * j] = std::cos(nodes_[j]);
                dirs_[2 * j + 1] = std::sin(nodes_[j]);
            }
        } else {
            spacing_ = M_PI / size;
            dirs_.resize(size);
            for (int j = 0; j < size; ++j) {
                const double phi = (j + 0.5) * spacing_;
                nodes_[j] = phi;
                dirs_[j] = std::cos(phi);
                double s = 0.0;
                for (int m = 1; m <= size / 2; ++m)
                    s += std::cos(2.0 * m * phi) / (4.0 * m * m - 1.0);
                weights_[j] = 2.0 * M_PI * (2.0 / size) * (1.0 - 2.0 * s);
            }
        }
    }

    Backend backend_;
    int size_;
    double spacing_ = 0.0;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<double> dirs_;
};

class SupportField {
public:
    SupportField(Backend backend, std::vector<double> u, Point3 origin_offset = {})
        : grid_(Grid::get(backend, static_cast<int>(u.size()))), u_(std::move(u)), offset_(origin_offset)
    {
        for (std::size_t j = 0; j < u_.size(); ++j) {
            if (!std::isfinite(u_[j]) || !(u_[j] > 0.0))
                throw DomainError("support value at node " + std::to_string(j)
                                  + " is not positive (origin not strictly inside)");
        }
    }

    template <class F>
    static SupportField from_function(Backend backend, int size, F&& f)
    {
        const auto grid = Grid::get(backend, size);
        std::vector<double> u(size);
        for (int j = 0; j < size; ++j)
            u[j] = f(grid->nodes()[j]);
        return SupportField(backend, std::move(u));
    }

    Backend backend() const noexcept { return grid_->backend(); }
    int size() const noexcept { return grid_->size(); }
    int dim() const noexcept { return grid_->dim(); }
    const Grid& grid() const noexcept { return *grid_; }
    std::span<const double> values() const noexcept { return u_; }
    double operator[](int j) const noexcept { return u_[j]; }
    const Point3& origin_offset() const noexcept { return offset_; }

    /// Same grid and origin bookkeeping, new support values.
    SupportField with_values(std::vector<double> u) const
    {
        if (static_cast<int>(u.size()) != size())
            throw DomainError("with_values: size mismatch");
        return SupportField(backend(), std::move(u), offset_);
    }

private:
    std::shared_ptr<const Grid> grid_;
    std::vector<double> u_;
    Point3 offset_;
};

struct Derivatives {
    std::vector<double> first;
    std::vector<double> second;
};

namespace detail {

inline Derivatives spectral_derivatives(std::span<const double> u)
{
    const int n = static_cast<int>(u.size());
    thread_local Eigen::FFT<double> fft;
    std::vector<double> src(u.begin(), u.end());
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, src);
    // Pack u' into the real part and u'' into the imaginary part of one
    // inverse transform; both are real signals.
    std::vector<std::complex<double>> packed(n);
    const std::complex<double> i1(0.0, 1.0);
    for (int j = 0; j < n; ++j) {
        const int m = (j <= n / 2) ? j : j - n;
        const bool nyquist = (2 * j == n);
        const std::complex<double> d1 = nyquist ? 0.0 : i1 * static_cast<double>(m) * spec[j];
        const std::complex<double> d2 = -static_cast<double>(m) * m * spec[j];
        packed[j] = d1 + i1 * d2;
    }
    std::vector<std::complex<double>> out;
    fft.inv(out, packed);
    Derivatives d{std::vector<double>(n), std::vector<double>(n)};
    for (int j = 0; j < n; ++j) {
        d.first[j] = out[j].real();
        d.second[j] = out[j].imag();
    }
    return d;
}

inline Derivatives even_fd_derivatives(std::span<const double> u, double h)
{
    const int n = static_cast<int>(u.size());
    auto at = [&](int j) {
        if (j < 0)
            j = -1 - j;
        else if (j >= n)
            j = 2 * n - 1 - j;
        return u[j];
    };
    Derivatives d{std::vector<double>(n), std::vector<double>(n)};
    for (int j = 0; j < n; ++j) {
        const double m2 = at(j - 2), m1 = at(j - 1), p1 = at(j + 1), p2 = at(j + 2);
        d.first[j] = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
        d.second[j] = (-p2 + 16.0 * p1 - 30.0 * u[j] + 16.0 * m1 - m2) / (12.0 * h * h);
    }
    return d;
}

} // namespace detail

/// First and second derivatives of u with respect to the grid parameter.
inline Derivatives derivatives(const SupportField& body)
{
    if (body.backend() == Backend::circle)
        return detail::spectral_derivatives(body.values());
    return detail::even_fd_derivatives(body.values(), body.grid().spacing());
}

/// Fixed-order quadrature sum over the grid.
inline double integrate(const Grid& grid, std::span<const double> f)
{
    const auto& w = grid.weights();
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j)
        s += w[j] * f[j];
    return s;
}

} // namespace qflow

#endif
