#ifndef QFLOW_FLOW_HPP
#define QFLOW_FLOW_HPP

// Volume-preserving flow  d/dt F = (-sigma + h(t)) nu  in Gauss-map form:
// at fixed normal direction the support function moves with the normal
// speed, so  d/dt u = -sigma(u) + h(u)  with h the area-average of sigma.

#include <qflow/convex_body.hpp>
#include <qflow/curvature_algebra.hpp>
#include <qflow/errors.hpp>
#include <qflow/support_field.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace qflow {

struct FlowConfig {
    SpeedLaw law{1, 1, 1.0};
    double t_end = 1.0;
    double dt_init = 1e-4;
    double dt_safety = 0.5;
    double roundness_stop = 0.0; // stop once R^+ - R_- falls below; 0 disables
    bool volume_correct = false;
    int max_step_retries = 8;
    int snapshot_stride = 50;
    /// Step-doubling acceptance threshold, relative to max u.
    double error_tolerance = 1e-7;

    void validate() const
    {
        if (!(t_end > 0.0))
            throw DomainError("t_end > 0 required");
        if (!(dt_init > 0.0))
            throw DomainError("dt_init > 0 required");
        if (!(dt_safety > 0.0 && dt_safety <= 1.0))
            throw DomainError("dt_safety must lie in (0, 1]");
        if (roundness_stop < 0.0)
            throw DomainError("roundness_stop >= 0 required");
        if (max_step_retries < 1)
            throw DomainError("max_step_retries >= 1 required");
        if (snapshot_stride < 1)
            throw DomainError("snapshot_stride >= 1 required");
    }
};

struct FlowState {
    SupportField body;
    double t = 0.0;
    double h = 0.0;
    double dt = 0.0;
    long step_count = 0;
    double vol0 = 0.0;
};

/// Retries exhausted; carries the last accepted state for post-mortem.
class StepFailure : public Error {
public:
    StepFailure(const std::string& cause, FlowState state)
        : Error("step failed: " + cause), cause_(cause), state_(std::move(state))
    {
    }
    const std::string& cause() const noexcept { return cause_; }
    const FlowState& state() const noexcept { return state_; }

private:
    std::string cause_;
    FlowState state_;
};

struct StepOutcome {
    double dt_used = 0.0;
    double dt_next = 0.0;
    int retries = 0;
    double error_estimate = 0.0;
    double volume_shift = 0.0; // constant added by volume correction
    std::string last_rejection;
};

namespace detail {

struct SpeedField {
    std::vector<double> sigma;
    std::vector<double> measure; // E_n(r_j), the Gauss-map area density
    double h = 0.0;
};

inline SpeedField speed_field(const SupportField& body, const RadiiField& rf, const SpeedLaw& law)
{
    if (law.n() != body.dim())
        throw DomainError("speed law dimension " + std::to_string(law.n()) + " does not match the "
                          + to_string(body.backend()) + " backend");
    SpeedField s;
    const int size = body.size();
    s.sigma.resize(size);
    s.measure.resize(size);
    for (int j = 0; j < size; ++j) {
        detail::speed_and_measure(rf.at(j), law, s.sigma[j], s.measure[j]);
    }
    const auto& w = body.grid().weights();
    double num = 0.0, den = 0.0;
    for (int j = 0; j < size; ++j) {
        num += w[j] * s.sigma[j] * s.measure[j];
        den += w[j] * s.measure[j];
    }
    s.h = num / den;
    return s;
}

} // namespace detail

/// h = (int sigma d(mu)) / A.
inline double mean_speed(const SupportField& body, const RadiiField& rf, const SpeedLaw& law)
{
    return detail::speed_field(body, rf, law).h;
}

inline double mean_speed(const SupportField& body, const SpeedLaw& law)
{
    return mean_speed(body, radii(body), law);
}

/// Explicit parabolic step ceiling:
/// dt <= safety * 2 / (|D2| * max_j sum_i dsigma/dr_i).
inline double stability_ceiling(const SupportField& body, const RadiiField& rf, const SpeedLaw& law, double safety)
{
    double worst = 0.0;
    std::vector<double> lambda(rf.dim());
    for (int j = 0; j < body.size(); ++j) {
        const auto r = rf.at(j);
        for (int i = 0; i < rf.dim(); ++i)
            lambda[i] = 1.0 / r[i];
        const auto g = speed_grad(Curvatures{lambda}, law);
        double d = 0.0;
        for (int i = 0; i < rf.dim(); ++i)
            d += std::abs(g[i]) * lambda[i] * lambda[i]; // chain rule through lambda = 1/r
        worst = std::max(worst, d);
    }
    return safety * 2.0 / (body.grid().second_derivative_bound() * worst);
}

inline FlowState initial_state(const SupportField& body, const FlowConfig& config)
{
    config.validate();
    const auto rf = radii(body);
    FlowState s{body};
    s.vol0 = volume(body, rf);
    s.h = mean_speed(body, rf, config.law);
    s.dt = config.dt_init;
    return s;
}

inline double volume_drift(const FlowState& state)
{
    return (volume(state.body) - state.vol0) / state.vol0;
}

/// Constant c with Vol(u + c) = target, by Newton iteration from c = 0
/// using dVol/dc = A.
inline double volume_correction(const SupportField& body, double target)
{
    double c = 0.0;
    std::vector<double> u(body.values().begin(), body.values().end());
    for (int it = 0; it < 50; ++it) {
        std::vector<double> shifted(u);
        for (double& x : shifted)
            x += c;
        const auto moved = body.with_values(std::move(shifted));
        const auto rf = radii(moved);
        const double g = volume(moved, rf) - target;
        // quadrature round-off keeps g from reaching zero below ~1e-15 relative
        if (std::abs(g) <= 1e-14 * std::abs(target))
            return c;
        const double dc = g / area(moved, rf);
        c -= dc;
        if (std::abs(dc) <= 1e-15 * (1.0 + std::abs(c)))
            return c;
    }
    throw NumericError("volume correction did not converge", c);
}

namespace detail {

inline std::vector<double> flow_rhs(const SupportField& body, const SpeedLaw& law)
{
    const auto rf = radii(body);
    const auto s = speed_field(body, rf, law);
    std::vector<double> f(body.size());
    for (int j = 0; j < body.size(); ++j)
        f[j] = -s.sigma[j] + s.h;
    return f;
}

inline SupportField axpy(const SupportField& body, double a, const std::vector<double>& f)
{
    std::vector<double> u(body.values().begin(), body.values().end());
    for (std::size_t j = 0; j < u.size(); ++j)
        u[j] += a * f[j];
    return body.with_values(std::move(u));
}

// Heun: u1 = u + dt f(u); u+ = u + dt/2 (f(u) + f(u1)). h re-evaluated per stage.
inline SupportField heun(const SupportField& body, const std::vector<double>& f0, double dt, const SpeedLaw& law)
{
    const auto stage = axpy(body, dt, f0);
    const auto f1 = flow_rhs(stage, law);
    std::vector<double> avg(f0.size());
    for (std::size_t j = 0; j < avg.size(); ++j)
        avg[j] = 0.5 * (f0[j] + f1[j]);
    return axpy(body, dt, avg);
}

} // namespace detail

/// One accepted Heun step with step-doubling error control. The attempted
/// step is min(state.dt, max_dt); on rejection dt is halved. The accepted
/// value is the two-half-step result.
inline StepOutcome step(FlowState& state, const FlowConfig& config, double max_dt = INFINITY)
{
    const auto& law = config.law;
    StepOutcome out;
    double dt = std::min(state.dt, max_dt);
    const auto f0 = detail::flow_rhs(state.body, law);
    double umax = 0.0;
    for (double x : state.body.values())
        umax = std::max(umax, x);
    const double tol = config.error_tolerance * umax;

    for (int attempt = 0;; ++attempt) {
        if (attempt > config.max_step_retries)
            throw StepFailure(out.last_rejection, state);
        try {
            const auto full = detail::heun(state.body, f0, dt, law);
            const auto half = detail::heun(state.body, f0, 0.5 * dt, law);
            const auto fh = detail::flow_rhs(half, law);
            auto two = detail::heun(half, fh, 0.5 * dt, law);
            double err = 0.0;
            for (int j = 0; j < two.size(); ++j)
                err = std::max(err, std::abs(two[j] - full[j]));
            if (!(err <= tol)) {
                out.last_rejection = "error estimate " + std::to_string(err) + " above tolerance at dt="
                                     + std::to_string(dt);
                dt *= 0.5;
                ++out.retries;
                continue;
            }
            auto rf = radii(two);
            if (config.volume_correct) {
                out.volume_shift = volume_correction(two, state.vol0);
                std::vector<double> u(two.values().begin(), two.values().end());
                for (double& x : u)
                    x += out.volume_shift;
                two = two.with_values(std::move(u));
                rf = radii(two);
            }
            out.error_estimate = err;
            out.dt_used = dt;
            state.body = std::move(two);
            state.t += dt;
            ++state.step_count;
            state.h = mean_speed(state.body, rf, law);
            double grow = 1.5;
            if (err > 0.0)
                grow = std::min(grow, 0.9 * std::cbrt(tol / err));
            const double base = out.retries == 0 ? std::max(dt, state.dt) : dt;
            out.dt_next = std::min(base * grow,
                                   stability_ceiling(state.body, rf, law, config.dt_safety));
            state.dt = out.dt_next;
            return out;
        } catch (const ConvexityLoss& e) {
            out.last_rejection = std::string("convexity loss: ") + e.what();
        } catch (const DomainError& e) {
            out.last_rejection = std::string("invalid stage: ") + e.what();
        }
        dt *= 0.5;
        ++out.retries;
    }
}

} // namespace qflow

#endif
