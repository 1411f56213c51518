#ifndef QFLOW_RUN_HPP
#define QFLOW_RUN_HPP

#include <qflow/convex_body.hpp>
#include <qflow/diagnostics.hpp>
#include <qflow/flow.hpp>

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace qflow {

struct TrajectoryEntry {
    FlowState state;
    DiagnosticsRecord record;
};

struct Trajectory {
    std::vector<TrajectoryEntry> entries;
    bool failed = false;
    std::string failure; // cause of the aborting step failure
    bool stopped_round = false;
    int recenterings = 0;

    std::vector<DiagnosticsRecord> records() const
    {
        std::vector<DiagnosticsRecord> r;
        r.reserve(entries.size());
        for (const auto& e : entries)
            r.push_back(e.record);
        return r;
    }
    const FlowState& final_state() const { return entries.back().state; }
};

/// Integrates until t_end or until R^+ - R_- drops below roundness_stop
/// (tested at each recorded state). Records every snapshot_stride accepted
/// steps and at both ends. A step failure ends the run with the partial
/// trajectory and the failure cause.
inline Trajectory run(const SupportField& initial, const FlowConfig& config)
{
    Trajectory traj;
    FlowState state = initial_state(initial, config);
    auto record = [&] {
        traj.entries.push_back({state, snapshot(state, config.law)});
        const auto& rec = traj.entries.back().record;
        return config.roundness_stop > 0.0 && rec.R_plus - rec.R_minus < config.roundness_stop;
    };
    if (record()) {
        traj.stopped_round = true;
        return traj;
    }
    const double t_eps = 1e-12 * config.t_end;
    while (state.t < config.t_end - t_eps) {
        const auto u = state.body.values();
        const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
        if (*lo < 0.2 * *hi) {
            state.body = recenter(state.body);
            ++traj.recenterings;
        }
        try {
            step(state, config, config.t_end - state.t);
        } catch (const StepFailure& e) {
            traj.failed = true;
            traj.failure = e.cause();
            break;
        }
        if (state.step_count % config.snapshot_stride == 0 && record()) {
            traj.stopped_round = true;
            break;
        }
    }
    if (traj.entries.back().state.step_count != state.step_count)
        record();
    return traj;
}

} // namespace qflow

#endif
