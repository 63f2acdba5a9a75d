// Chart-switched integration of the projective flow induced by a linear
// nonautonomous system: the workhorse behind every Evans evaluation.
#pragma once

#include <utility>

#include "wavespec/ode.hpp"
#include "wavespec/projective.hpp"

namespace wavespec {

struct TrackOptions {
    Tolerances tol;
    /// Affine coordinate magnitude that triggers a chart switch.
    double switch_threshold = 10.0;
    int max_switches = 10000;
};

struct TrackOutcome {
    ChartPoint end;
    int switch_count = 0;
};

namespace detail {
struct NoTrackObserver {
    StepAction operator()(double, const ChartPoint&) const { return StepAction::Continue; }
};
}  // namespace detail

/// Integrate the projectivised flow of x' = M(z) x from z0 to z1 (either
/// direction), hopping charts whenever a coordinate outgrows the threshold
/// or the current chart blows up in finite z.  The observer sees the state
/// after every accepted step and may stop the run early.
template <class MatrixFn, class Obs = detail::NoTrackObserver>
TrackOutcome track_projective(MatrixFn&& M, ChartPoint start, double z0, double z1,
                              const TrackOptions& opts, Obs&& user_obs = Obs{}) {
    ChartPoint cur = switch_chart(start, z0);  // begin in the best chart
    double z = z0;
    bool user_stop = false;

    while (z != z1 && !user_stop) {
        if (static_cast<int>(cur.switch_log.size()) > opts.max_switches)
            throw ModelError("track_projective: chart switch budget exhausted");

        const int chart = cur.chart;
        auto field = [&M, chart](double zz, const CVec& w) {
            return projective_rhs(M(zz), chart, w);
        };

        bool need_switch = false;
        double z_stop = z;
        CVec y_stop = cur.coords;
        try {
            auto [zf, yf, ff] = integrate_steps(
                field, cur.coords, z, z1, opts.tol,
                [&](const StepRecord& s) {
                    ChartPoint probe{cur.space, chart, *s.y1, {}};
                    if (user_obs(s.z1, probe) == StepAction::Stop) {
                        user_stop = true;
                        return StepAction::Stop;
                    }
                    if (s.y1->norm_inf() > opts.switch_threshold) return StepAction::Stop;
                    return StepAction::Continue;
                });
            z_stop = zf;
            y_stop = yf;
            need_switch = !user_stop && (z_stop != z1);
        } catch (const BlowupEvent& e) {
            // Finite-z blow-up of this chart: resume from the last good state
            // in a better chart.  If no progress is possible, rethrow.
            if (e.z == z && homogeneous(ChartPoint{cur.space, chart, e.y, {}}).norm_inf() <
                                opts.switch_threshold)
                throw;
            z_stop = e.z;
            y_stop = e.y;
            need_switch = true;
        } catch (const StiffnessError& e) {
            // A coordinate pole can also announce itself through step-size
            // collapse while every value is still finite; treat it the same.
            if (e.last_z == z &&
                homogeneous(ChartPoint{cur.space, chart, e.last_y, {}}).norm_inf() <
                    opts.switch_threshold)
                throw;
            z_stop = e.last_z;
            y_stop = e.last_y;
            need_switch = true;
        }

        cur.coords = y_stop;
        z = z_stop;
        if (need_switch) {
            ChartPoint switched = switch_chart(cur, z);
            if (switched.chart == cur.chart)
                throw ModelError("track_projective: blow-up in the best available chart");
            cur = std::move(switched);
        }
    }

    TrackOutcome out;
    out.switch_count = static_cast<int>(cur.switch_log.size());
    out.end = std::move(cur);
    return out;
}

}  // namespace wavespec
