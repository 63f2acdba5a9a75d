// Adaptive Dormand-Prince 5(4) integration over complex states, forward or
// backward, with cubic Hermite dense output on the recorded trajectory.
#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <tuple>
#include <vector>

#include "wavespec/core.hpp"

namespace wavespec {

enum class StepAction { Continue, Stop };

/// Cubic Hermite interpolation on one accepted step.
inline CVec hermite_eval(double z0, const CVec& y0, const CVec& f0, double z1, const CVec& y1,
                         const CVec& f1, double z) {
    const double h = z1 - z0;
    const double t = (z - z0) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 1.0 - 3.0 * t2 + 2.0 * t3;
    const double h01 = 3.0 * t2 - 2.0 * t3;
    const double h10 = h * (t - 2.0 * t2 + t3);
    const double h11 = h * (t3 - t2);
    CVec out(y0.n);
    for (int i = 0; i < y0.n; ++i) out[i] = h00 * y0[i] + h01 * y1[i] + h10 * f0[i] + h11 * f1[i];
    return out;
}

inline CVec hermite_eval_derivative(double z0, const CVec& y0, const CVec& f0, double z1,
                                    const CVec& y1, const CVec& f1, double z) {
    const double h = z1 - z0;
    const double t = (z - z0) / h;
    const double t2 = t * t;
    const double g00 = (6.0 * t2 - 6.0 * t) / h;
    const double g01 = (6.0 * t - 6.0 * t2) / h;
    const double g10 = 1.0 - 4.0 * t + 3.0 * t2;
    const double g11 = 3.0 * t2 - 2.0 * t;
    CVec out(y0.n);
    for (int i = 0; i < y0.n; ++i) out[i] = g00 * y0[i] + g01 * y1[i] + g10 * f0[i] + g11 * f1[i];
    return out;
}

/// Accepted integration nodes with state and derivative; supports dense
/// evaluation between nodes and clamps outside the covered span.
struct Trajectory {
    struct Node {
        double z;
        CVec y;
        CVec dy;
    };
    std::vector<Node> nodes;
    bool forward = true;

    double z_begin() const { return nodes.front().z; }
    double z_end() const { return nodes.back().z; }

    // Index of the node starting the interval containing z (integration order).
    std::size_t locate(double z) const {
        const double s = forward ? 1.0 : -1.0;
        std::size_t lo = 0, hi = nodes.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            if (s * nodes[mid].z <= s * z)
                lo = mid;
            else
                hi = mid;
        }
        return lo;
    }

    CVec eval(double z) const {
        const double s = forward ? 1.0 : -1.0;
        if (s * z <= s * nodes.front().z) return nodes.front().y;
        if (s * z >= s * nodes.back().z) return nodes.back().y;
        const std::size_t i = locate(z);
        const Node& a = nodes[i];
        const Node& b = nodes[i + 1];
        return hermite_eval(a.z, a.y, a.dy, b.z, b.y, b.dy, z);
    }

    CVec eval_derivative(double z) const {
        const double s = forward ? 1.0 : -1.0;
        if (s * z <= s * nodes.front().z) return nodes.front().dy;
        if (s * z >= s * nodes.back().z) return nodes.back().dy;
        const std::size_t i = locate(z);
        const Node& a = nodes[i];
        const Node& b = nodes[i + 1];
        return hermite_eval_derivative(a.z, a.y, a.dy, b.z, b.y, b.dy, z);
    }
};

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double dp_c2 = 1.0 / 5, dp_c3 = 3.0 / 10, dp_c4 = 4.0 / 5, dp_c5 = 8.0 / 9;
inline constexpr double dp_a21 = 1.0 / 5;
inline constexpr double dp_a31 = 3.0 / 40, dp_a32 = 9.0 / 40;
inline constexpr double dp_a41 = 44.0 / 45, dp_a42 = -56.0 / 15, dp_a43 = 32.0 / 9;
inline constexpr double dp_a51 = 19372.0 / 6561, dp_a52 = -25360.0 / 2187,
                        dp_a53 = 64448.0 / 6561, dp_a54 = -212.0 / 729;
inline constexpr double dp_a61 = 9017.0 / 3168, dp_a62 = -355.0 / 33, dp_a63 = 46732.0 / 5247,
                        dp_a64 = 49.0 / 176, dp_a65 = -5103.0 / 18656;
inline constexpr double dp_b1 = 35.0 / 384, dp_b3 = 500.0 / 1113, dp_b4 = 125.0 / 192,
                        dp_b5 = -2187.0 / 6784, dp_b6 = 11.0 / 84;
inline constexpr double dp_e1 = 71.0 / 57600, dp_e3 = -71.0 / 16695, dp_e4 = 71.0 / 1920,
                        dp_e5 = -17253.0 / 339200, dp_e6 = 22.0 / 525, dp_e7 = -1.0 / 40;

}  // namespace detail

struct StepRecord {
    double z0, z1;
    const CVec* y0;
    const CVec* y1;
    const CVec* f0;
    const CVec* f1;
};

/// Core adaptive loop.  Calls obs after every accepted step; an observer
/// returning StepAction::Stop ends the run at that node.  Does not record
/// nodes.  Returns the final accepted (z, y, f).
template <class F, class Obs>
std::tuple<double, CVec, CVec> integrate_steps(F&& f, CVec y0, double z0, double z1,
                                               const Tolerances& tol, Obs&& obs) {
    const double span = z1 - z0;
    if (span == 0.0) {
        CVec f0 = f(z0, y0);
        return {z0, y0, f0};
    }
    const double dir = (span > 0.0) ? 1.0 : -1.0;
    const double hmin = 1e-12 * std::abs(span);

    double z = z0;
    CVec y = y0;
    CVec k1 = f(z, y);
    if (!k1.finite()) throw BlowupEvent("field non-finite at initial point", z, y);

    // Initial step from the scale of y and f.
    double h = dir * std::min(std::abs(span) / 10.0,
                              std::max(1e-8, 0.01 * (1.0 + y.norm_inf()) / (1.0 + k1.norm_inf())));

    double facold = 1e-4;
    const int n = y.n;
    std::uint64_t steps = 0;

    while (dir * (z1 - z) > 0.0) {
        if (++steps > 200000000ull)
            throw StiffnessError("step budget exhausted", z, y);
        if (dir * (z + h) > dir * z1) h = z1 - z;
        if (std::abs(h) < hmin) throw StiffnessError("step size collapsed", z, y);

        using namespace detail;
        CVec t(n);
        for (int i = 0; i < n; ++i) t[i] = y[i] + h * (dp_a21 * k1[i]);
        const CVec k2 = f(z + dp_c2 * h, t);
        for (int i = 0; i < n; ++i) t[i] = y[i] + h * (dp_a31 * k1[i] + dp_a32 * k2[i]);
        const CVec k3 = f(z + dp_c3 * h, t);
        for (int i = 0; i < n; ++i)
            t[i] = y[i] + h * (dp_a41 * k1[i] + dp_a42 * k2[i] + dp_a43 * k3[i]);
        const CVec k4 = f(z + dp_c4 * h, t);
        for (int i = 0; i < n; ++i)
            t[i] = y[i] + h * (dp_a51 * k1[i] + dp_a52 * k2[i] + dp_a53 * k3[i] + dp_a54 * k4[i]);
        const CVec k5 = f(z + dp_c5 * h, t);
        for (int i = 0; i < n; ++i)
            t[i] = y[i] + h * (dp_a61 * k1[i] + dp_a62 * k2[i] + dp_a63 * k3[i] + dp_a64 * k4[i] +
                               dp_a65 * k5[i]);
        const CVec k6 = f(z + h, t);
        CVec ynew(n);
        for (int i = 0; i < n; ++i)
            ynew[i] = y[i] + h * (dp_b1 * k1[i] + dp_b3 * k3[i] + dp_b4 * k4[i] + dp_b5 * k5[i] +
                                  dp_b6 * k6[i]);
        const CVec k7 = f(z + h, ynew);  // FSAL stage

        if (!ynew.finite() || !k7.finite() || !k2.finite() || !k3.finite() || !k4.finite() ||
            !k5.finite() || !k6.finite())
            throw BlowupEvent("field or state non-finite during step", z, y);

        double err2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const Complex e = h * (dp_e1 * k1[i] + dp_e3 * k3[i] + dp_e4 * k4[i] + dp_e5 * k5[i] +
                                   dp_e6 * k6[i] + dp_e7 * k7[i]);
            const double sc =
                tol.abs + tol.rel * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double r = std::abs(e) / sc;
            err2 += r * r;
        }
        const double err = std::sqrt(err2 / n);

        if (err <= 1.0) {
            const double zprev = z;
            const CVec yprev = y;
            const CVec fprev = k1;
            z += h;
            y = ynew;
            k1 = k7;
            facold = std::max(err, 1e-4);
            double growth = 0.9 * std::pow(err > 0.0 ? err : 1e-16, -0.17) * std::pow(facold, 0.04);
            growth = std::clamp(growth, 0.2, 10.0);
            h *= growth;
            if (obs(StepRecord{zprev, z, &yprev, &y, &fprev, &k1}) == StepAction::Stop)
                return {z, y, k1};
        } else {
            double shrink = 0.9 * std::pow(err, -0.2);
            shrink = std::clamp(shrink, 0.1, 1.0);
            h *= shrink;
        }
    }
    return {z, y, k1};
}

/// Recording variant: integrates over [z0, z1] and returns the trajectory.
template <class F>
Trajectory integrate(F&& f, const CVec& y0, double z0, double z1, const Tolerances& tol) {
    Trajectory traj;
    traj.forward = (z1 >= z0);
    CVec f0 = f(z0, y0);
    traj.nodes.push_back({z0, y0, f0});
    integrate_steps(
        f, y0, z0, z1, tol, [&traj](const StepRecord& s) {
            traj.nodes.push_back({s.z1, *s.y1, *s.f1});
            return StepAction::Continue;
        });
    return traj;
}

}  // namespace wavespec
