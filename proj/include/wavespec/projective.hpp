// Affine charts on CP^1 / CP^2 and the Pluecker picture of Gr(2,3), plus the
// generic chart Riccati right-hand side induced by a linear flow.
#pragma once

#include <vector>

#include "wavespec/core.hpp"
#include "wavespec/linalg.hpp"

namespace wavespec {

enum class Space { CP1, CP2, Gr23 };

/// Homogeneous dimension of the ambient projective space (Gr(2,3) is handled
/// through its Pluecker embedding onto CP^2, so it also lives in C^3).
inline int homogeneous_dim(Space s) { return s == Space::CP1 ? 2 : 3; }

struct SwitchEvent {
    double z;
    int from;
    int to;
};

/// A point held in one affine chart: chart index k means homogeneous
/// coordinate k is normalised to 1 and coords lists the remaining
/// coordinates in index order.
struct ChartPoint {
    Space space = Space::CP1;
    int chart = 0;
    CVec coords;  // size = homogeneous_dim - 1
    std::vector<SwitchEvent> switch_log;
};

/// Homogeneous representative with the chart coordinate set to 1.
inline CVec homogeneous(const ChartPoint& p) {
    const int dim = homogeneous_dim(p.space);
    CVec h(dim);
    int j = 0;
    for (int i = 0; i < dim; ++i) h[i] = (i == p.chart) ? Complex(1.0) : p.coords[j++];
    return h;
}

/// Affine coordinates of a homogeneous vector in chart k.
inline CVec to_chart(const CVec& h, int chart) {
    const double scale = h.norm_inf();
    if (std::abs(h[chart]) < 1e-14 * scale || scale == 0.0)
        throw ChartUnavailableError("to_chart: homogeneous coordinate vanishes in requested chart");
    CVec w(h.n - 1);
    int j = 0;
    for (int i = 0; i < h.n; ++i)
        if (i != chart) w[j++] = h[i] / h[chart];
    return w;
}

/// Chart with the largest-magnitude homogeneous coordinate (ties: lowest index).
inline int best_chart(const CVec& h) {
    int k = 0;
    for (int i = 1; i < h.n; ++i)
        if (std::abs(h[i]) > std::abs(h[k])) k = i;
    return k;
}

/// Chart-point form of a homogeneous vector, held in its best chart.
inline ChartPoint from_homogeneous(Space space, const CVec& h) {
    const int k = best_chart(h);
    return {space, k, to_chart(h, k), {}};
}

/// Re-express a point in the best available chart, logging the transition.
/// After a switch every affine coordinate has magnitude <= 1.
inline ChartPoint switch_chart(const ChartPoint& p, double z) {
    const CVec h = homogeneous(p);
    const int target = best_chart(h);
    ChartPoint q = p;
    if (target != p.chart) {
        q.chart = target;
        q.coords = to_chart(h, target);
        q.switch_log.push_back({z, p.chart, target});
    }
    return q;
}

/// Pluecker coordinates (K12, K13, K23) of a 2-plane in C^3.
struct PluckerLine {
    Complex k12, k13, k23;

    CVec as_vec() const { return CVec{k12, k13, k23}; }
};

inline PluckerLine plucker_from_basis(const CVec& v, const CVec& w) {
    PluckerLine k{v[0] * w[1] - v[1] * w[0], v[0] * w[2] - v[2] * w[0],
                  v[1] * w[2] - v[2] * w[1]};
    const double scale = v.norm2() * w.norm2();
    if (k.as_vec().norm_inf() < 1e-14 * scale || scale == 0.0)
        throw RankDeficientError("plucker_from_basis: vectors do not span a plane");
    return k;
}

/// Chart Riccati right-hand side induced by the linear flow x' = M x on the
/// projectivisation: with x[chart] = 1 and w the remaining coordinates,
/// w_i' = (M x)_i - w_i (M x)_chart.  One quotient rule serves every chart
/// of CP^1, CP^2 and (through the second compound matrix) Gr(2,3).
inline CVec projective_rhs(const CMatrix& m, int chart, const CVec& w) {
    CVec x(m.n);
    int j = 0;
    for (int i = 0; i < m.n; ++i) x[i] = (i == chart) ? Complex(1.0) : w[j++];
    const CVec mx = m * x;
    CVec dw(m.n - 1);
    j = 0;
    for (int i = 0; i < m.n; ++i)
        if (i != chart) dw[j++] = mx[i] - x[i] * mx[chart];
    return dw;
}

}  // namespace wavespec
