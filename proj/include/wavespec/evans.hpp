// Contour construction in the spectral plane, adaptive argument tracking of
// an Evans evaluator along a contour, integer winding extraction, and the
// zero/pole accounting report.  The evaluator is any callable returning a
// sample with fields E, chart_u, chart_s, canonical, pole, switches and
// branch_distance (both model evaluators qualify).
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "wavespec/core.hpp"

namespace wavespec::evans {

// ---------------------------------------------------------------------------
// Contours: ordered piecewise paths of line segments and circular arcs.

struct Line {
    Complex a, b;
};

struct Arc {
    Complex center;
    double radius;
    double th0, th1;  // th1 < th0 traverses clockwise
};

using Segment = std::variant<Line, Arc>;

inline Complex segment_point(const Segment& s, double t) {
    if (std::holds_alternative<Line>(s)) {
        const Line& l = std::get<Line>(s);
        return l.a + t * (l.b - l.a);
    }
    const Arc& a = std::get<Arc>(s);
    return a.center + std::polar(a.radius, a.th0 + t * (a.th1 - a.th0));
}

struct Contour {
    std::vector<Segment> segments;

    void validate() const {
        if (segments.empty()) throw ContourError("contour: no segments");
        for (std::size_t i = 0; i < segments.size(); ++i) {
            const Complex e = segment_point(segments[i], 1.0);
            const Complex s = segment_point(segments[(i + 1) % segments.size()], 0.0);
            const double scale = std::max({std::abs(e), std::abs(s), 1.0});
            if (std::abs(e - s) > 1e-12 * scale)
                throw ContourError("contour: segments do not join into a closed path");
        }
    }

    Contour reversed() const {
        Contour r;
        for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
            if (std::holds_alternative<Line>(*it)) {
                const Line& l = std::get<Line>(*it);
                r.segments.push_back(Line{l.b, l.a});
            } else {
                const Arc& a = std::get<Arc>(*it);
                r.segments.push_back(Arc{a.center, a.radius, a.th1, a.th0});
            }
        }
        return r;
    }
};

inline Contour circle(Complex center, double r) {
    if (!(r > 0.0)) throw ContourError("circle: radius must be positive");
    return {{Arc{center, r, 0.0, 2.0 * kPi}}};
}

/// Boundary of {r_in <= |z| <= r_out, Re z >= 0}, counterclockwise:
/// outer arc up the right half plane, down the imaginary axis, inner arc
/// clockwise, back out along the negative imaginary axis.
inline Contour right_half_annulus(double r_in, double r_out) {
    if (!(r_in > 0.0) || !(r_in < r_out)) throw ContourError("right_half_annulus: need 0 < r_in < r_out");
    return {{Arc{0.0, r_out, -kPi / 2, kPi / 2},
             Line{Complex(0, r_out), Complex(0, r_in)},
             Arc{0.0, r_in, kPi / 2, -kPi / 2},
             Line{Complex(0, -r_in), Complex(0, -r_out)}}};
}

/// Boundary of {|z - shift| <= r, Re z >= shift}, counterclockwise.
inline Contour shifted_half_disc(double r, double shift) {
    if (!(r > 0.0)) throw ContourError("shifted_half_disc: radius must be positive");
    const Complex c(shift, 0.0);
    return {{Arc{c, r, -kPi / 2, kPi / 2}, Line{c + Complex(0, r), c - Complex(0, r)}}};
}

/// Boundary of {Re z >= 0, |z| <= r}, counterclockwise.  A positive indent
/// radius replaces the middle of the imaginary-axis diameter by a clockwise
/// semicircle through +indent, excluding a half-ball around the origin.
inline Contour right_half_disc(double r, double indent = 0.0) {
    if (!(r > 0.0)) throw ContourError("right_half_disc: radius must be positive");
    if (indent < 0.0 || indent >= r) throw ContourError("right_half_disc: bad indent radius");
    Contour c;
    c.segments.push_back(Arc{0.0, r, -kPi / 2, kPi / 2});
    if (indent == 0.0) {
        c.segments.push_back(Line{Complex(0, r), Complex(0, -r)});
    } else {
        c.segments.push_back(Line{Complex(0, r), Complex(0, indent)});
        c.segments.push_back(Arc{0.0, indent, kPi / 2, -kPi / 2});
        c.segments.push_back(Line{Complex(0, -indent), Complex(0, -r)});
    }
    return c;
}

/// Axis-aligned rectangle through two opposite corners, counterclockwise.
inline Contour rectangle(Complex corner_a, Complex corner_b) {
    const double x0 = std::min(corner_a.real(), corner_b.real());
    const double x1 = std::max(corner_a.real(), corner_b.real());
    const double y0 = std::min(corner_a.imag(), corner_b.imag());
    const double y1 = std::max(corner_a.imag(), corner_b.imag());
    if (!(x0 < x1) || !(y0 < y1)) throw ContourError("rectangle: corners are degenerate");
    return {{Line{{x0, y0}, {x1, y0}}, Line{{x1, y0}, {x1, y1}}, Line{{x1, y1}, {x0, y1}},
             Line{{x0, y1}, {x0, y0}}}};
}

// ---------------------------------------------------------------------------
// Winding computation.

struct WindingOptions {
    double theta_max = kPi / 3;
    int max_depth = 24;
    int samples_per_segment = 64;
    double closure_tol = 0.05;
    /// Samples with |E| below zero_factor * median|E| abort the run.
    double zero_factor = 1e-12;
    /// Samples closer than this to a flagged branch point are rejected.
    double branch_tol = 1e-3;
    /// Worker threads for sample evaluation; 0 picks the hardware count.
    int workers = 0;
};

struct Sample {
    Complex lambda;
    Complex E;
    double arg_cum = 0.0;  // accumulated argument up to this sample
    int seg = 0;
    double t = 0.0;  // position within the segment, [0, 1)
    int chart_u = 0, chart_s = 0;
    bool canonical = true;
    bool pole = false;
    int switches = 0;
    double branch_distance = std::numeric_limits<double>::infinity();
    int depth = 0;
};

struct WindingReport {
    int winding = 0;
    double total_arg = 0.0;
    std::vector<Sample> samples;  // in contour order
    int refinements = 0;
    std::vector<Complex> pole_events;  // residency changes between neighbours
    std::vector<std::string> warnings;
};

namespace detail {

/// Evaluate a batch of samples in place, in parallel; on failure the
/// exception of the earliest sample (contour order) is rethrown.
template <class Eval>
void evaluate_batch(Eval& ev, std::vector<Sample*>& batch, const WindingOptions& opt) {
    const int n = static_cast<int>(batch.size());
    std::vector<std::exception_ptr> errors(n);
    std::atomic<int> cursor{0};
    auto work = [&] {
        for (int i = cursor.fetch_add(1); i < n; i = cursor.fetch_add(1)) {
            Sample& s = *batch[i];
            try {
                const auto m = ev(s.lambda);
                s.E = m.E;
                s.chart_u = m.chart_u;
                s.chart_s = m.chart_s;
                s.canonical = m.canonical;
                s.pole = m.pole;
                s.switches = m.switches;
                s.branch_distance = m.branch_distance;
                if (s.branch_distance < opt.branch_tol)
                    throw BranchPointError("winding: sample too close to a branch point",
                                           s.lambda);
                if (!std::isfinite(s.E.real()) || !std::isfinite(s.E.imag()))
                    throw ModelError("winding: non-finite Evans value");
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    int workers = opt.workers > 0 ? opt.workers
                                  : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers - 1);
        for (int w = 0; w + 1 < workers; ++w) pool.emplace_back(work);
        work();
        for (auto& th : pool) th.join();
    }
    for (int i = 0; i < n; ++i)
        if (errors[i]) std::rethrow_exception(errors[i]);
}

inline bool pair_resolved(const Sample& a, const Sample& b, double theta_max) {
    const double da = std::abs(std::arg(b.E / a.E));
    if (!(da <= theta_max)) return false;
    return std::abs(b.E - a.E) <= 0.5 * std::min(std::abs(a.E), std::abs(b.E));
}

inline double median_abs(const std::vector<Sample>& s) {
    std::vector<double> mags(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) mags[i] = std::abs(s[i].E);
    std::sort(mags.begin(), mags.end());
    return mags.empty() ? 0.0 : mags[mags.size() / 2];
}

}  // namespace detail

/// Adaptive winding of an Evans evaluator around a closed contour.  Initial
/// samples are laid out per segment (geometric in modulus along radial
/// lines, uniform otherwise), then intervals are bisected until consecutive
/// values move by at most theta_max in argument and half a modulus.
template <class Eval>
WindingReport winding(Eval&& ev, const Contour& contour, WindingOptions opt = {}) {
    contour.validate();
    const int nseg = static_cast<int>(contour.segments.size());

    std::vector<Sample> samples;
    for (int seg = 0; seg < nseg; ++seg) {
        const Segment& sg = contour.segments[seg];
        const int n = std::max(2, opt.samples_per_segment);
        // Radial line segments spanning decades get geometric spacing.
        bool geometric = false;
        double m0 = 0, m1 = 0;
        if (std::holds_alternative<Line>(sg)) {
            const Line& l = std::get<Line>(sg);
            m0 = std::abs(l.a);
            m1 = std::abs(l.b);
            if (m0 > 0 && m1 > 0 && std::max(m0, m1) > 10.0 * std::min(m0, m1) &&
                std::abs(std::arg(l.b / l.a)) < 1e-9)
                geometric = true;
        }
        for (int k = 0; k < n; ++k) {
            Sample s;
            s.seg = seg;
            if (geometric) {
                const double mk = m0 * std::pow(m1 / m0, double(k) / n);
                s.t = (mk - m0) / (m1 - m0);
            } else {
                s.t = double(k) / n;
            }
            s.lambda = segment_point(sg, s.t);
            samples.push_back(s);
        }
    }

    WindingReport rep;
    {
        std::vector<Sample*> batch(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) batch[i] = &samples[i];
        detail::evaluate_batch(ev, batch, opt);
    }

    // Refinement waves: bisect every unresolved neighbouring pair (including
    // the closing pair) until the argument steps are tame.
    while (true) {
        const double med = detail::median_abs(samples);
        for (const Sample& s : samples)
            if (std::abs(s.E) < opt.zero_factor * med)
                throw ZeroOnContourError("winding: Evans value vanishes on the contour",
                                         s.lambda, s.E);

        std::vector<Sample> inserts;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const Sample& a = samples[i];
            const Sample& b = samples[(i + 1) % samples.size()];
            if (detail::pair_resolved(a, b, opt.theta_max)) continue;
            const int depth = std::max(a.depth, b.depth) + 1;
            if (depth > opt.max_depth)
                throw RefinementError("winding: refinement depth exhausted between samples",
                                      a.lambda, b.lambda);
            Sample m;
            m.seg = a.seg;
            const double t_hi = (&b == &samples[0] || b.seg != a.seg) ? 1.0 : b.t;
            m.t = 0.5 * (a.t + t_hi);
            m.lambda = segment_point(contour.segments[a.seg], m.t);
            m.depth = depth;
            inserts.push_back(m);
        }
        if (inserts.empty()) break;

        std::vector<Sample*> batch(inserts.size());
        for (std::size_t i = 0; i < inserts.size(); ++i) batch[i] = &inserts[i];
        detail::evaluate_batch(ev, batch, opt);
        rep.refinements += static_cast<int>(inserts.size());

        samples.insert(samples.end(), inserts.begin(), inserts.end());
        std::sort(samples.begin(), samples.end(), [](const Sample& x, const Sample& y) {
            return x.seg != y.seg ? x.seg < y.seg : x.t < y.t;
        });
    }

    // Accumulate the argument around the closed loop.
    double total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i].arg_cum = total;
        const Sample& a = samples[i];
        const Sample& b = samples[(i + 1) % samples.size()];
        total += std::arg(b.E / a.E);
    }
    rep.total_arg = total;
    const double turns = total / (2.0 * kPi);
    rep.winding = static_cast<int>(std::lround(turns));
    if (std::abs(turns - rep.winding) > opt.closure_tol)
        throw ContourError("winding: accumulated argument failed to close to an integer");

    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Sample& a = samples[i];
        const Sample& b = samples[(i + 1) % samples.size()];
        if (a.chart_u != b.chart_u || a.chart_s != b.chart_s)
            rep.pole_events.push_back(0.5 * (a.lambda + b.lambda));
    }
    if (!rep.pole_events.empty())
        rep.warnings.push_back("chart residency changed along the contour (" +
                               std::to_string(rep.pole_events.size()) + " transitions)");
    rep.samples = std::move(samples);
    return rep;
}

// ---------------------------------------------------------------------------
// Zero/pole accounting: winding equals (zeros - poles) inside the contour,
// with the pole count estimated from chart-residency changes on a coarse
// interior grid: a pole of the canonical-chart Evans function forces the
// tracked objects through a chart switch, so it shows up as an island of
// altered residency, while a uniformly non-canonical background (large
// |lambda| launches into the reciprocal charts everywhere) does not.  The
// estimate is diagnostic, not certified.

struct EigenvalueReport {
    int winding = 0;
    int pole_estimate = 0;
    int zero_count = 0;
    bool poles_present = false;
    WindingReport detail;
};

namespace detail {

/// Point-in-polygon test via accumulated argument around the sample loop.
inline bool encloses(const std::vector<Sample>& loop, Complex p) {
    double total = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        const Complex a = loop[i].lambda - p;
        const Complex b = loop[(i + 1) % loop.size()].lambda - p;
        if (std::abs(a) == 0.0 || std::abs(b) == 0.0) return false;
        total += std::arg(b / a);
    }
    return std::abs(total) > kPi;
}

}  // namespace detail

template <class Eval>
EigenvalueReport eigenvalue_report(Eval&& ev, const Contour& contour, WindingOptions opt = {},
                                   int grid = 12) {
    EigenvalueReport rep;
    rep.detail = winding(ev, contour, opt);
    rep.winding = rep.detail.winding;

    // Bounding box of the contour samples.
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const Sample& s : rep.detail.samples) {
        x0 = std::min(x0, s.lambda.real());
        x1 = std::max(x1, s.lambda.real());
        y0 = std::min(y0, s.lambda.imag());
        y1 = std::max(y1, s.lambda.imag());
    }

    // Residency map over the interior grid: the chart pair each tracked
    // object occupies at the matching point (-1 marks cells outside the
    // contour or unevaluable ones).
    std::vector<std::vector<int>> res(grid, std::vector<int>(grid, -1));
    std::vector<std::vector<int>> hit(grid, std::vector<int>(grid, 0));
    int skipped = 0;
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            const Complex p(x0 + (x1 - x0) * (i + 0.5) / grid,
                            y0 + (y1 - y0) * (j + 0.5) / grid);
            if (!detail::encloses(rep.detail.samples, p)) continue;
            try {
                const auto m = ev(p);
                res[i][j] = m.chart_u * 8 + m.chart_s;
                if (m.pole) hit[i][j] = 1;
            } catch (const Error&) {
                ++skipped;
            }
        }
    }

    // Mark exact pole hits plus every cell whose residency differs from an
    // evaluated neighbour: a pole island and its rim form one marked blob.
    std::vector<std::vector<int>> off(grid, std::vector<int>(grid, 0));
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            if (res[i][j] < 0) continue;
            if (hit[i][j]) off[i][j] = 1;
            const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
            for (int k = 0; k < 4; ++k) {
                const int ni = i + di[k], nj = j + dj[k];
                if (ni < 0 || nj < 0 || ni >= grid || nj >= grid) continue;
                if (res[ni][nj] >= 0 && res[ni][nj] != res[i][j]) off[i][j] = 1;
            }
        }
    }

    // Connected components of off-chart cells approximate distinct poles.
    std::vector<std::vector<int>> seen(grid, std::vector<int>(grid, 0));
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            if (!off[i][j] || seen[i][j]) continue;
            ++rep.pole_estimate;
            std::vector<std::pair<int, int>> stack{{i, j}};
            seen[i][j] = 1;
            while (!stack.empty()) {
                auto [a, b] = stack.back();
                stack.pop_back();
                const int da[4] = {1, -1, 0, 0}, db[4] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    const int na = a + da[k], nb = b + db[k];
                    if (na < 0 || nb < 0 || na >= grid || nb >= grid) continue;
                    if (!off[na][nb] || seen[na][nb]) continue;
                    seen[na][nb] = 1;
                    stack.emplace_back(na, nb);
                }
            }
        }
    }

    rep.poles_present = rep.pole_estimate > 0;
    rep.zero_count = rep.winding + rep.pole_estimate;
    if (skipped > 0)
        rep.detail.warnings.push_back("interior pole scan skipped " + std::to_string(skipped) +
                                      " unevaluable points");
    if (rep.poles_present)
        rep.detail.warnings.push_back("pole estimate " + std::to_string(rep.pole_estimate) +
                                      " from interior chart residency");
    return rep;
}

}  // namespace wavespec::evans
