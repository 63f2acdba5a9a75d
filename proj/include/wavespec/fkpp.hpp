// Fisher-KPP front model: wave construction by shooting, the linearised
// eigenvalue problem in first-order form, its projective (Riccati) flows on
// CP^1, the mismatch function E built at the matching point, a real-line
// crossing counter, and dispersion/weight data for the essential spectrum.
#pragma once

#include <array>
#include <limits>
#include <optional>

#include "wavespec/core.hpp"
#include "wavespec/linalg.hpp"
#include "wavespec/ode.hpp"
#include "wavespec/riccati.hpp"
#include "wavespec/spectrum.hpp"

namespace wavespec::fkpp {

struct Params {
    double delta = 1.0;
    double c = 2.0;

    void validate() const {
        if (!(delta > 0.0)) throw ModelError("fkpp: delta must be positive");
        if (!(c > 0.0)) throw ModelError("fkpp: wave speed c must be positive");
    }
    /// Monotone-front regime.
    bool monotone() const { return c >= 2.0 * std::sqrt(delta); }
};

// ---------------------------------------------------------------------------
// Travelling wave delta u'' + c u' + u(1-u) = 0 connecting (1,0) to (0,0),
// computed by shooting along the unstable manifold of the saddle at u = 1
// and translated so that u(0) = 1/2.

struct Wave {
    Params params;
    Trajectory profile;  // states (u, v = u'), real data in complex storage
    double L_minus = 0.0, L_plus = 0.0;
    double tail_tol = 1e-10;

    double u(double z) const { return profile.eval(z)[0].real(); }
    double v(double z) const { return profile.eval(z)[1].real(); }
};

inline Wave shoot_wave(const Params& p, double tail_tol = 1e-10,
                       const Tolerances& tol = Tolerances{}) {
    p.validate();
    if (!(tail_tol > 0.0) || tail_tol >= 0.5) throw ModelError("fkpp: bad tail tolerance");

    const double delta = p.delta, c = p.c;
    auto field = [delta, c](double, const CVec& y) {
        const Complex u = y[0], v = y[1];
        return CVec{v, (-c * v - u * (1.0 - u)) / delta};
    };

    // Unit unstable eigenvector of the saddle (1,0), oriented into u < 1.
    const double nu = (-c + std::sqrt(c * c + 4.0 * delta)) / (2.0 * delta);
    const double nrm = std::sqrt(1.0 + nu * nu);
    const double eps = 1e-8;
    CVec y0{1.0 - eps / nrm, -eps * nu / nrm};

    const double z_budget = 400.0;
    Trajectory traj;
    traj.forward = true;
    traj.nodes.push_back({0.0, y0, field(0.0, y0)});
    auto [zf, yf, ff] = integrate_steps(field, y0, 0.0, z_budget, tol, [&](const StepRecord& s) {
        traj.nodes.push_back({s.z1, *s.y1, *s.f1});
        return (s.y1->norm_inf() < tail_tol) ? StepAction::Stop : StepAction::Continue;
    });
    if (yf.norm_inf() >= tail_tol)
        throw DomainError("fkpp: tail tolerance not reached within the z budget");

    // First crossing of u = 1/2 locates the front.
    std::size_t i = 0;
    while (i + 1 < traj.nodes.size() && traj.nodes[i + 1].y[0].real() > 0.5) ++i;
    if (i + 1 >= traj.nodes.size()) throw ModelError("fkpp: shooting never crossed u = 1/2");
    double lo = traj.nodes[i].z, hi = traj.nodes[i + 1].z;
    for (int it = 0; it < 200 && (hi - lo) > 1e-14 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (traj.eval(mid)[0].real() > 0.5 ? lo : hi) = mid;
    }
    const double z_star = 0.5 * (lo + hi);

    Wave w;
    w.params = p;
    w.tail_tol = tail_tol;
    w.profile = std::move(traj);
    for (auto& nd : w.profile.nodes) nd.z -= z_star;
    w.L_minus = -w.profile.nodes.front().z;
    w.L_plus = w.profile.nodes.back().z;

    if (p.monotone()) {
        for (const auto& nd : w.profile.nodes)
            if (nd.y[1].real() > 1e-12)
                throw ModelError("fkpp: non-monotone profile in the monotone regime");
    }
    return w;
}

// ---------------------------------------------------------------------------
// Linearised eigenvalue problem (p, q)' = A(z; lambda) (p, q).

inline CMatrix matrix(const Params& p, double u, Complex lambda) {
    CMatrix a(2);
    a(0, 0) = 0.0;
    a(0, 1) = 1.0;
    a(1, 0) = (lambda - 1.0 + 2.0 * u) / p.delta;
    a(1, 1) = -p.c / p.delta;
    return a;
}

struct SpatialEigs {
    Complex mu_u, mu_s;  // principal-branch labels: mu_u carries +sqrt
    bool at_branch = false;
};

/// Frozen-coefficient spatial eigenvalues at background state u.
/// Principal-branch square root keeps both labels analytic across the
/// essential spectrum; no re-sorting by real part is ever applied.
inline SpatialEigs spatial_eigs_at(const Params& p, Complex lambda, double u) {
    const Complex disc = p.c * p.c + 4.0 * p.delta * (lambda - 1.0 + 2.0 * u);
    const Complex root = std::sqrt(disc);
    SpatialEigs e;
    e.at_branch = std::abs(disc) < 1e-12 * std::max(1.0, p.c * p.c);
    e.mu_u = (-p.c + root) / (2.0 * p.delta);
    e.mu_s = (-p.c - root) / (2.0 * p.delta);
    return e;
}

inline SpatialEigs spatial_eigs(const Params& p, Complex lambda, End end) {
    return spatial_eigs_at(p, lambda, end == End::Minus ? 1.0 : 0.0);
}

/// Branch points of the spatial eigenvalues (also the absolute-spectrum ray
/// endpoints): lambda = 1 - c^2/(4 delta) for the + end, -1 - c^2/(4 delta)
/// for the - end.
inline std::array<double, 2> branch_points(const Params& p) {
    const double s = p.c * p.c / (4.0 * p.delta);
    return {1.0 - s, -1.0 - s};
}

/// Riccati field in the eta chart [1 : eta]:
///   eta' = (lambda - 1 + 2u)/delta - (c/delta) eta - eta^2.
inline Complex riccati_rhs_eta(const Params& p, double u, Complex lambda, Complex eta) {
    return (lambda - 1.0 + 2.0 * u) / p.delta - (p.c / p.delta) * eta - eta * eta;
}

/// Riccati field in the reciprocal chart [tau : 1]:
///   tau' = 1 + (c/delta) tau - ((lambda - 1 + 2u)/delta) tau^2.
inline Complex riccati_rhs_tau(const Params& p, double u, Complex lambda, Complex tau) {
    return 1.0 + (p.c / p.delta) * tau - ((lambda - 1.0 + 2.0 * u) / p.delta) * tau * tau;
}

// ---------------------------------------------------------------------------
// Evans-type mismatch E(lambda): the unstable direction is carried forward
// from -L, the stable direction backward from +L, and the matching-point
// mismatch is the determinant of homogeneous representatives normalised by
// the first (eta-chart) coordinates, so E = eta_s(0) - eta_u(0) whenever
// both objects are resident in the canonical chart.

struct EvansOptions {
    Tolerances tol;
    double switch_threshold = 10.0;
    /// Evans integration domain is [-min(L-, cap), +min(L+, cap)].
    double truncation_cap = 60.0;
    /// The tracked directions are exponentially attracting at rate g (the
    /// real-part gap of the frozen spatial eigenvalues); starting at
    /// z0 = min(L, span_factor/g) leaves an O(e^-{span_factor/2}) tail
    /// influence while keeping explicit stepping affordable at large
    /// |lambda|.  Set adaptive_span = false to force the full domain.
    double span_factor = 100.0;
    bool adaptive_span = true;
    /// Permit evaluation exactly at a spatial branch point (mu_u = mu_s).
    bool at_branch_ok = false;
};

struct EvansSample {
    Complex E;
    CVec h_u, h_s;  // homogeneous representatives at z = 0 (chart coord = 1)
    int chart_u = 0, chart_s = 0;
    bool canonical = true;  // both objects in the eta chart at z = 0
    bool pole = false;      // canonical denominator vanished
    int switches = 0;
    double branch_distance = 0.0;
    bool at_branch = false;
    /// Set when E was produced by the merged-direction connection test rather
    /// than the two-sided mismatch (see operator() at-branch notes).
    bool structural = false;
    /// Affine distance between the tracked direction and the merged decay
    /// direction at the far truncation end (structural evaluations only).
    double far_defect = 0.0;
};

class Evans {
  public:
    explicit Evans(Wave wave, EvansOptions opts = {}) : wave_(std::move(wave)), o_(opts) {
        Lm_ = std::min(wave_.L_minus, o_.truncation_cap);
        Lp_ = std::min(wave_.L_plus, o_.truncation_cap);
    }

    const Wave& wave() const { return wave_; }
    const EvansOptions& options() const { return o_; }
    double domain_minus() const { return Lm_; }
    double domain_plus() const { return Lp_; }

    EvansSample operator()(Complex lambda) const {
        const Params& p = wave_.params;
        const auto bp = branch_points(p);
        EvansSample out;
        out.branch_distance =
            std::min(std::abs(lambda - Complex(bp[0], 0)), std::abs(lambda - Complex(bp[1], 0)));
        const bool branch_plus = spatial_eigs(p, lambda, End::Plus).at_branch;
        const bool branch_minus = spatial_eigs(p, lambda, End::Minus).at_branch;
        const bool branch_hit = branch_plus || branch_minus;
        if (branch_hit && !o_.at_branch_ok)
            throw BranchPointError("fkpp: evaluation at a spatial branch point", lambda);
        out.at_branch = branch_hit;

        auto coeff = [this, &p, lambda](double z) { return matrix(p, wave_.u(z), lambda); };
        TrackOptions topt;
        topt.tol = o_.tol;
        topt.switch_threshold = o_.switch_threshold;

        // Launch abscissae, possibly shortened by the attraction-rate rule.
        const double zm = -span(End::Minus, lambda, Lm_);
        const double zp = span(End::Plus, lambda, Lp_);

        // At a branch point the two frozen decay rates at that end merge, so
        // the usual mismatch between separately tracked directions no longer
        // measures a connection: the frozen flow at the merged end is
        // parabolic (w' = -w^2 in the gap variable w = eta - mu*), and every
        // chart-bounded orbit converges to the merged direction mu* under its
        // forward extension (w(T) = w_L / (1 + w_L (T - L)) -> 0, passing
        // through the reciprocal chart if 1 + w_L (T - L) vanishes).  The
        // connection from the opposite end's distinguished direction to mu*
        // is therefore established exactly when tracking across the domain
        // succeeds, and the mismatch of the connected objects is zero.  E is
        // reported as that structural zero; far_defect records the affine
        // distance from mu* at the truncation end actually reached.
        if (branch_hit) {
            const Complex mu_star = -p.c / (2.0 * p.delta);
            if (branch_plus) {
                ChartPoint pu{Space::CP1, 0, CVec{spatial_eigs_at(p, lambda, wave_.u(zm)).mu_u}, {}};
                const TrackOutcome mid = track_projective(coeff, pu, zm, 0.0, topt);
                const TrackOutcome far = track_projective(coeff, mid.end, 0.0, zp, topt);
                out.h_u = homogeneous(mid.end);
                out.chart_u = mid.end.chart;
                out.h_s = CVec{1.0, mu_star};
                out.chart_s = 0;
                out.switches = mid.switch_count + far.switch_count;
                out.far_defect = affine_defect(far.end, mu_star);
            } else {
                ChartPoint ps{Space::CP1, 0, CVec{spatial_eigs_at(p, lambda, wave_.u(zp)).mu_s}, {}};
                const TrackOutcome mid = track_projective(coeff, ps, zp, 0.0, topt);
                const TrackOutcome far = track_projective(coeff, mid.end, 0.0, zm, topt);
                out.h_s = homogeneous(mid.end);
                out.chart_s = mid.end.chart;
                out.h_u = CVec{1.0, mu_star};
                out.chart_u = 0;
                out.switches = mid.switch_count + far.switch_count;
                out.far_defect = affine_defect(far.end, mu_star);
            }
            out.canonical = (out.chart_u == 0 && out.chart_s == 0);
            out.structural = true;
            out.E = 0.0;
            return out;
        }

        ChartPoint pu{Space::CP1, 0, CVec{spatial_eigs_at(p, lambda, wave_.u(zm)).mu_u}, {}};
        ChartPoint ps{Space::CP1, 0, CVec{spatial_eigs_at(p, lambda, wave_.u(zp)).mu_s}, {}};

        const TrackOutcome ru = track_projective(coeff, pu, zm, 0.0, topt);
        const TrackOutcome rs = track_projective(coeff, ps, zp, 0.0, topt);

        out.h_u = homogeneous(ru.end);
        out.h_s = homogeneous(rs.end);
        out.chart_u = ru.end.chart;
        out.chart_s = rs.end.chart;
        out.switches = ru.switch_count + rs.switch_count;
        out.canonical = (out.chart_u == 0 && out.chart_s == 0);

        const Complex num = out.h_u[0] * out.h_s[1] - out.h_u[1] * out.h_s[0];
        const Complex den = out.h_u[0] * out.h_s[0];
        out.pole = std::abs(den) < 1e-290 * std::max(1.0, std::abs(num));
        out.E = num / den;
        return out;
    }

    /// Affine eta-chart distance from a tracked point to a target direction;
    /// infinite when the point sits at the chart's excluded direction.
    static double affine_defect(const ChartPoint& pt, Complex target) {
        const CVec h = homogeneous(pt);
        if (std::abs(h[0]) <= 1e-300 * std::abs(h[1]))
            return std::numeric_limits<double>::infinity();
        return std::abs(h[1] / h[0] - target);
    }

    /// Integration span from one end towards the matching point.
    double span(End end, Complex lambda, double L) const {
        if (!o_.adaptive_span) return L;
        const SpatialEigs e = spatial_eigs(wave_.params, lambda, end);
        const double g = e.mu_u.real() - e.mu_s.real();
        if (!(g > 0.0)) return L;
        return std::min(L, o_.span_factor / g);
    }

  private:
    Wave wave_;
    EvansOptions o_;
    double Lm_, Lp_;
};

// ---------------------------------------------------------------------------
// Real-line crossing counter: integrate the real projective solution from
// the - end and count transversal passages through the target value mu_s^+.
// At a crossing the flow derivative equals 2 u(z)/delta (lambda cancels),
// so all crossings are one-directional wherever u > 0.

struct CrossingCount {
    int count = 0;
    bool degenerate = false;
    std::vector<double> locations;
};

inline CrossingCount crossing_count(const Wave& wave, double lambda,
                                    const EvansOptions& opts = {}) {
    const Params& p = wave.params;
    if (!(lambda >= 0.0)) throw ModelError("fkpp: crossing counter needs real lambda >= 0");
    if (!p.monotone()) throw ModelError("fkpp: crossing counter needs the monotone regime");

    const double Lm = std::min(wave.L_minus, opts.truncation_cap);
    const double Lp = std::min(wave.L_plus, opts.truncation_cap);
    const Complex lam(lambda, 0.0);
    const double target = spatial_eigs(p, lam, End::Plus).mu_s.real();

    auto coeff = [&p, &wave, lam](double z) { return matrix(p, wave.u(z), lam); };
    TrackOptions topt;
    topt.tol = opts.tol;
    topt.switch_threshold = opts.switch_threshold;

    CrossingCount out;
    // sign of (ell - target), chart-consistent: in the reciprocal chart the
    // same sign is carried by (1 - target*tau)/tau.
    auto monitor = [target](const ChartPoint& cp) {
        const Complex w = cp.coords[0];
        return cp.chart == 0 ? (w.real() - target)
                             : (1.0 - target * w.real()) / w.real();
    };

    ChartPoint start{Space::CP1, 0, CVec{spatial_eigs(p, lam, End::Minus).mu_u}, {}};
    std::optional<double> prev_val;
    double prev_z = -Lm;
    track_projective(coeff, start, -Lm, Lp, topt, [&](double z, const ChartPoint& cp) {
        const double val = monitor(cp);
        if (prev_val && *prev_val != 0.0 && val != 0.0 &&
            std::signbit(*prev_val) != std::signbit(val)) {
            const double frac = *prev_val / (*prev_val - val);
            const double zc = prev_z + frac * (z - prev_z);
            out.locations.push_back(zc);
            if (std::abs(2.0 * wave.u(zc) / p.delta) < 1e-10) out.degenerate = true;
            ++out.count;
        }
        prev_val = val;
        prev_z = z;
        return StepAction::Continue;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Dispersion relations, exponential weights, spectral-problem view.

/// lambda branches of det(A_pm - ik) = 0 for real wavenumber k:
/// two parabolas -delta k^2 + i c k +- 1.  The background reaction
/// coefficient 1 - 2u contributes +1 at the + end (u = 0) and -1 at the
/// - end (u = 1), so index 0 is the + end curve, index 1 the - end.
inline std::array<Complex, 2> dispersion(const Params& p, double k) {
    const Complex base(-p.delta * k * k, p.c * k);
    return {base + 1.0, base - 1.0};  // index 0: + end, index 1: - end
}

/// Same curves continued to complex spatial exponent mu (for weighted scans):
/// lambda = delta mu^2 + c mu +- 1, end order as in dispersion().
inline std::array<Complex, 2> dispersion_mu(const Params& p, Complex mu) {
    const Complex base = p.delta * mu * mu + p.c * mu;
    return {base + 1.0, base - 1.0};
}

struct WeightedEdge {
    double lambda_edge;
    bool admissible;
};

/// Rightmost point of the weighted + end dispersion curve under the weight
/// e^{-nu z}: lambda_edge = 1 + c nu + delta nu^2, admissible (edge pushed
/// strictly into Re < 1 territory... into the open left of the unweighted
/// edge) exactly for nu between the two negative tail rates when c^2 > 4 delta.
inline WeightedEdge weighted_edge(const Params& p, double nu) {
    const double edge = 1.0 + p.c * nu + p.delta * nu * nu;
    bool adm = false;
    if (p.c * p.c > 4.0 * p.delta) {
        const double s = std::sqrt(p.c * p.c - 4.0 * p.delta);
        const double lo = (-p.c - s) / (2.0 * p.delta);
        const double hi = (-p.c + s) / (2.0 * p.delta);
        adm = (nu > lo) && (nu < hi);
    }
    return {edge, adm};
}

/// Largest real part over the weighted dispersion curves for weight nu,
/// scanning wavenumbers k in [-k_max, k_max].
inline double weighted_dispersion_max_re(const Params& p, double nu, double k_max = 20.0,
                                         int k_samples = 2001) {
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < k_samples; ++i) {
        const double k = -k_max + 2.0 * k_max * i / double(k_samples - 1);
        for (const Complex& lam : dispersion_mu(p, Complex(nu, k)))
            best = std::max(best, lam.real());
    }
    return best;
}

inline SpectralProblem make_problem(const Params& p) {
    SpectralProblem sp;
    sp.dim = 2;
    sp.morse_index = 1;
    sp.name = "fkpp";
    sp.asym_minus = [p](Complex lam) { return matrix(p, 1.0, lam); };
    sp.asym_plus = [p](Complex lam) { return matrix(p, 0.0, lam); };
    return sp;
}

/// Problem view that also carries the interior coefficient matrix along the
/// computed front.
inline SpectralProblem make_problem(const Wave& w) {
    SpectralProblem sp = make_problem(w.params);
    sp.coeff = [w](double z, Complex lam) { return matrix(w.params, w.u(z), lam); };
    return sp;
}

}  // namespace wavespec::fkpp
