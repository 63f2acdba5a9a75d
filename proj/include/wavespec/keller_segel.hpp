// Keller-Segel chemotaxis model (zero chemical diffusion): closed-form
// travelling wave, the 3x3 linearised system with coefficient functions
// evaluated through ratio quantities (stable in the far field), dispersion
// relations of both asymptotic matrices, Riccati flows on CP^2 (stable line)
// and Gr(2,3) in Plucker coordinates (unstable plane), and the normalised
// Evans function assembled at the matching point.
#pragma once

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "wavespec/core.hpp"
#include "wavespec/linalg.hpp"
#include "wavespec/ode.hpp"
#include "wavespec/projective.hpp"
#include "wavespec/riccati.hpp"
#include "wavespec/spectrum.hpp"

namespace wavespec::ks {

struct Params {
    double alpha = 1.0;  // consumption rate
    double beta = 2.0;   // chemotaxis strength
    double c = 2.0;      // wave speed
    double delta = 1.0;  // bacterial diffusion

    void validate() const {
        if (!(alpha > 0.0)) throw ModelError("ks: alpha must be positive");
        if (!(c > 0.0)) throw ModelError("ks: wave speed c must be positive");
        if (!(delta > 0.0) || !(delta < beta))
            throw ModelError("ks: parameters must satisfy 0 < delta < beta");
    }
    double gamma() const { return delta / (beta - delta); }
    double sigma() const { return alpha * (beta - delta) / (c * c); }
    /// Truncated half-domain: far-field corrections decay like e^{-cz/delta};
    /// 14 decades keeps them at the 1e-14 level.
    double default_domain() const { return 14.0 * delta / c * std::log(10.0); }
};

namespace detail {
/// log(1 + e^t) without overflow.
inline double softplus(double t) {
    if (t > 36.0) return t;
    if (t < -36.0) return std::exp(t);
    return std::log1p(std::exp(t));
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Closed-form wave. u rises from 0 to 1 (front), w is a pulse; u' = (alpha/c) w.
// All far-field evaluation goes through logarithms so extremely negative z
// cannot overflow.

struct WaveEval {
    double u, w, up, wp, upp, wpp;
};

/// Ratio quantities W = w/u, P = u'/u, Q = w'/u, R = u''/u.  These stay
/// finite and smooth over the whole line even where u and w underflow.
struct RatioEval {
    double W, P, Q, R;
};

inline RatioEval ratios(const Params& p, double z) {
    const double t = std::log(p.sigma()) - (p.c / p.delta) * z;
    RatioEval r;
    r.W = std::exp(-(p.c / p.delta) * z - detail::softplus(t));
    r.P = (p.alpha / p.c) * r.W;
    r.Q = r.W * (-(p.c / p.delta) + (p.beta / p.delta) * r.P);
    r.R = (p.alpha / p.c) * r.Q;
    return r;
}

inline RatioEval ratio_limits(const Params& p, End end) {
    if (end == End::Plus) return {0.0, 0.0, 0.0, 0.0};
    RatioEval r;
    r.W = 1.0 / p.sigma();  // = c^2 / (alpha (beta - delta))
    r.P = (p.alpha / p.c) * r.W;
    r.Q = r.W * (-(p.c / p.delta) + (p.beta / p.delta) * r.P);
    r.R = (p.alpha / p.c) * r.Q;
    return r;
}

inline WaveEval wave_eval(const Params& p, double z) {
    const double t = std::log(p.sigma()) - (p.c / p.delta) * z;
    const double ln_u = -p.gamma() * detail::softplus(t);
    const double ln_w = -(p.c / p.delta) * z + (p.beta / p.delta) * ln_u;
    const RatioEval r = ratios(p, z);
    WaveEval e;
    e.u = std::exp(ln_u);
    e.w = std::exp(ln_w);
    e.up = (p.alpha / p.c) * e.w;
    e.wp = e.w * (-(p.c / p.delta) + (p.beta / p.delta) * r.P);
    e.upp = (p.alpha / p.c) * e.wp;
    // w'' from w' = w(-c/delta + (beta/delta) P) and P' = R - P^2.
    e.wpp = e.wp * (-(p.c / p.delta) + (p.beta / p.delta) * r.P) +
            e.w * (p.beta / p.delta) * (r.R - r.P * r.P);
    return e;
}

// ---------------------------------------------------------------------------
// Coefficient functions of the linearised system.  Each is polynomial in
// lambda with z-dependent coefficients built from the ratio quantities:
//   A = a2 lambda^2 + a1 lambda + a0,  B = b1 lambda + b0,  C constant in lambda.

struct CoeffPoly {
    double a2, a1, a0, b1, b0, C;
};

inline CoeffPoly coeff_poly(const Params& p, const RatioEval& r) {
    const double al = p.alpha, be = p.beta, c = p.c, de = p.delta;
    CoeffPoly q;
    q.a2 = (be / (c * c * de)) * r.W;
    q.a1 = (be / (c * de)) * (r.Q - 2.0 * r.W * r.P);
    q.a0 = (be / de) * (2.0 * r.W * r.P * r.P - r.W * r.R - r.P * r.Q);
    q.b1 = (al * be / (c * c * de)) * r.W + 1.0 / de;
    q.b0 = (al * be / (c * de)) * (r.Q - 2.0 * r.W * r.P) + (be / de) * (r.R - r.P * r.P);
    q.C = -c / de + (al * be / (c * de)) * r.W + (be / de) * r.P;
    return q;
}

struct Coefficients {
    Complex A, B, C;
};

inline Coefficients coefficients_from(const CoeffPoly& q, Complex lambda) {
    return {q.a2 * lambda * lambda + q.a1 * lambda + q.a0, q.b1 * lambda + q.b0, Complex(q.C)};
}

inline Coefficients coefficients(const Params& p, Complex lambda, double z) {
    return coefficients_from(coeff_poly(p, ratios(p, z)), lambda);
}

inline Coefficients coefficients_asymptotic(const Params& p, Complex lambda, End end) {
    return coefficients_from(coeff_poly(p, ratio_limits(p, end)), lambda);
}

inline CMatrix matrix_from(const Params& p, Complex lambda, const Coefficients& co) {
    CMatrix m(3);
    m(0, 0) = lambda / p.c;
    m(0, 1) = p.alpha / p.c;
    m(0, 2) = 0.0;
    m(1, 0) = 0.0;
    m(1, 1) = 0.0;
    m(1, 2) = 1.0;
    m(2, 0) = co.A;
    m(2, 1) = co.B;
    m(2, 2) = co.C;
    return m;
}

inline CMatrix matrix(const Params& p, Complex lambda, double z) {
    return matrix_from(p, lambda, coefficients(p, lambda, z));
}

inline CMatrix asymptotic_matrix(const Params& p, Complex lambda, End end) {
    return matrix_from(p, lambda, coefficients_asymptotic(p, lambda, end));
}

/// Induced flow matrix on Plucker coordinates (K12, K13, K23) of 2-planes.
inline CMatrix grassmann_matrix(const Params& p, Complex lambda, double z) {
    return second_compound(matrix(p, lambda, z));
}

// ---------------------------------------------------------------------------
// Riccati right-hand sides in the canonical charts (cross-checked in the
// test suite against the generic quotient rule driving the actual tracking).
// Stable line chart: homogeneous (p, q, r) with q = 1, coords (eta3, eta4).
// Unstable plane chart: K12 = 1, affine (kappa5, kappa6) = (-K23, K13).

inline std::pair<Complex, Complex> riccati_cp2_rhs(const Params& p, Complex lambda, double z,
                                                   Complex eta3, Complex eta4) {
    const Coefficients co = coefficients(p, lambda, z);
    return {(lambda / p.c) * eta3 + p.alpha / p.c - eta3 * eta4,
            co.A * eta3 + co.B + co.C * eta4 - eta4 * eta4};
}

inline std::pair<Complex, Complex> riccati_gr23_rhs(const Params& p, Complex lambda, double z,
                                                    Complex kappa5, Complex kappa6) {
    const Coefficients co = coefficients(p, lambda, z);
    return {co.A + (co.C - lambda / p.c) * kappa5 - kappa5 * kappa6,
            co.B - (p.alpha / p.c) * kappa5 + co.C * kappa6 - kappa6 * kappa6};
}

// ---------------------------------------------------------------------------
// Dispersion relations.  det(A_end(lambda) - mu I) = 0 is quadratic in
// lambda; for mu = ik this parametrises the continuous-spectrum curves.
// At the + end the quadratic factors exactly into c*mu and delta*mu^2 + c*mu.

/// The two lambda branches at one end for spatial exponent mu, ordered
/// (+sqrt, -sqrt) with the principal branch.
inline std::array<Complex, 2> lambda_branches(const Params& p, End end, Complex mu) {
    const CoeffPoly q = coeff_poly(p, ratio_limits(p, end));
    const Complex A = (q.b1 - p.alpha * q.a2) / p.c;
    const Complex B = -q.b1 * mu - mu * mu / p.c + (q.C / p.c) * mu + q.b0 / p.c -
                      (p.alpha / p.c) * q.a1;
    const Complex C = mu * mu * mu - q.C * mu * mu - q.b0 * mu - (p.alpha / p.c) * q.a0;
    const Complex s = std::sqrt(B * B - 4.0 * A * C);
    return {(-B + s) / (2.0 * A), (-B - s) / (2.0 * A)};
}

/// Four dispersion values at wavenumber k: the two + end branches
/// (c ik and -delta k^2 + c ik) and the two - end branches lambda_pm(k).
inline std::array<Complex, 4> dispersion(const Params& p, double k) {
    const Complex mu(0.0, k);
    const auto pm = lambda_branches(p, End::Minus, mu);
    return {p.c * mu, p.delta * mu * mu + p.c * mu, pm[0], pm[1]};
}

/// Largest real part over all four weighted dispersion branches for spatial
/// exponent shift nu, scanning k in [-k_max, k_max].
inline double weighted_dispersion_max_re(const Params& p, double nu, double k_max = 25.0,
                                         int k_samples = 2001) {
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < k_samples; ++i) {
        const double k = -k_max + 2.0 * k_max * i / double(k_samples - 1);
        const Complex mu(nu, k);
        best = std::max(best, (p.c * mu).real());
        best = std::max(best, (p.delta * mu * mu + p.c * mu).real());
        for (const Complex& lam : lambda_branches(p, End::Minus, mu))
            best = std::max(best, lam.real());
    }
    return best;
}

/// Analytic continuation of the stable spatial eigenvalue of the + end
/// matrix (principal branch; cut on lambda <= -c^2/(4 delta)).
inline Complex mu_stable_plus(const Params& p, Complex lambda) {
    return (-p.c - std::sqrt(p.c * p.c + 4.0 * p.delta * lambda)) / (2.0 * p.delta);
}

/// Branch-cut endpoint of mu_stable_plus.
inline double plus_cut_endpoint(const Params& p) { return -p.c * p.c / (4.0 * p.delta); }

// ---------------------------------------------------------------------------
// Evans function E = (K23 p - K13 q + K12 r) / (K12 q) evaluated at z = 0,
// where (p,q,r) spans the line that decays under the forward flow (tracked
// backward from +z0) and (K12,K13,K23) is the plane spanned by the two
// leading directions at the - end (tracked forward from -z0).  The ratio is
// invariant under rescaling of either homogeneous representative, so any
// resident chart pair produces the same value; the canonical-chart formula
// is E = eta4 - kappa6 - eta3 kappa5.

struct EvansOptions {
    Tolerances tol;
    double switch_threshold = 10.0;
    /// Half-length of the computational domain; non-positive means the
    /// parameter default (14 decades of far-field decay).
    double domain = -1.0;
    /// See fkpp::EvansOptions: launch abscissa min(L, span_factor/gap).
    double span_factor = 100.0;
    bool adaptive_span = true;
    /// Eigenvalue-label continuation/matching safety margin (relative).
    double label_margin = 1e-10;
    /// The region around the numerically determined absolute spectrum where
    /// - end eigenvalue labels lose meaning.  Evaluation inside the open set
    /// {re_lo < Re < re_hi, |Im| < im_max, ball_radius < |lambda| < r_max}
    /// is refused unless allow_restricted is set.
    double re_lo = 0.0, re_hi = 0.3, im_max = 4.0, ball_radius = 0.01, r_max = 4.0;
    bool allow_restricted = false;
};

struct EvansSample {
    Complex E;
    CVec line_h;   // stable line (p, q, r) at z = 0, chart slot scaled to 1
    CVec plane_h;  // unstable plane (K12, K13, K23) at z = 0
    int chart_u = 0, chart_s = 0;
    bool canonical = true;  // both objects resident in the canonical charts
    bool pole = false;      // canonical denominator K12 * q vanished
    int switches = 0;
    double branch_distance = 0.0;
};

class Evans {
  public:
    explicit Evans(const Params& params, EvansOptions opts = {}) : p_(params), o_(opts) {
        p_.validate();
        L_ = o_.domain > 0.0 ? o_.domain : p_.default_domain();
    }

    const Params& params() const { return p_; }
    const EvansOptions& options() const { return o_; }
    double domain() const { return L_; }

    bool restricted(Complex lambda) const {
        const double re = lambda.real(), im = std::abs(lambda.imag()), r = std::abs(lambda);
        return re > o_.re_lo && re < o_.re_hi && im < o_.im_max && r > o_.ball_radius &&
               r < o_.r_max;
    }

    /// Continued - end eigenvalue labels at lambda: slots [0], [1] span the
    /// tracked plane, slot [2] is the remaining (decaying) direction.  Labels
    /// are fixed by descending real part far out on the positive real axis
    /// and transported to lambda by nearest matching along a radial-then-arc
    /// path, refusing only near genuine eigenvalue collisions.
    std::array<Complex, 3> minus_labels(Complex lambda) const {
        auto eig_at = [this](Complex lam) {
            const EigenPairs ep = eigen_decompose(asymptotic_matrix(p_, lam, End::Minus));
            return std::array<Complex, 3>{ep.eigenvalues[0], ep.eigenvalues[1],
                                          ep.eigenvalues[2]};
        };
        const double r = std::abs(lambda);
        const double ref = std::max(50.0, 3.0 * r);
        std::array<Complex, 3> cur = eig_at(Complex(ref, 0.0));  // descending Re in Omega_1

        // Radial leg (geometric) along the positive real axis, arc leg at
        // radius r, then the final hop for very small |lambda|.
        std::vector<Complex> path;
        const double r_leg = std::max(r, 1e-8);
        const int n_rad = 24;
        for (int i = 1; i <= n_rad; ++i)
            path.push_back(Complex(ref * std::pow(r_leg / ref, double(i) / n_rad), 0.0));
        const double th = std::arg(lambda == 0.0 ? Complex(1.0) : lambda);
        const int n_arc = std::max(6, int(std::ceil(std::abs(th) / (kPi / 12.0))));
        for (int i = 1; i <= n_arc; ++i)
            path.push_back(std::polar(r_leg, th * double(i) / n_arc));
        path.push_back(lambda);

        Complex prev = Complex(ref, 0.0);
        for (const Complex& next : path) {
            continue_step(eig_at, cur, prev, next, 0);
            prev = next;
        }
        return cur;
    }

    EvansSample operator()(Complex lambda) const {
        if (!o_.allow_restricted && restricted(lambda))
            throw BranchPointError(
                "ks: lambda inside the restricted region around the absolute spectrum", lambda);
        const Complex cut_disc = p_.c * p_.c + 4.0 * p_.delta * lambda;
        if (std::abs(cut_disc) < 1e-12 * std::max(1.0, p_.c * p_.c))
            throw BranchPointError("ks: evaluation at the + end branch point", lambda);

        const std::array<Complex, 3> nu = minus_labels(lambda);
        const Complex mu_s = mu_stable_plus(p_, lambda);

        // Launch abscissae from the attraction-rate rule.
        const double g_minus =
            std::min(nu[0].real(), nu[1].real()) - nu[2].real();
        const Complex lam_over_c = lambda / p_.c;
        const Complex mu_u = (-p_.c + std::sqrt(cut_disc)) / (2.0 * p_.delta);
        const double g_plus =
            std::min(lam_over_c.real(), mu_u.real()) - mu_s.real();
        const double zL = span(g_minus);
        const double zR = span(g_plus);

        TrackOptions topt;
        topt.tol = o_.tol;
        topt.switch_threshold = o_.switch_threshold;

        // Unstable plane: frozen eigendirections at -zL matched to the
        // continued labels, forward on Gr(2,3) in Plucker coordinates.
        const EigenPairs em = eigen_decompose(matrix(p_, lambda, -zL));
        const std::array<int, 3> perm = match_triple(nu, em.eigenvalues);
        const PluckerLine K0 =
            plucker_from_basis(em.eigenvectors[perm[0]], em.eigenvectors[perm[1]]);
        ChartPoint plane = from_homogeneous(Space::Gr23, K0.as_vec());
        auto gr_coeff = [this, lambda](double z) { return grassmann_matrix(p_, lambda, z); };
        const TrackOutcome ru = track_projective(gr_coeff, plane, -zL, 0.0, topt);

        // Stable line: frozen eigendirection at +zR nearest the continued
        // stable spatial eigenvalue, backward on CP^2.
        const EigenPairs epl = eigen_decompose(matrix(p_, lambda, zR));
        const int is = nearest_label(epl.eigenvalues, mu_s);
        ChartPoint line = from_homogeneous(Space::CP2, epl.eigenvectors[is]);
        auto coeff = [this, lambda](double z) { return matrix(p_, lambda, z); };
        const TrackOutcome rs = track_projective(coeff, line, zR, 0.0, topt);

        EvansSample out;
        out.branch_distance = std::abs(lambda - Complex(plus_cut_endpoint(p_), 0.0));
        out.plane_h = homogeneous(ru.end);
        out.line_h = homogeneous(rs.end);
        out.chart_u = ru.end.chart;
        out.chart_s = rs.end.chart;
        out.switches = ru.switch_count + rs.switch_count;
        out.canonical = (out.chart_u == 0 && out.chart_s == 1);

        const Complex K12 = out.plane_h[0], K13 = out.plane_h[1], K23 = out.plane_h[2];
        const Complex pp = out.line_h[0], qq = out.line_h[1], rr = out.line_h[2];
        const Complex num = K23 * pp - K13 * qq + K12 * rr;
        const Complex den = K12 * qq;
        out.pole = std::abs(den) < 1e-290 * std::max(1.0, std::abs(num));
        out.E = num / den;
        return out;
    }

  private:
    double span(double gap) const {
        if (!o_.adaptive_span || !(gap > 0.0)) return L_;
        return std::min(L_, o_.span_factor / gap);
    }

    /// One continuation step with adaptive bisection near close encounters.
    template <class F>
    void continue_step(F&& eig_at, std::array<Complex, 3>& cur, Complex from, Complex to,
                       int depth) const {
        const std::array<Complex, 3> nxt = eig_at(to);
        if (matchable(cur, nxt)) {
            const std::array<int, 3> perm = match_triple(cur, {nxt[0], nxt[1], nxt[2]});
            cur = {nxt[perm[0]], nxt[perm[1]], nxt[perm[2]]};
            return;
        }
        if (depth >= 28)
            throw BranchPointError("ks: eigenvalue labels collide along the continuation path",
                                   to);
        const Complex mid = 0.5 * (from + to);
        continue_step(eig_at, cur, from, mid, depth + 1);
        continue_step(eig_at, cur, mid, to, depth + 1);
    }

    /// Candidates are matchable when every source is decisively closer to
    /// its assigned target than to any other: transversal real-part
    /// crossings pass (the values stay distinct), genuine collisions fail.
    static bool matchable(const std::array<Complex, 3>& a, const std::array<Complex, 3>& b) {
        const std::array<int, 3> perm = match_triple(a, {b[0], b[1], b[2]});
        for (int i = 0; i < 3; ++i) {
            const double d = std::abs(a[i] - b[perm[i]]);
            for (int j = 0; j < 3; ++j)
                if (j != perm[i] && !(d < 0.45 * std::abs(a[i] - b[j]))) return false;
        }
        return true;
    }

    /// Minimal-total-distance assignment of three labels to three values.
    static std::array<int, 3> match_triple(const std::array<Complex, 3>& labels,
                                           const std::vector<Complex>& values) {
        static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                            {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (int k = 0; k < 6; ++k) {
            double cost = 0.0;
            for (int i = 0; i < 3; ++i) cost += std::abs(labels[i] - values[perms[k][i]]);
            if (cost < best) {
                best = cost;
                arg = k;
            }
        }
        return {perms[arg][0], perms[arg][1], perms[arg][2]};
    }

    static int nearest_label(const std::vector<Complex>& values, Complex target) {
        int arg = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < int(values.size()); ++i) {
            const double d = std::abs(values[i] - target);
            if (d < best) {
                best = d;
                arg = i;
            }
        }
        // The runner-up must be clearly farther, otherwise the direction is
        // ill-defined.
        double second = std::numeric_limits<double>::infinity();
        for (int i = 0; i < int(values.size()); ++i)
            if (i != arg) second = std::min(second, std::abs(values[i] - target));
        double scale = 0.0;
        for (const Complex& v : values) scale = std::max(scale, std::abs(v));
        if (!(second - best > 1e-10 * std::max(1.0, scale)))
            throw BranchPointError("ks: stable spatial eigenvalue is not isolated", target);
        return arg;
    }

    Params p_;
    EvansOptions o_;
    double L_;
};

inline SpectralProblem make_problem(const Params& p) {
    SpectralProblem sp;
    sp.dim = 3;
    sp.morse_index = 2;
    sp.name = "ks";
    sp.coeff = [p](double z, Complex lam) { return matrix(p, lam, z); };
    sp.asym_minus = [p](Complex lam) { return asymptotic_matrix(p, lam, End::Minus); };
    sp.asym_plus = [p](Complex lam) { return asymptotic_matrix(p, lam, End::Plus); };
    return sp;
}

}  // namespace wavespec::ks
