// Essential/absolute spectrum machinery driven purely by the asymptotic
// coefficient matrices of a linearised travelling-wave problem: hyperbolic
// signatures, region classification, exponential weights, and a
// continuation-based absolute-spectrum scan.
#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wavespec/core.hpp"
#include "wavespec/linalg.hpp"

namespace wavespec {

/// A spectral problem as seen from its spatial infinities.
struct SpectralProblem {
    int dim = 2;
    /// Dimension of the unstable subspace at -infinity in the rightmost region.
    int morse_index = 1;
    /// Interior coefficient matrix (z, lambda) -> A(z; lambda).  Empty for
    /// problems exposed through their asymptotics alone.
    std::function<CMatrix(double, Complex)> coeff;
    std::function<CMatrix(Complex)> asym_minus;
    std::function<CMatrix(Complex)> asym_plus;
    std::string name;

    const std::function<CMatrix(Complex)>& asym(End e) const {
        return e == End::Minus ? asym_minus : asym_plus;
    }
};

/// Count of eigenvalue real parts right of / left of / within the
/// hyperbolicity tolerance.
struct Signature {
    int n_plus = 0, n_minus = 0, n_zero = 0;
    friend bool operator==(const Signature&, const Signature&) = default;
};

inline Signature signature_of(const std::vector<Complex>& eigs, double tol, double shift = 0.0) {
    Signature s;
    for (const auto& mu : eigs) {
        const double r = mu.real() - shift;
        if (r > tol)
            ++s.n_plus;
        else if (r < -tol)
            ++s.n_minus;
        else
            ++s.n_zero;
    }
    return s;
}

inline Signature signature(const CMatrix& m, double tol = 1e-9) {
    return signature_of(eigen_decompose(m).eigenvalues, tol);
}

/// Eigenvalues of the asymptotic matrix at one end, descending real part.
inline std::vector<Complex> asymptotic_eigenvalues(const SpectralProblem& p, Complex lambda,
                                                   End end) {
    return eigen_decompose(p.asym(end)(lambda)).eigenvalues;
}

struct RegionLabel {
    enum class Kind { Omega, Continuous, Boundary };
    Kind kind = Kind::Omega;
    int omega_index = 0;  // 1 = region connected to Re(lambda) -> +infinity; 0 = undetermined
    Signature sig_minus, sig_plus;
};

/// Signature-pair classification.  Without a region map the Omega index is
/// resolved by probing a straight ray towards large positive real lambda:
/// if the signature pair never changes along the ray the point is connected
/// to the rightmost region and gets index 1.
inline RegionLabel classify(const SpectralProblem& p, Complex lambda, double tol = 1e-9) {
    RegionLabel out;
    out.sig_minus = signature(p.asym_minus(lambda), tol);
    out.sig_plus = signature(p.asym_plus(lambda), tol);
    if (out.sig_minus.n_zero > 0 || out.sig_plus.n_zero > 0) {
        out.kind = RegionLabel::Kind::Boundary;
        return out;
    }
    if (!(out.sig_minus == out.sig_plus)) {
        out.kind = RegionLabel::Kind::Continuous;
        return out;
    }
    out.kind = RegionLabel::Kind::Omega;
    const double re_far = std::max(50.0, 4.0 * std::abs(lambda));
    const int steps = 400;
    bool constant = true;
    for (int i = 1; i <= steps && constant; ++i) {
        const double t = double(i) / steps;
        const Complex z = lambda + t * (Complex(re_far, 0.0) - lambda);
        if (!(signature(p.asym_minus(z), tol) == out.sig_minus) ||
            !(signature(p.asym_plus(z), tol) == out.sig_plus))
            constant = false;
    }
    out.omega_index = constant ? 1 : 0;
    return out;
}

/// Signatures under the exponential weight e^{-nu z}: substituting
/// p = e^{nu z} p~ shifts every spatial eigenvalue by -nu, so signs are
/// counted for Re(mu) - nu.
inline std::pair<Signature, Signature> weighted_signature(const SpectralProblem& p, Complex lambda,
                                                          double nu, double tol = 1e-9) {
    auto em = eigen_decompose(p.asym_minus(lambda)).eigenvalues;
    auto ep = eigen_decompose(p.asym_plus(lambda)).eigenvalues;
    return {signature_of(em, tol, nu), signature_of(ep, tol, nu)};
}

// ---------------------------------------------------------------------------
// Region map: connected components of the set where the signature pair is
// constant, on a user grid.  Component 1 is seeded from the node of largest
// real part on (the row nearest to) the real axis; the remaining components
// are numbered by descending maximal real part, ties by area.

struct RegionMap {
    double re0, re1, im0, im1;
    int nre, nim;
    std::vector<int> component;  // per node; 0 = continuous/boundary, >=1 region id
    std::vector<std::pair<Signature, Signature>> node_sigs;

    Complex node(int i, int j) const {  // i indexes re, j indexes im
        const double re = (nre == 1) ? re0 : re0 + (re1 - re0) * i / double(nre - 1);
        const double im = (nim == 1) ? im0 : im0 + (im1 - im0) * j / double(nim - 1);
        return {re, im};
    }
    int idx(int i, int j) const { return j * nre + i; }

    /// Component id of the nearest grid node carrying a region (0 if the
    /// point itself sits on continuous spectrum by signature test).
    int lookup(Complex lam) const {
        int bi = 0, bj = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < nim; ++j)
            for (int i = 0; i < nre; ++i) {
                if (component[static_cast<std::size_t>(idx(i, j))] == 0) continue;
                const double d = std::abs(node(i, j) - lam);
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        return best == std::numeric_limits<double>::infinity()
                   ? 0
                   : component[static_cast<std::size_t>(idx(bi, bj))];
    }
};

inline RegionMap build_region_map(const SpectralProblem& p, double re0, double re1, double im0,
                                  double im1, int nre, int nim, double tol = 1e-9) {
    RegionMap map{re0, re1, im0, im1, nre, nim, {}, {}};
    const int n = nre * nim;
    map.component.assign(static_cast<std::size_t>(n), -1);
    map.node_sigs.resize(static_cast<std::size_t>(n));

    std::vector<bool> in_region(static_cast<std::size_t>(n));
    for (int j = 0; j < nim; ++j)
        for (int i = 0; i < nre; ++i) {
            const Complex lam = map.node(i, j);
            const Signature sm = signature(p.asym_minus(lam), tol);
            const Signature sp = signature(p.asym_plus(lam), tol);
            const int k = map.idx(i, j);
            map.node_sigs[static_cast<std::size_t>(k)] = {sm, sp};
            in_region[static_cast<std::size_t>(k)] =
                (sm == sp) && sm.n_zero == 0 && sp.n_zero == 0;
        }

    // Flood fill 4-connected components of in_region nodes with identical
    // signature pairs.
    std::vector<int> raw(static_cast<std::size_t>(n), 0);
    int next_id = 0;
    std::vector<int> stack;
    for (int start = 0; start < n; ++start) {
        if (!in_region[static_cast<std::size_t>(start)] || raw[static_cast<std::size_t>(start)])
            continue;
        ++next_id;
        stack.assign(1, start);
        raw[static_cast<std::size_t>(start)] = next_id;
        const auto& sig0 = map.node_sigs[static_cast<std::size_t>(start)];
        while (!stack.empty()) {
            const int k = stack.back();
            stack.pop_back();
            const int i = k % nre, j = k / nre;
            const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
            for (int d = 0; d < 4; ++d) {
                const int ii = i + di[d], jj = j + dj[d];
                if (ii < 0 || ii >= nre || jj < 0 || jj >= nim) continue;
                const int kk = map.idx(ii, jj);
                if (!in_region[static_cast<std::size_t>(kk)] ||
                    raw[static_cast<std::size_t>(kk)] ||
                    !(map.node_sigs[static_cast<std::size_t>(kk)] == sig0))
                    continue;
                raw[static_cast<std::size_t>(kk)] = next_id;
                stack.push_back(kk);
            }
        }
    }

    // Order components: seed = largest-re node on the row nearest Im = 0.
    int jmid = 0;
    double best_im = std::numeric_limits<double>::infinity();
    for (int j = 0; j < nim; ++j) {
        const double im = std::abs(map.node(0, j).imag());
        if (im < best_im) {
            best_im = im;
            jmid = j;
        }
    }
    int seed_raw = 0;
    for (int i = nre - 1; i >= 0 && !seed_raw; --i)
        seed_raw = raw[static_cast<std::size_t>(map.idx(i, jmid))];

    struct Comp {
        int raw_id;
        double max_re;
        int area;
    };
    std::vector<Comp> comps;
    for (int id = 1; id <= next_id; ++id) {
        Comp c{id, -std::numeric_limits<double>::infinity(), 0};
        for (int k = 0; k < n; ++k)
            if (raw[static_cast<std::size_t>(k)] == id) {
                ++c.area;
                c.max_re = std::max(c.max_re, map.node(k % nre, k / nre).real());
            }
        comps.push_back(c);
    }
    std::sort(comps.begin(), comps.end(), [&](const Comp& a, const Comp& b) {
        if (a.raw_id == seed_raw) return true;
        if (b.raw_id == seed_raw) return false;
        if (a.max_re != b.max_re) return a.max_re > b.max_re;
        return a.area > b.area;
    });
    std::vector<int> rename(static_cast<std::size_t>(next_id + 1), 0);
    for (std::size_t r = 0; r < comps.size(); ++r)
        rename[static_cast<std::size_t>(comps[r].raw_id)] = static_cast<int>(r) + 1;
    for (int k = 0; k < n; ++k)
        map.component[static_cast<std::size_t>(k)] =
            rename[static_cast<std::size_t>(raw[static_cast<std::size_t>(k)])];
    return map;
}

// ---------------------------------------------------------------------------
// Absolute spectrum scan.
//
// The absolute spectrum at one end is the locus where the real parts of the
// eigenvalues straddling the Morse index coincide (descending order).  The
// descending-sorted gap is nonnegative by construction, so a sign test needs
// eigenvalue labels continued along each probe edge: a transversal crossing
// flips the continued gap's sign and its zero is the locus itself.

struct AbsPoint {
    Complex lambda;
    End end;
};

namespace detail {

/// Match eigenvalues at b against labelled eigenvalues at a (greedy nearest).
/// Returns matched values in a's label order, or nullopt when ambiguous.
inline std::optional<std::vector<Complex>> match_labels(const std::vector<Complex>& a,
                                                        const std::vector<Complex>& b) {
    const std::size_t n = a.size();
    std::vector<bool> used(n, false);
    std::vector<Complex> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = n;
        double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
        for (std::size_t j = 0; j < n; ++j) {
            if (used[j]) continue;
            const double d = std::abs(a[i] - b[j]);
            if (d < d1) {
                d2 = d1;
                d1 = d;
                best = j;
            } else if (d < d2) {
                d2 = d;
            }
        }
        // Movement must be clearly smaller than the distance to the runner-up.
        if (best == n || (d2 < std::numeric_limits<double>::infinity() && d1 > 0.45 * d2))
            return std::nullopt;
        used[best] = true;
        out[i] = b[best];
    }
    return out;
}

/// Continue labels from a to b, inserting midpoints adaptively.  Returns the
/// labelled eigenvalues at b; nullopt when a collision blocks continuation.
inline std::optional<std::vector<Complex>> continue_labels(
    const std::function<std::vector<Complex>(Complex)>& eigs, Complex za, Complex zb,
    std::vector<Complex> labels, int depth = 0) {
    auto direct = match_labels(labels, eigs(zb));
    if (direct) return direct;
    if (depth >= 24) return std::nullopt;
    const Complex mid = 0.5 * (za + zb);
    auto half = continue_labels(eigs, za, mid, std::move(labels), depth + 1);
    if (!half) return std::nullopt;
    return continue_labels(eigs, mid, zb, std::move(*half), depth + 1);
}

}  // namespace detail

/// Scan a rectangular window for absolute-spectrum points of both ends.
/// Grid edges are probed with continued eigenvalue labels; sign changes of
/// the continued Morse-pair gap, and label collisions (branch points), are
/// bisected to refine_tol.  Points on rays along the real axis get an extra
/// rightmost-endpoint polish.
inline std::vector<AbsPoint> absolute_spectrum_scan(const SpectralProblem& p, double re0,
                                                    double re1, double im0, double im1, int nre,
                                                    int nim, double refine_tol = 1e-3) {
    std::vector<AbsPoint> found;

    for (End end : {End::Minus, End::Plus}) {
        auto eigs = std::function<std::vector<Complex>(Complex)>(
            [&p, end](Complex lam) { return asymptotic_eigenvalues(p, lam, end); });
        const int k = p.morse_index;  // continued gap: Re(nu_{k-1}) - Re(nu_k), 0-based

        auto gap_of = [k](const std::vector<Complex>& labelled) {
            return labelled[static_cast<std::size_t>(k - 1)].real() -
                   labelled[static_cast<std::size_t>(k)].real();
        };

        // Bisect one edge with a sign change of the continued gap.  A label
        // collision pins a genuine branch point somewhere in (a, mid]; the
        // bracket keeps shrinking around it until it too is refine_tol wide.
        auto bisect = [&](Complex a, Complex b, std::vector<Complex> la) -> Complex {
            for (int it = 0; it < 60 && std::abs(b - a) > refine_tol; ++it) {
                const Complex mid = 0.5 * (a + b);
                auto lm = detail::continue_labels(eigs, a, mid, la);
                if (!lm || gap_of(*lm) < 0.0) {
                    b = mid;
                } else {
                    a = mid;
                    la = std::move(*lm);
                }
            }
            return 0.5 * (a + b);
        };

        auto probe_edge = [&](Complex a, Complex b) -> std::optional<Complex> {
            std::vector<Complex> la = eigs(a);  // descending real parts = labels at a
            if (gap_of(la) <= 0.0) return a;    // edge starts on the locus
            auto lb = detail::continue_labels(eigs, a, b, la);
            if (!lb) return bisect(a, b, la);  // collision inside the edge
            if (gap_of(*lb) < 0.0) return bisect(a, b, la);
            return std::nullopt;
        };

        auto node = [&](int i, int j) -> Complex {
            const double re = (nre == 1) ? re0 : re0 + (re1 - re0) * i / double(nre - 1);
            const double im = (nim == 1) ? im0 : im0 + (im1 - im0) * j / double(nim - 1);
            return {re, im};
        };

        std::vector<AbsPoint> mine;
        for (int j = 0; j < nim; ++j)
            for (int i = 0; i < nre; ++i) {
                if (i + 1 < nre)
                    if (auto hit = probe_edge(node(i, j), node(i + 1, j)))
                        mine.push_back({*hit, end});
                if (j + 1 < nim)
                    if (auto hit = probe_edge(node(i, j), node(i, j + 1)))
                        mine.push_back({*hit, end});
            }

        // Endpoint polish for a ray lying on the real axis: locate the
        // largest re with a transversal crossing of a short vertical edge.
        double xmax = -std::numeric_limits<double>::infinity();
        for (const auto& pt : mine)
            if (std::abs(pt.lambda.imag()) < 10.0 * refine_tol)
                xmax = std::max(xmax, pt.lambda.real());
        if (xmax > -std::numeric_limits<double>::infinity()) {
            const double dx = (nre > 1) ? (re1 - re0) / double(nre - 1) : (re1 - re0);
            const double h = std::max(refine_tol, 1e-7);
            auto crosses = [&](double x) {
                return probe_edge(Complex(x, -h), Complex(x, h)).has_value();
            };
            double lo = xmax, hi = xmax + dx;
            if (crosses(lo)) {
                for (int it = 0; it < 60 && hi - lo > refine_tol; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (crosses(mid) ? lo : hi) = mid;
                }
                mine.push_back({Complex(0.5 * (lo + hi), 0.0), end});
            }
        }
        found.insert(found.end(), mine.begin(), mine.end());
    }
    return found;
}

}  // namespace wavespec
