// Dense complex matrices of dimension 2..4, closed-form polynomial roots up
// to degree 3, and eigen-decomposition with descending-real-part ordering.
#pragma once

#include <algorithm>
#include <vector>

#include "wavespec/core.hpp"

namespace wavespec {

/// Row-major complex matrix, dimension 2..4 (capacity fixed, size runtime).
struct CMatrix {
    int n = 0;
    std::array<Complex, 16> a{};

    CMatrix() = default;
    explicit CMatrix(int size) : n(size) {}

    Complex& operator()(int i, int j) { return a[static_cast<std::size_t>(i * 4 + j)]; }
    const Complex& operator()(int i, int j) const { return a[static_cast<std::size_t>(i * 4 + j)]; }

    static CMatrix identity(int size) {
        CMatrix m(size);
        for (int i = 0; i < size; ++i) m(i, i) = 1.0;
        return m;
    }

    Complex trace() const {
        Complex t = 0.0;
        for (int i = 0; i < n; ++i) t += (*this)(i, i);
        return t;
    }

    CMatrix& operator+=(const CMatrix& o) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) (*this)(i, j) += o(i, j);
        return *this;
    }
    CMatrix& operator-=(const CMatrix& o) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) (*this)(i, j) -= o(i, j);
        return *this;
    }
    CMatrix& operator*=(Complex s) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) (*this)(i, j) *= s;
        return *this;
    }
    friend CMatrix operator+(CMatrix x, const CMatrix& y) { return x += y; }
    friend CMatrix operator-(CMatrix x, const CMatrix& y) { return x -= y; }
    friend CMatrix operator*(Complex s, CMatrix x) { return x *= s; }

    friend CVec operator*(const CMatrix& m, const CVec& x) {
        CVec y(m.n);
        for (int i = 0; i < m.n; ++i) {
            Complex s = 0.0;
            for (int j = 0; j < m.n; ++j) s += m(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

    friend CMatrix operator*(const CMatrix& x, const CMatrix& y) {
        CMatrix z(x.n);
        for (int i = 0; i < x.n; ++i)
            for (int j = 0; j < x.n; ++j) {
                Complex s = 0.0;
                for (int k = 0; k < x.n; ++k) s += x(i, k) * y(k, j);
                z(i, j) = s;
            }
        return z;
    }

    double norm_inf() const {
        double m = 0.0;
        for (int i = 0; i < n; ++i) {
            double r = 0.0;
            for (int j = 0; j < n; ++j) r += std::abs((*this)(i, j));
            m = std::max(m, r);
        }
        return m;
    }
};

inline Complex det2(const CMatrix& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

inline Complex det3(const CMatrix& m) {
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
           m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
           m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

inline Complex det(const CMatrix& m) {
    switch (m.n) {
        case 1: return m(0, 0);
        case 2: return det2(m);
        case 3: return det3(m);
        default: throw DegreeError("det: dimension outside closed-form range");
    }
}

/// Second compound matrix of a 3x3: the induced linear flow on wedge
/// coordinates ordered (K12, K13, K23).  If v' = Av and w' = Aw then
/// K' = second_compound(A) * K for K_ij = v_i w_j - v_j w_i.
inline CMatrix second_compound(const CMatrix& m) {
    CMatrix c(3);
    c(0, 0) = m(0, 0) + m(1, 1);
    c(0, 1) = m(1, 2);
    c(0, 2) = -m(0, 2);
    c(1, 0) = m(2, 1);
    c(1, 1) = m(0, 0) + m(2, 2);
    c(1, 2) = m(0, 1);
    c(2, 0) = -m(2, 0);
    c(2, 1) = m(1, 0);
    c(2, 2) = m(1, 1) + m(2, 2);
    return c;
}

namespace detail {

inline Complex eval_poly(const std::vector<Complex>& c, Complex z) {
    Complex p = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) p = p * z + c[i];
    return p;
}

inline Complex eval_poly_deriv(const std::vector<Complex>& c, Complex z) {
    Complex p = 0.0;
    for (std::size_t i = c.size(); i-- > 1;) p = p * z + double(i) * c[i];
    return p;
}

// One Newton step per root keeps the closed forms analytic in the
// coefficients while pushing residuals to the rounding floor.
inline void polish(const std::vector<Complex>& c, std::vector<Complex>& roots) {
    for (auto& r : roots) {
        const Complex d = eval_poly_deriv(c, r);
        if (std::abs(d) > 0.0) {
            const Complex step = eval_poly(c, r) / d;
            if (std::isfinite(step.real()) && std::isfinite(step.imag())) r -= step;
        }
    }
}

inline std::pair<Complex, Complex> quadratic_roots(Complex a, Complex b, Complex c) {
    // Cancellation-safe: pick the sqrt branch aligned with b.
    Complex s = std::sqrt(b * b - 4.0 * a * c);
    if (std::real(std::conj(b) * s) < 0.0) s = -s;
    const Complex q = -0.5 * (b + s);
    const Complex r1 = q / a;
    const Complex r2 = (std::abs(q) > 0.0) ? c / q : Complex(0.0);
    return {r1, r2};
}

}  // namespace detail

/// Closed-form roots of a polynomial with ascending coefficients c[0] + c[1] z + ...
/// Degree must be 1..3 with non-vanishing leading coefficient.
inline std::vector<Complex> polynomial_roots(const std::vector<Complex>& coeffs) {
    if (coeffs.size() < 2 || coeffs.size() > 4)
        throw DegreeError("polynomial_roots: degree outside closed-form range 1..3");
    double scale = 0.0;
    for (const auto& c : coeffs) scale = std::max(scale, std::abs(c));
    const Complex lead = coeffs.back();
    if (!(std::abs(lead) > 1e-300 * scale) || std::abs(lead) == 0.0)
        throw DegreeError("polynomial_roots: vanishing leading coefficient");

    const std::size_t deg = coeffs.size() - 1;
    std::vector<Complex> roots;

    if (deg == 1) {
        roots = {-coeffs[0] / coeffs[1]};
    } else if (deg == 2) {
        auto [r1, r2] = detail::quadratic_roots(coeffs[2], coeffs[1], coeffs[0]);
        roots = {r1, r2};
    } else {
        // Cardano on the depressed cubic t^3 + p t + q, z = t - a2/3.
        const Complex a2 = coeffs[2] / lead;
        const Complex a1 = coeffs[1] / lead;
        const Complex a0 = coeffs[0] / lead;
        const Complex p = a1 - a2 * a2 / 3.0;
        const Complex q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
        const Complex s = std::sqrt(q * q + 4.0 * p * p * p / 27.0);
        Complex u3 = 0.5 * (-q + s);
        if (std::abs(-q - s) > std::abs(u3) * 2.0) u3 = 0.5 * (-q - s);
        roots.assign(3, Complex(0.0));
        if (std::abs(u3) == 0.0 && std::abs(p) == 0.0) {
            for (auto& r : roots) r = -a2 / 3.0;  // triple root
        } else {
            const Complex u = std::pow(u3, 1.0 / 3.0);
            const Complex w(-0.5, std::sqrt(3.0) / 2.0);  // primitive cube root of unity
            Complex uk = u;
            for (int k = 0; k < 3; ++k) {
                const Complex vk = (std::abs(uk) > 0.0) ? -p / (3.0 * uk) : Complex(0.0);
                roots[static_cast<std::size_t>(k)] = uk + vk - a2 / 3.0;
                uk *= w;
            }
        }
    }

    detail::polish(coeffs, roots);
    return roots;
}

/// Eigen-decomposition result.  Values sorted by descending real part
/// (ties: descending imaginary part); vectors are unit 2-norm with the
/// largest-magnitude component rotated to the positive real axis.
struct EigenPairs {
    std::vector<Complex> eigenvalues;
    std::vector<CVec> eigenvectors;
    bool defect_flag = false;
};

namespace detail {

inline void normalize_direction(CVec& v) {
    int imax = 0;
    for (int i = 1; i < v.n; ++i)
        if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
    const double nrm = v.norm2();
    if (nrm == 0.0) return;
    Complex phase = v[imax] / std::abs(v[imax]);
    const Complex s = 1.0 / (nrm * phase);
    v *= s;
}

inline CVec eigvec2(const CMatrix& m, Complex mu) {
    const CVec cand1{m(0, 1), mu - m(0, 0)};
    const CVec cand2{mu - m(1, 1), m(1, 0)};
    CVec v = (cand1.norm2() >= cand2.norm2()) ? cand1 : cand2;
    if (v.norm2() == 0.0) v = CVec{1.0, 0.0};  // diagonal matrix: coordinate direction
    normalize_direction(v);
    return v;
}

inline CVec cross3(const CVec& a, const CVec& b) {
    return CVec{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline CVec eigvec3(const CMatrix& m, Complex mu) {
    CMatrix b = m;
    for (int i = 0; i < 3; ++i) b(i, i) -= mu;
    const CVec r0{b(0, 0), b(0, 1), b(0, 2)};
    const CVec r1{b(1, 0), b(1, 1), b(1, 2)};
    const CVec r2{b(2, 0), b(2, 1), b(2, 2)};
    // Null direction = cross product of two independent rows; take the best pair.
    CVec best = cross3(r0, r1);
    for (const CVec& c : {cross3(r0, r2), cross3(r1, r2)})
        if (c.norm2() > best.norm2()) best = c;
    if (best.norm2() == 0.0) {
        // Rank <= 1: any vector annihilated by the single nonzero row works.
        const CVec* rows[3] = {&r0, &r1, &r2};
        const CVec* rmax = rows[0];
        for (const CVec* r : rows)
            if (r->norm2() > rmax->norm2()) rmax = r;
        if (rmax->norm2() == 0.0) return CVec{1.0, 0.0, 0.0};
        // Two independent vectors orthogonal (unconjugated) to rmax; pick the larger.
        const CVec& r = *rmax;
        CVec c1{-r[1], r[0], 0.0};
        CVec c2{0.0, -r[2], r[1]};
        best = (c1.norm2() >= c2.norm2()) ? c1 : c2;
    }
    normalize_direction(best);
    return best;
}

}  // namespace detail

inline EigenPairs eigen_decompose(const CMatrix& m) {
    EigenPairs out;
    if (m.n == 2) {
        auto [r1, r2] = detail::quadratic_roots(1.0, -m.trace(), det2(m));
        out.eigenvalues = {r1, r2};
    } else if (m.n == 3) {
        // det(A - mu I) = -(mu^3 - tr mu^2 + m2 mu - det)
        const Complex tr = m.trace();
        const Complex m2 = (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)) +
                           (m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0)) +
                           (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1));
        out.eigenvalues = polynomial_roots({-det3(m), m2, -tr, Complex(1.0)});
    } else {
        throw DegreeError("eigen_decompose: dimension outside closed-form range 2..3");
    }

    std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), [](Complex x, Complex y) {
        if (x.real() != y.real()) return x.real() > y.real();
        return x.imag() > y.imag();
    });

    double rho = 0.0, min_gap = std::numeric_limits<double>::infinity();
    for (const auto& mu : out.eigenvalues) rho = std::max(rho, std::abs(mu));
    for (std::size_t i = 0; i < out.eigenvalues.size(); ++i)
        for (std::size_t j = i + 1; j < out.eigenvalues.size(); ++j)
            min_gap = std::min(min_gap, std::abs(out.eigenvalues[i] - out.eigenvalues[j]));
    out.defect_flag = (min_gap < 1e-8 * rho) || (rho == 0.0);

    out.eigenvectors.reserve(out.eigenvalues.size());
    for (const auto& mu : out.eigenvalues)
        out.eigenvectors.push_back(m.n == 2 ? detail::eigvec2(m, mu) : detail::eigvec3(m, mu));
    return out;
}

}  // namespace wavespec
