// Shared scalar/vector types and error hierarchy used across the library.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace wavespec {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

/// Asymptotic end of the spatial domain.
enum class End { Minus, Plus };

/// Small dense complex vector with fixed capacity 4 and runtime size.
/// Every state integrated in this library lives in C^1..C^4, so a
/// heap-free value type keeps the adaptive stepper allocation-free.
struct CVec {
    int n = 0;
    std::array<Complex, 4> v{};

    CVec() = default;
    explicit CVec(int size) : n(size) {}
    CVec(std::initializer_list<Complex> xs) {
        n = static_cast<int>(xs.size());
        int i = 0;
        for (const auto& x : xs) v[static_cast<std::size_t>(i++)] = x;
    }

    Complex& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
    const Complex& operator[](int i) const { return v[static_cast<std::size_t>(i)]; }
    int size() const { return n; }

    CVec& operator+=(const CVec& o) {
        for (int i = 0; i < n; ++i) (*this)[i] += o[i];
        return *this;
    }
    CVec& operator-=(const CVec& o) {
        for (int i = 0; i < n; ++i) (*this)[i] -= o[i];
        return *this;
    }
    CVec& operator*=(Complex s) {
        for (int i = 0; i < n; ++i) (*this)[i] *= s;
        return *this;
    }

    friend CVec operator+(CVec a, const CVec& b) { return a += b; }
    friend CVec operator-(CVec a, const CVec& b) { return a -= b; }
    friend CVec operator*(Complex s, CVec a) { return a *= s; }
    friend CVec operator*(CVec a, Complex s) { return a *= s; }

    double norm_inf() const {
        double m = 0.0;
        for (int i = 0; i < n; ++i) m = std::max(m, std::abs((*this)[i]));
        return m;
    }
    double norm2() const {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += std::norm((*this)[i]);
        return std::sqrt(s);
    }
    bool finite() const {
        for (int i = 0; i < n; ++i) {
            if (!std::isfinite((*this)[i].real()) || !std::isfinite((*this)[i].imag())) return false;
        }
        return true;
    }
};

inline Complex dot_unconj(const CVec& a, const CVec& b) {
    Complex s = 0.0;
    for (int i = 0; i < a.n; ++i) s += a[i] * b[i];
    return s;
}

/// Relative/absolute tolerances for the adaptive integrator.
struct Tolerances {
    double rel = 1e-10;
    double abs = 1e-12;
};

// ---------------------------------------------------------------------------
// Error hierarchy.  All exceptions derive from Error so callers can catch
// library failures as one family; specific types carry diagnostic payloads.

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Polynomial degree outside the closed-form range, or vanishing lead coefficient.
struct DegreeError : Error {
    using Error::Error;
};

/// Adaptive step size collapsed; carries the last good abscissa and state.
struct StiffnessError : Error {
    double last_z;
    CVec last_y;
    StiffnessError(const std::string& msg, double z, CVec y)
        : Error(msg), last_z(z), last_y(y) {}
};

/// Field value became non-finite mid-step (finite-z blow-up of a Riccati chart).
struct BlowupEvent : Error {
    double z;
    CVec y;
    BlowupEvent(const std::string& msg, double zz, CVec yy)
        : Error(msg), z(zz), y(yy) {}
};

/// Two basis vectors failed to span a plane.
struct RankDeficientError : Error {
    using Error::Error;
};

/// Requested affine chart has a (near-)zero homogeneous coordinate.
struct ChartUnavailableError : Error {
    using Error::Error;
};

/// Parameter or input rejected by a model (wrong sign regime, shooting failure...).
struct ModelError : Error {
    using Error::Error;
};

/// Evaluation outside the computed profile/span when extension is not allowed.
struct DomainError : Error {
    using Error::Error;
};

/// Evaluation at/too close to a spatial-eigenvalue branch point, or inside the
/// configured absolute-spectrum exclusion set.
struct BranchPointError : Error {
    Complex lambda;
    BranchPointError(const std::string& msg, Complex lam) : Error(msg), lambda(lam) {}
};

/// Ill-formed contour request (zero radius, inverted annulus, ...).
struct ContourError : Error {
    using Error::Error;
};

/// |E| fell below the zero-detection floor on the contour itself.
struct ZeroOnContourError : Error {
    Complex lambda;
    Complex value;
    ZeroOnContourError(const std::string& msg, Complex lam, Complex val)
        : Error(msg), lambda(lam), value(val) {}
};

/// Argument-continuity refinement hit the subdivision depth limit.
struct RefinementError : Error {
    Complex lambda_a, lambda_b;
    RefinementError(const std::string& msg, Complex a, Complex b)
        : Error(msg), lambda_a(a), lambda_b(b) {}
};

/// Config-file / CLI validation failure.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace wavespec
