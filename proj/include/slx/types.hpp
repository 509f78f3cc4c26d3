#ifndef SLX_TYPES_HPP
#define SLX_TYPES_HPP

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

namespace slx {

using cdouble = std::complex<double>;

inline constexpr double pi = 3.141592653589793238462643383279502884;

/// Base for all domain errors thrown by the library.
struct SlxError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidProblem : SlxError { using SlxError::SlxError; };
struct QuadratureInconclusive : SlxError { using SlxError::SlxError; };
struct NonOscillationUndetermined : SlxError { using SlxError::SlxError; };
struct PrincipalVanishes : SlxError { using SlxError::SlxError; };
struct DerivativeUnavailable : SlxError { using SlxError::SlxError; };
struct IntegrationDiverged : SlxError { using SlxError::SlxError; };
struct WronskianDrift : SlxError { using SlxError::SlxError; };
struct InadmissiblePair : SlxError { using SlxError::SlxError; };
struct GridTooCoarse : SlxError { using SlxError::SlxError; };
struct NotAnEigenvalue : SlxError { using SlxError::SlxError; };
struct OutsideResolventUnion : SlxError { using SlxError::SlxError; };
struct SearchExhausted : SlxError { using SlxError::SlxError; };
struct HypothesisViolated : SlxError { using SlxError::SlxError; };
struct ZeroParameter : SlxError { using SlxError::SlxError; };
struct FrameInaccurate : SlxError { using SlxError::SlxError; };
struct SolverFailure : SlxError { using SlxError::SlxError; };
struct ResidueMismatch : SlxError { using SlxError::SlxError; };

/// Evaluated at a pole of the relevant m-function. Carries the nullity of the
/// vanishing matrix when known (2 means the fully degenerate case).
struct AtPole : SlxError {
    AtPole(const std::string& what, int nullity_ = 1) : SlxError(what), nullity(nullity_) {}
    int nullity;
};

/// λ ∈ σ(L₀)∩σ(L∞): neither parametrization certifies multiplicity. Carries
/// the |u1[0]u2[1] − 1| certificate.
struct UncoveredPoint : SlxError {
    UncoveredPoint(const std::string& what, double lambda_, double certificate_)
        : SlxError(what), lambda(lambda_), certificate(certificate_) {}
    double lambda;
    double certificate;
};

/// Dense complex 2×2 matrix, row-major. All the spectral data in this library
/// is 2×2, so closed-form algebra beats a general linear-algebra dependency.
struct Mat2 {
    cdouble a11{0}, a12{0}, a21{0}, a22{0};

    static Mat2 identity() { return {1, 0, 0, 1}; }
    static Mat2 zero() { return {}; }
    static Mat2 diag(cdouble d1, cdouble d2) { return {d1, 0, 0, d2}; }

    cdouble det() const { return a11 * a22 - a12 * a21; }
    cdouble trace() const { return a11 + a22; }

    Mat2 adjugate() const { return {a22, -a12, -a21, a11}; }

    Mat2 transpose() const { return {a11, a21, a12, a22}; }
    Mat2 conj() const {
        return {std::conj(a11), std::conj(a12), std::conj(a21), std::conj(a22)};
    }
    Mat2 adjoint() const { return conj().transpose(); }

    Mat2 operator+(const Mat2& o) const { return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22}; }
    Mat2 operator-(const Mat2& o) const { return {a11 - o.a11, a12 - o.a12, a21 - o.a21, a22 - o.a22}; }
    Mat2 operator-() const { return {-a11, -a12, -a21, -a22}; }
    Mat2 operator*(const Mat2& o) const {
        return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
                a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
    }
    Mat2 operator*(cdouble s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }
    friend Mat2 operator*(cdouble s, const Mat2& m) { return m * s; }

    std::array<cdouble, 2> apply(const std::array<cdouble, 2>& v) const {
        return {a11 * v[0] + a12 * v[1], a21 * v[0] + a22 * v[1]};
    }

    /// Frobenius norm.
    double norm() const {
        return std::sqrt(std::norm(a11) + std::norm(a12) + std::norm(a21) + std::norm(a22));
    }

    double max_abs() const {
        return std::max(std::max(std::abs(a11), std::abs(a12)),
                        std::max(std::abs(a21), std::abs(a22)));
    }

    bool is_hermitian(double tol) const {
        return std::abs(a11 - std::conj(a11)) <= tol && std::abs(a22 - std::conj(a22)) <= tol &&
               std::abs(a12 - std::conj(a21)) <= tol;
    }

    /// Explicit adjugate/det inverse; throws when |det| is below guard·scale².
    Mat2 inverse(double guard = 0.0) const {
        const cdouble d = det();
        const double scale = max_abs();
        if (std::abs(d) <= guard * (scale * scale + 1.0))
            throw AtPole("Mat2::inverse: determinant below guard");
        return adjugate() * (cdouble(1.0) / d);
    }

    /// Singular values, descending. Closed form via the eigenvalues of A*A.
    std::array<double, 2> singular_values() const {
        const double t = std::norm(a11) + std::norm(a12) + std::norm(a21) + std::norm(a22);
        const double d = std::abs(det());
        const double disc = std::sqrt(std::max(0.0, t * t - 4.0 * d * d));
        const double s1 = std::sqrt(0.5 * (t + disc));
        const double s2 = (s1 > 0.0) ? d / s1 : 0.0;
        return {s1, s2};
    }

    /// Numerical nullity with the scale-aware cutoff σ < thresh·(σ₁ + 1).
    int nullity(double thresh = 1e-7) const {
        const auto s = singular_values();
        const double cut = thresh * (s[0] + 1.0);
        int n = 0;
        if (s[0] < cut) ++n;
        if (s[1] < cut) ++n;
        return n;
    }

    /// Eigenvalues of a Hermitian 2×2 (imaginary parts discarded), ascending.
    std::array<double, 2> hermitian_eigenvalues() const {
        const double tr = std::real(trace());
        const double de = std::real(det());
        const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * de));
        return {0.5 * (tr - disc), 0.5 * (tr + disc)};
    }

    /// Hermitian part (A + A*)/2.
    Mat2 hermitian_part() const { return (*this + adjoint()) * cdouble(0.5); }

    /// Imaginary (anti-Hermitian /i) part: (A − A*)/(2i); Hermitian by construction.
    Mat2 imag_part() const { return (*this - adjoint()) * (cdouble(0.0, -0.5)); }

    /// Unit-norm kernel direction of a (numerically) singular matrix.
    std::array<cdouble, 2> kernel_direction() const {
        // Choose the larger row for stability; kernel of (r1, r2) row is (r2, -r1).
        const double n1 = std::norm(a11) + std::norm(a12);
        const double n2 = std::norm(a21) + std::norm(a22);
        std::array<cdouble, 2> v = n1 >= n2 ? std::array<cdouble, 2>{a12, -a11}
                                            : std::array<cdouble, 2>{a22, -a21};
        double nv = std::sqrt(std::norm(v[0]) + std::norm(v[1]));
        if (nv == 0.0) return {1.0, 0.0};  // zero matrix: any direction
        return {v[0] / nv, v[1] / nv};
    }
};

/// det(P + tQ) = det P + t·mixed(P,Q) + t²·det Q.
inline cdouble mixed_det(const Mat2& p, const Mat2& q) {
    return p.a11 * q.a22 + q.a11 * p.a22 - p.a12 * q.a21 - q.a12 * p.a21;
}

inline double herm_dot(const std::array<cdouble, 2>& x, const std::array<cdouble, 2>& y,
                       double* absy = nullptr) {
    // |<x,y>| with unit-normalized inputs assumed by callers that want angles.
    const cdouble d = std::conj(y[0]) * x[0] + std::conj(y[1]) * x[1];
    if (absy) *absy = std::abs(d);
    return std::abs(d);
}

}  // namespace slx

#endif  // SLX_TYPES_HPP
