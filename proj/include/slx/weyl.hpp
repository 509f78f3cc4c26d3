#ifndef SLX_WEYL_HPP
#define SLX_WEYL_HPP

#include <array>
#include <optional>

#include "slx/odecore.hpp"
#include "slx/types.hpp"

namespace slx {

enum class WeylKind { M0, Minf, Mtheta, Mrelation };

struct WeylValue {
    cdouble lambda;
    Mat2 matrix;
    WeylKind kind;
    double condition_estimate = 0.0;
};

/// Self-adjoint linear relation θ = {(Aφ, Bφ)} in ℂ², stored in the canonical
/// normalization A*B = B*A, AA* + BB* = I = A*A + B*B (Cayley form).
struct SelfAdjointRelation {
    Mat2 A, B;
    int mul_dim = 0;
    // Canonical pieces for mul_dim == 1: θ acts as the real scalar theta_op
    // on span{op_direction}; mul part is span{mul_direction}.
    std::array<cdouble, 2> op_direction{1.0, 0.0};
    std::array<cdouble, 2> mul_direction{0.0, 1.0};
    double theta_op = 0.0;

    /// Normalizes an arbitrary representing pair (A0*B0 Hermitian, stacked
    /// rank 2). Throws InadmissiblePair otherwise.
    static SelfAdjointRelation from_pair(const Mat2& a0, const Mat2& b0, double tol = 1e-8);

    /// Graph of a Hermitian matrix (mul_dim 0).
    static SelfAdjointRelation graph_of(const Mat2& theta);

    /// The Γ₀'-side parameter ϑ = −θ⁻¹ of this relation: pair (B, −A).
    SelfAdjointRelation vartheta() const { return from_pair(B, -A); }

    /// Hermitian matrix B A⁻¹ (requires mul_dim == 0).
    Mat2 as_matrix() const;
};

/// Scale-aware pole guard: |denominator| ≤ factor·(max|BoundaryData| + 1).
inline double pole_guard_scale(const BoundaryData& bd, double factor = 1e-10) {
    const double s = std::max(std::max(std::abs(bd.u10), std::abs(bd.u11)),
                              std::max(std::abs(bd.u20), std::abs(bd.u21)));
    return factor * (s + 1.0);
}

/// M₀(λ) = (1/u₂⁰)[[−u₁⁰, 1],[1, −u₂¹]]; throws AtPole on σ(L₀).
WeylValue m0_from(const BoundaryData& bd, double guard_factor = 1e-10);

/// M∞(λ) = (1/u₁¹)[[u₂¹, 1],[1, u₁⁰]]; throws AtPole on σ(L∞).
WeylValue m_inf_from(const BoundaryData& bd, double guard_factor = 1e-10);

/// M(θ,λ) = (θ − M₀(λ))⁻¹; AtPole carries the nullity of θ − M₀.
WeylValue m_theta_from(const BoundaryData& bd, const Mat2& theta, double guard_factor = 1e-10);

/// M̃(ϑ,λ) = (ϑ − M∞(λ))⁻¹ on the Γ₀' triple.
WeylValue m_vartheta_from(const BoundaryData& bd, const Mat2& vartheta,
                          double guard_factor = 1e-10);

/// Relation-parametrized m-function: mul 0 routes to m_theta, mul 2 yields
/// M₀, mul 1 evaluates (A* + B*M₀)(B* − A*M₀)⁻¹.
WeylValue m_relation_from(const BoundaryData& bd, const SelfAdjointRelation& rel,
                          double guard_factor = 1e-10);

// Convenience entry points that integrate for the boundary data.
WeylValue m0(const SLProblem& pr, cdouble lambda, const IntegratorConfig& cfg = {});
WeylValue m_inf(const SLProblem& pr, cdouble lambda, const IntegratorConfig& cfg = {});
WeylValue m_theta(const SLProblem& pr, const Mat2& theta, cdouble lambda,
                  const IntegratorConfig& cfg = {});
WeylValue m_relation(const SLProblem& pr, const SelfAdjointRelation& rel, cdouble lambda,
                     const IntegratorConfig& cfg = {});

/// Smallest eigenvalue of Im M — the Herglotz defect probe.
double herglotz_min_eigenvalue(const Mat2& m);

}  // namespace slx

#endif  // SLX_WEYL_HPP
