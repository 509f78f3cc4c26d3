#include "slx/weyl.hpp"

#include <cmath>

namespace slx {

namespace {
Mat2 n_matrix(const BoundaryData& bd) {
    return {-bd.u10, 1.0, 1.0, -bd.u21};
}
Mat2 g_matrix(const BoundaryData& bd) {
    return {bd.u21, 1.0, 1.0, bd.u10};
}
}  // namespace

SelfAdjointRelation SelfAdjointRelation::from_pair(const Mat2& a0, const Mat2& b0, double tol) {
    const double scale = a0.max_abs() + b0.max_abs();
    if (scale <= 0.0) throw InadmissiblePair("zero representing pair");

    const Mat2 sym = a0.adjoint() * b0 - b0.adjoint() * a0;
    if (sym.max_abs() > tol * scale * scale)
        throw InadmissiblePair("A*B is not Hermitian: relation is not self-adjoint");
    // Stacked rank 2 via the Gram matrix A*A + B*B.
    const Mat2 gram = a0.adjoint() * a0 + b0.adjoint() * b0;
    if (std::abs(gram.det()) <= tol * tol * scale * scale * scale * scale)
        throw InadmissiblePair("representing pair is rank deficient");

    // Cayley normalization: U = −(A0 + iB0)(A0 − iB0)⁻¹ is unitary;
    // A = (I − U)/2, B = i(I + U)/2.
    const cdouble i1(0.0, 1.0);
    Mat2 denom = a0 - b0 * i1;
    Mat2 u = -(a0 + b0 * i1) * denom.inverse(1e-14);
    const Mat2 unit_res = u.adjoint() * u - Mat2::identity();
    if (unit_res.max_abs() > 1e-6)
        throw InadmissiblePair("Cayley transform is not unitary: invalid pair");

    SelfAdjointRelation rel;
    rel.A = (Mat2::identity() - u) * cdouble(0.5);
    rel.B = (Mat2::identity() + u) * (i1 * 0.5);
    rel.mul_dim = rel.A.nullity(1e-9);

    if (rel.mul_dim == 1) {
        // Mul(θ) = B·ker(A); dom(θ) = its orthogonal complement.
        const auto ka = rel.A.kernel_direction();
        auto bk = rel.B.apply(ka);
        double nb = std::sqrt(std::norm(bk[0]) + std::norm(bk[1]));
        if (nb == 0.0) throw InadmissiblePair("degenerate kernel in representing pair");
        rel.mul_direction = {bk[0] / nb, bk[1] / nb};
        rel.op_direction = {-std::conj(rel.mul_direction[1]), std::conj(rel.mul_direction[0])};
        // θ_op from any φ with Aφ ≠ 0.
        std::array<cdouble, 2> phi{std::conj(ka[1]), -std::conj(ka[0])};  // ⊥ ker A
        const auto av = rel.A.apply(phi);
        const auto bv = rel.B.apply(phi);
        const cdouble denom_op =
            std::conj(rel.op_direction[0]) * av[0] + std::conj(rel.op_direction[1]) * av[1];
        const cdouble num_op =
            std::conj(rel.op_direction[0]) * bv[0] + std::conj(rel.op_direction[1]) * bv[1];
        if (std::abs(denom_op) < 1e-12)
            throw InadmissiblePair("operator part unresolved");
        const cdouble top = num_op / denom_op;
        if (std::abs(std::imag(top)) > 1e-7 * (std::abs(top) + 1.0))
            throw InadmissiblePair("operator part is not real");
        rel.theta_op = std::real(top);
    }
    return rel;
}

SelfAdjointRelation SelfAdjointRelation::graph_of(const Mat2& theta) {
    if (!theta.is_hermitian(1e-9 * (theta.max_abs() + 1.0)))
        throw InadmissiblePair("matrix parameter must be Hermitian");
    return from_pair(Mat2::identity(), theta);
}

Mat2 SelfAdjointRelation::as_matrix() const {
    if (mul_dim != 0) throw InadmissiblePair("relation has a multivalued part");
    return B * A.inverse(1e-14);
}

WeylValue m0_from(const BoundaryData& bd, double guard_factor) {
    const double guard = pole_guard_scale(bd, guard_factor);
    if (std::abs(bd.u20) <= guard)
        throw AtPole("m0: lambda lies in sigma(L0) (u2[0](b) below pole guard)");
    WeylValue v;
    v.lambda = bd.lambda;
    v.kind = WeylKind::M0;
    v.matrix = n_matrix(bd) * (cdouble(1.0) / bd.u20);
    v.condition_estimate = 1.0 / std::abs(bd.u20);
    return v;
}

WeylValue m_inf_from(const BoundaryData& bd, double guard_factor) {
    const double guard = pole_guard_scale(bd, guard_factor);
    if (std::abs(bd.u11) <= guard)
        throw AtPole("m_inf: lambda lies in sigma(Linf) (u1[1](b) below pole guard)");
    WeylValue v;
    v.lambda = bd.lambda;
    v.kind = WeylKind::Minf;
    v.matrix = g_matrix(bd) * (cdouble(1.0) / bd.u11);
    v.condition_estimate = 1.0 / std::abs(bd.u11);
    return v;
}

WeylValue m_theta_from(const BoundaryData& bd, const Mat2& theta, double guard_factor) {
    const WeylValue m0v = m0_from(bd, guard_factor);
    const Mat2 diff = theta - m0v.matrix;
    const double scale = diff.max_abs();
    const cdouble det = diff.det();
    if (std::abs(det) <= 1e-12 * (scale * scale + 1.0))
        throw AtPole("m_theta: lambda is an eigenvalue of L(theta)", diff.nullity());
    WeylValue v;
    v.lambda = bd.lambda;
    v.kind = WeylKind::Mtheta;
    v.matrix = diff.adjugate() * (cdouble(1.0) / det);
    v.condition_estimate = scale * scale / std::abs(det);
    return v;
}

WeylValue m_vartheta_from(const BoundaryData& bd, const Mat2& vartheta, double guard_factor) {
    const WeylValue mi = m_inf_from(bd, guard_factor);
    const Mat2 diff = vartheta - mi.matrix;
    const double scale = diff.max_abs();
    const cdouble det = diff.det();
    if (std::abs(det) <= 1e-12 * (scale * scale + 1.0))
        throw AtPole("m_vartheta: lambda is an eigenvalue of L~(vartheta)", diff.nullity());
    WeylValue v;
    v.lambda = bd.lambda;
    v.kind = WeylKind::Mtheta;
    v.matrix = diff.adjugate() * (cdouble(1.0) / det);
    v.condition_estimate = scale * scale / std::abs(det);
    return v;
}

WeylValue m_relation_from(const BoundaryData& bd, const SelfAdjointRelation& rel,
                          double guard_factor) {
    if (rel.mul_dim == 0) {
        WeylValue v = m_theta_from(bd, rel.as_matrix(), guard_factor);
        v.kind = WeylKind::Mrelation;
        return v;
    }
    const WeylValue m0v = m0_from(bd, guard_factor);
    if (rel.mul_dim == 2) {
        // θ = {0}×ℂ² forces Γ₀f = 0: the extension is L₀ and the product
        // formula collapses to M₀.
        WeylValue v = m0v;
        v.kind = WeylKind::Mrelation;
        return v;
    }
    const Mat2 as = rel.A.adjoint(), bs = rel.B.adjoint();
    const Mat2 denom = bs - as * m0v.matrix;
    const double scale = denom.max_abs();
    const cdouble det = denom.det();
    if (std::abs(det) <= 1e-12 * (scale * scale + 1.0))
        throw AtPole("m_relation: lambda is an eigenvalue of L(theta)", denom.nullity());
    WeylValue v;
    v.lambda = bd.lambda;
    v.kind = WeylKind::Mrelation;
    v.matrix = (as + bs * m0v.matrix) * denom.adjugate() * (cdouble(1.0) / det);
    v.condition_estimate = scale * scale / std::abs(det);
    return v;
}

WeylValue m0(const SLProblem& pr, cdouble lambda, const IntegratorConfig& cfg) {
    return m0_from(fundamental_at_b(pr, lambda, cfg));
}
WeylValue m_inf(const SLProblem& pr, cdouble lambda, const IntegratorConfig& cfg) {
    return m_inf_from(fundamental_at_b(pr, lambda, cfg));
}
WeylValue m_theta(const SLProblem& pr, const Mat2& theta, cdouble lambda,
                  const IntegratorConfig& cfg) {
    return m_theta_from(fundamental_at_b(pr, lambda, cfg), theta);
}
WeylValue m_relation(const SLProblem& pr, const SelfAdjointRelation& rel, cdouble lambda,
                     const IntegratorConfig& cfg) {
    return m_relation_from(fundamental_at_b(pr, lambda, cfg), rel);
}

double herglotz_min_eigenvalue(const Mat2& m) {
    return m.imag_part().hermitian_eigenvalues()[0];
}

}  // namespace slx
