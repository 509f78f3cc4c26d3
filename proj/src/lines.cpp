#include "slx/lines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace slx {

void LineFamily::validate() const {
    const double tol_t = 1e-9 * (vartheta_tilde.max_abs() + 1.0);
    const double tol_d = 1e-9 * (vartheta.max_abs() + 1.0);
    if (!vartheta_tilde.is_hermitian(tol_t) || !vartheta.is_hermitian(tol_d))
        throw InadmissiblePair("line family matrices must be Hermitian");
}

namespace {

struct XCoefficients {
    // det X(t) = A t² + B t + C with X = u₁[1](ϑ̃ + tϑ − M∞).
    double A, B, C;
    double u11, u10, u21, u20;
};

XCoefficients x_coefficients(const BoundaryData& bd, const LineFamily& fam) {
    const double u10 = std::real(bd.u10), u11 = std::real(bd.u11);
    const double u21 = std::real(bd.u21), u20 = std::real(bd.u20);
    const Mat2 g{u21, 1.0, 1.0, u10};
    const Mat2 p = fam.vartheta_tilde * u11 - g;
    const Mat2 q = fam.vartheta * u11;
    XCoefficients x;
    x.A = std::real(q.det());
    x.B = std::real(mixed_det(p, q));
    x.C = std::real(p.det());
    x.u11 = u11;
    x.u10 = u10;
    x.u21 = u21;
    x.u20 = u20;
    return x;
}

double leftover_expression(const XCoefficients& x, const LineFamily& fam) {
    // Diagnostic only; see the notes on why this is not used as a gate.
    const double vt11 = std::real(fam.vartheta_tilde.a11);
    const double vt22 = std::real(fam.vartheta_tilde.a22);
    const double vt12 = std::real(fam.vartheta_tilde.a12 + fam.vartheta_tilde.a21);
    const double detv = std::real(fam.vartheta.det());
    return (x.u11 - 1.0) * (vt12 + x.u21 * x.u10 - vt22 * x.u21 - vt11 * x.u10) +
           x.u11 * (2.0 * detv + 1.0);
}

}  // namespace

TSolution t_roots(const SpectralEngine& eng, const LineFamily& fam, double lambda) {
    fam.validate();
    const auto& bd = eng.data(lambda);
    if (!eng.in_rho_Linf(bd))
        throw AtPole("t_roots: lambda lies in sigma(Linf) (u1[1] below pole guard)");

    const auto x = x_coefficients(bd, fam);
    TSolution sol;
    sol.lambda = lambda;
    sol.leftover_residual = std::abs(leftover_expression(x, fam));

    const double v_norm = fam.vartheta.max_abs();
    const double tol_det = 1e-10 * (v_norm * v_norm + 1e-300);
    const double scale_b = std::abs(x.u11) * (fam.vartheta_tilde.max_abs() + 1.0) * (v_norm + 1.0);

    if (std::abs(std::real(fam.vartheta.det())) > tol_det) {
        sol.tcase = TCase::quadratic;
        const double disc = x.B * x.B - 4.0 * x.A * x.C;
        if (disc < 0.0) return sol;  // no real t
        const double sq = std::sqrt(disc);
        const double qq = -0.5 * (x.B + (x.B >= 0 ? sq : -sq));
        double t1, t2;
        if (qq != 0.0) {
            t1 = qq / x.A;
            t2 = x.C / qq;
        } else {  // B = 0 and C = 0
            t1 = 0.0;
            t2 = 0.0;
        }
        if (t1 > t2) std::swap(t1, t2);
        if (t2 - t1 < 1e-12 * (1.0 + std::abs(t1))) {
            sol.double_t = 0.5 * (t1 + t2);
            sol.roots = {*sol.double_t};
        } else {
            sol.roots = {t1, t2};
        }
        return sol;
    }

    // det ϑ = 0: det X is (at most) linear in t; c and d are the paper's
    // degenerate-case classifiers, scaled so B = u₁[1]·c and C = u₁[1]·d.
    sol.c = x.B / x.u11;
    sol.d = x.C / x.u11;
    if (std::abs(sol.c) > 1e-10 * (scale_b / std::abs(x.u11) + 1.0)) {
        sol.tcase = TCase::linear;
        sol.roots = {-sol.d / sol.c};
        return sol;
    }
    sol.tcase = TCase::all_or_none;
    sol.all_t = std::abs(sol.d) <= 1e-9 * (fam.vartheta_tilde.max_abs() + std::abs(x.u20) + 1.0);
    return sol;
}

std::vector<double> t_diag(const SpectralEngine& eng, double zeta, double eta, double lambda) {
    if (zeta == 0.0 || eta == 0.0)
        throw ZeroParameter("t_diag requires nonzero zeta and eta");
    const auto& bd = eng.data(lambda);
    if (!eng.in_rho_Linf(bd)) throw AtPole("t_diag: lambda lies in sigma(Linf)");
    const double u10 = std::real(bd.u10), u11 = std::real(bd.u11), u21 = std::real(bd.u21);
    const double disc = 4.0 * eta * zeta + std::pow(eta * u21 - zeta * u10, 2);
    if (disc < 0.0) return {};
    const double sq = std::sqrt(disc);
    const double denom = 2.0 * zeta * eta * u11;
    double t1 = (eta * u21 + zeta * u10 + sq) / denom;
    double t2 = (eta * u21 + zeta * u10 - sq) / denom;
    if (t1 > t2) std::swap(t1, t2);
    if (t2 - t1 < 1e-12 * (1.0 + std::abs(t1))) return {0.5 * (t1 + t2)};
    return {t1, t2};
}

TDoubleResult t_double(const SpectralEngine& eng, const LineFamily& fam, double lambda) {
    fam.validate();
    const double scale = fam.vartheta.max_abs();
    auto require_nonzero = [&](cdouble v, const char* which) {
        if (std::abs(v) <= 1e-12 * (scale + 1.0)) {
            std::ostringstream os;
            os << "t_double hypothesis violated: " << which << " vanishes";
            throw HypothesisViolated(os.str());
        }
    };
    require_nonzero(fam.vartheta.a11, "vartheta_11");
    require_nonzero(fam.vartheta.a12, "vartheta_12");
    require_nonzero(fam.vartheta.a22, "vartheta_22");
    require_nonzero(fam.vartheta.det(), "det(vartheta)");

    const auto& bd = eng.data(lambda);
    if (!eng.in_rho_Linf(bd)) throw AtPole("t_double: lambda lies in sigma(Linf)");
    const double u10 = std::real(bd.u10), u11 = std::real(bd.u11), u21 = std::real(bd.u21);
    const Mat2 minf = Mat2{u21, 1.0, 1.0, u10} * (1.0 / u11);

    const cdouble t11 = (minf.a11 - fam.vartheta_tilde.a11) / fam.vartheta.a11;
    const cdouble t12 = (minf.a12 - fam.vartheta_tilde.a12) / fam.vartheta.a12;
    const cdouble t21 = (minf.a21 - fam.vartheta_tilde.a21) / fam.vartheta.a21;
    const cdouble t22 = (minf.a22 - fam.vartheta_tilde.a22) / fam.vartheta.a22;

    TDoubleResult out;
    const cdouble ts[4] = {t11, t12, t21, t22};
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            out.spread = std::max(out.spread, std::abs(ts[i] - ts[j]));
    double imag_max = 0.0;
    cdouble mean = 0.0;
    for (const auto& t : ts) {
        imag_max = std::max(imag_max, std::abs(std::imag(t)));
        mean += t * 0.25;
    }

    const auto xc = x_coefficients(bd, fam);
    out.leftover_residual = std::abs(leftover_expression(xc, fam));

    const double t_scale = std::abs(mean) + 1.0;
    if (out.spread > 1e-7 * t_scale || imag_max > 1e-7 * t_scale) return out;

    const double t_star = std::real(mean);
    const Mat2 zero_mat = fam.vartheta_tilde + fam.vartheta * t_star - minf;
    out.zero_residual = zero_mat.max_abs();
    if (out.zero_residual > 1e-7 * (minf.max_abs() + 1.0)) return out;
    out.t = t_star;
    return out;
}

DisjointPairResult disjoint_pair(const SpectralEngine& eng, const BoundaryParameter& theta0,
                                 double lo, double hi, int max_tries) {
    const auto base = eng.eigenvalues(theta0, lo, hi);
    std::vector<double> s0;
    for (const auto& r : base.records) s0.push_back(r.lambda);
    for (const auto& u : base.uncovered) s0.push_back(u.lambda);
    std::sort(s0.begin(), s0.end());

    const double sep = 2.0 * eng.options().tol_root;
    std::ostringstream tried;
    for (int k = 1; k <= max_tries; ++k) {
        // Deterministic low-discrepancy walk along the positive-definite line.
        const double t = 0.1 + 0.618033988749895 * k;
        tried << (k > 1 ? ", " : "") << t;
        const Mat2 theta1 = Mat2::identity() * (-1.0 / t);
        const auto cand = eng.eigenvalues(BoundaryParameter::matrix(theta1), lo, hi);
        std::vector<double> s1;
        for (const auto& r : cand.records) s1.push_back(r.lambda);
        for (const auto& u : cand.uncovered) s1.push_back(u.lambda);

        double min_dist = std::numeric_limits<double>::infinity();
        for (double a : s0)
            for (double b : s1) min_dist = std::min(min_dist, std::abs(a - b));
        if (s0.empty() || s1.empty()) min_dist = std::numeric_limits<double>::infinity();
        if (min_dist > sep) return {theta1, t, min_dist};
    }
    throw SearchExhausted("no disjoint partner found on the scanned line; tried t = " +
                          tried.str());
}

}  // namespace slx
