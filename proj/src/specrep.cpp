#include "slx/specrep.hpp"

#include <cmath>

namespace slx {

namespace {

Mat2 n_matrix(const BoundaryData& bd) { return {-bd.u10, 1.0, 1.0, -bd.u21}; }

Mat2 minf_of(const BoundaryData& bd) {
    return Mat2{bd.u21, 1.0, 1.0, bd.u10} * (cdouble(1.0) / bd.u11);
}

struct EpsResult {
    Mat2 weight;
    double error;
};

/// −iε·M(λₙ+iε) on ε ∈ {1e−4, 1e−5, 1e−6}, affinely extrapolated to ε → 0.
EpsResult epsilon_weight(const std::function<Mat2(cdouble)>& m_of, double lambda_n) {
    const double eps[3] = {1e-4, 1e-5, 1e-6};
    Mat2 w[3];
    for (int i = 0; i < 3; ++i) {
        const cdouble z(lambda_n, eps[i]);
        w[i] = m_of(z) * cdouble(0.0, -eps[i]);
    }
    auto affine0 = [](const Mat2& wa, double ea, const Mat2& wb, double eb) {
        // value at ε = 0 of the affine interpolant
        return (wa * eb - wb * ea) * (1.0 / (eb - ea));
    };
    const Mat2 ext_coarse = affine0(w[0], eps[0], w[1], eps[1]);
    const Mat2 ext_fine = affine0(w[1], eps[1], w[2], eps[2]);
    EpsResult r;
    r.weight = ext_fine.hermitian_part();
    r.error = (ext_fine - ext_coarse).max_abs() + 1e-12 * (r.weight.max_abs() + 1.0);
    return r;
}

int weight_rank(const Mat2& w) {
    const auto ev = w.hermitian_eigenvalues();
    const double cut = 1e-7 * (std::abs(ev[1]) + 1.0);
    return (std::abs(ev[0]) > cut ? 1 : 0) + (std::abs(ev[1]) > cut ? 1 : 0);
}

void check_psd(const Mat2& w, const char* what) {
    const auto ev = w.hermitian_eigenvalues();
    const double tr = std::real(w.trace());
    if (ev[0] < -1e-8 * (std::abs(tr) + 1.0))
        throw ResidueMismatch(std::string(what) +
                              ": weight not positive semidefinite under the fixed convention");
}

}  // namespace

PointMass point_mass_L0(const SpectralEngine& eng, double lambda_n) {
    const auto& bd = eng.data(lambda_n);
    // The ε-limit of ε·M₀ vanishes off the spectrum: a certified eigenvalue
    // must make u2[0](b) small.
    if (std::abs(bd.u20) > pole_guard_scale(bd, 1e-6))
        throw NotAnEigenvalue("point_mass_L0: u2[0](b) not small; lambda not in sigma(L0)");

    // Primary: μ = −N(λₙ)/∂λu₂[0], ∂λ by Richardson-extrapolated central FD.
    const double h = std::max(1e-5, 1e-5 * std::abs(lambda_n));
    auto u20_at = [&](double l) { return eng.data(l).u20; };
    const cdouble d1 = (u20_at(lambda_n + h) - u20_at(lambda_n - h)) / (2.0 * h);
    const cdouble d2 = (u20_at(lambda_n + h / 2) - u20_at(lambda_n - h / 2)) / h;
    const cdouble dlam = (d2 * 4.0 - d1) / 3.0;
    const double fd_err = std::abs(d2 - d1) / 3.0;
    if (std::abs(dlam) < 1e-12)
        throw SolverFailure("point_mass_L0: vanishing derivative of u2[0] at the eigenvalue");

    Mat2 w_deriv = (n_matrix(bd) * (cdouble(-1.0) / dlam)).hermitian_part();
    const double err_deriv =
        w_deriv.max_abs() * (fd_err / std::abs(dlam)) + 1e-9 * (w_deriv.max_abs() + 1.0);

    // Secondary: ε-extrapolation of −iε M₀(λₙ + iε).
    const auto eps = epsilon_weight(
        [&](cdouble z) {
            const auto& b = eng.data(z);
            return n_matrix(b) * (cdouble(1.0) / b.u20);
        },
        lambda_n);

    const double disagreement = (w_deriv - eps.weight).max_abs();
    if (disagreement > err_deriv + eps.error)
        throw ResidueMismatch("point_mass_L0: derivative-residue and epsilon methods disagree");

    check_psd(w_deriv, "point_mass_L0");
    PointMass pm;
    pm.lambda = lambda_n;
    pm.weight = w_deriv;
    pm.rank = weight_rank(w_deriv);
    pm.method = MassMethod::derivative_residue;
    pm.error_estimate = err_deriv + eps.error;
    pm.weight_secondary = eps.weight;
    return pm;
}

PointMass point_mass_theta(const SpectralEngine& eng, const Mat2& vartheta, double lambda_n) {
    const auto& bd = eng.data(lambda_n);
    if (!eng.in_rho_Linf(bd))
        throw AtPole("point_mass_theta: lambda_n lies in sigma(Linf)");
    const Mat2 w_mat = vartheta - minf_of(bd);
    const double scale = w_mat.max_abs();
    if (std::abs(w_mat.det()) > 1e-6 * (scale * scale + 1.0))
        throw NotAnEigenvalue("point_mass_theta: det(vartheta − Minf) not small");

    auto m_of = [&](cdouble z) {
        const auto& b = eng.data(z);
        const Mat2 diff = vartheta - minf_of(b);
        return diff.adjugate() * (cdouble(1.0) / diff.det());
    };
    const auto eps = epsilon_weight(m_of, lambda_n);

    const int nullity = w_mat.nullity(eng.options().nullity_thresh);
    PointMass pm;
    pm.lambda = lambda_n;
    if (nullity >= 2) {
        // Degenerate eigenvalue: the scalar-derivative residue formula assumes
        // a simple pole, so only the ε route applies.
        check_psd(eps.weight, "point_mass_theta");
        pm.weight = eps.weight;
        pm.rank = weight_rank(eps.weight);
        pm.method = MassMethod::epsilon_extrapolation;
        pm.error_estimate = eps.error;
        pm.weight_secondary = eps.weight;
        return pm;
    }

    // Simple pole: μ = −adj(W)/∂λ det W.
    const double h = std::max(1e-5, 1e-5 * std::abs(lambda_n));
    auto detw_at = [&](double l) {
        const auto& b = eng.data(l);
        return (vartheta - minf_of(b)).det();
    };
    const cdouble d1 = (detw_at(lambda_n + h) - detw_at(lambda_n - h)) / (2.0 * h);
    const cdouble d2 = (detw_at(lambda_n + h / 2) - detw_at(lambda_n - h / 2)) / h;
    const cdouble dlam = (d2 * 4.0 - d1) / 3.0;
    const double fd_err = std::abs(d2 - d1) / 3.0;
    if (std::abs(dlam) < 1e-12)
        throw SolverFailure("point_mass_theta: vanishing derivative of det(vartheta − Minf)");

    Mat2 w_deriv = (w_mat.adjugate() * (cdouble(-1.0) / dlam)).hermitian_part();
    const double err_deriv =
        w_deriv.max_abs() * (fd_err / std::abs(dlam)) + 1e-9 * (w_deriv.max_abs() + 1.0);

    if ((w_deriv - eps.weight).max_abs() > err_deriv + eps.error)
        throw ResidueMismatch("point_mass_theta: methods disagree beyond combined error bars");

    check_psd(w_deriv, "point_mass_theta");
    pm.weight = w_deriv;
    pm.rank = weight_rank(w_deriv);
    pm.method = MassMethod::derivative_residue;
    pm.error_estimate = err_deriv + eps.error;
    pm.weight_secondary = eps.weight;
    return pm;
}

std::vector<EigenvectorRep> eigenvector_rep(const SpectralEngine& eng, const Mat2& vartheta,
                                            double lambda_n) {
    const auto& bd = eng.data(lambda_n);
    if (!eng.in_rho_Linf(bd))
        throw AtPole("eigenvector_rep: lambda_n lies in sigma(Linf)");
    const Mat2 w = vartheta - minf_of(bd);
    const double scale = w.max_abs();
    if (std::abs(w.det()) > 1e-6 * (scale * scale + 1.0))
        throw NotAnEigenvalue("eigenvector_rep: lambda_n is not an eigenvalue of L~(vartheta)");

    if (w.nullity(eng.options().nullity_thresh) >= 2)
        return {{lambda_n, {1.0, 0.0}}, {lambda_n, {0.0, 1.0}}};

    const cdouble u11 = bd.u11, u21 = bd.u21;
    std::array<cdouble, 2> coeff{1.0 - vartheta.a12 * u11, vartheta.a11 * u11 - u21};
    const double nv = std::sqrt(std::norm(coeff[0]) + std::norm(coeff[1]));
    if (nv < 1e-10 * (std::abs(u11) + std::abs(u21) + 1.0))
        return {{lambda_n, {1.0, 0.0}}, {lambda_n, {0.0, 1.0}}};  // degenerate in disguise
    return {{lambda_n, coeff}};
}

}  // namespace slx
