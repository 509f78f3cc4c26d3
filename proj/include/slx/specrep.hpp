#ifndef SLX_SPECREP_HPP
#define SLX_SPECREP_HPP

#include <array>
#include <vector>

#include "slx/spectra.hpp"

namespace slx {

enum class MassMethod { derivative_residue, epsilon_extrapolation };

struct PointMass {
    double lambda = 0.0;
    Mat2 weight;        // Hermitian PSD 2×2
    int rank = 1;
    MassMethod method = MassMethod::derivative_residue;
    double error_estimate = 0.0;
    Mat2 weight_secondary;  // the other method's value, for reporting
};

/// 𝝁{λₙ} for L₀: −residue of M₀ at λₙ by the ∂λu₂[0] formula, cross-checked
/// against the −iε M₀(λₙ+iε) extrapolation. Throws NotAnEigenvalue /
/// ResidueMismatch.
PointMass point_mass_L0(const SpectralEngine& eng, double lambda_n);

/// 𝝁^ϑ{λₙ} for L̃(ϑ): −residue of (ϑ − M∞)⁻¹ at λₙ. Degenerate eigenvalues
/// use ε-extrapolation only.
PointMass point_mass_theta(const SpectralEngine& eng, const Mat2& vartheta, double lambda_n);

struct EigenvectorRep {
    double lambda = 0.0;
    std::array<cdouble, 2> coefficients{1.0, 0.0};
};

/// Spectral-representation eigenvector(s) of L̃(ϑ) at λₙ: the kernel
/// direction (1 − ϑ₁₂u₁[1], ϑ₁₁u₁[1] − u₂[1]) for simple eigenvalues, the two
/// canonical basis vectors for degenerate ones. ϑ = 0 gives L₀'s (1, −u₂[1]).
std::vector<EigenvectorRep> eigenvector_rep(const SpectralEngine& eng, const Mat2& vartheta,
                                            double lambda_n);

}  // namespace slx

#endif  // SLX_SPECREP_HPP
