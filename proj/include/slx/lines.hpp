#ifndef SLX_LINES_HPP
#define SLX_LINES_HPP

#include <optional>
#include <vector>

#include "slx/spectra.hpp"

namespace slx {

/// One-parameter family ϑ̃ + tϑ of Γ₀'-side boundary parameters.
struct LineFamily {
    Mat2 vartheta_tilde;
    Mat2 vartheta;
    double t_lo = -10.0, t_hi = 10.0;

    void validate() const;
    cdouble det_direction() const { return vartheta.det(); }
};

enum class TCase { quadratic, linear, all_or_none };

struct TSolution {
    double lambda = 0.0;
    std::vector<double> roots;  // 0, 1 or 2 real t values
    bool all_t = false;         // every t (degenerate all-or-none verdict)
    TCase tcase = TCase::quadratic;
    double c = 0.0, d = 0.0;    // degenerate-case diagnostics
    std::optional<double> double_t;  // coincident quadratic root, when present
    double leftover_residual = 0.0;  // reported diagnostic only
};

/// Real t with λ ∈ σ(L̃(ϑ̃+tϑ)): roots of det X, X = u₁[1]·(ϑ̃+tϑ−M∞(λ)).
TSolution t_roots(const SpectralEngine& eng, const LineFamily& fam, double lambda);

/// Closed-form diagonal case ϑ = diag(ζ,η), ϑ̃ = 0.
std::vector<double> t_diag(const SpectralEngine& eng, double zeta, double eta, double lambda);

struct TDoubleResult {
    std::optional<double> t;
    double spread = 0.0;          // max pairwise disagreement of the 4 t-expressions
    double zero_residual = 0.0;   // ‖ϑ̃ + tϑ − M∞(λ)‖ at the common t
    double leftover_residual = 0.0;
};

/// Multiplicity-two t: the four entrywise t-expressions must agree and
/// ϑ̃ + tϑ must equal M∞(λ). Throws HypothesisViolated if ϑ₁₁, ϑ₁₂, ϑ₂₂ or
/// det ϑ vanish.
TDoubleResult t_double(const SpectralEngine& eng, const LineFamily& fam, double lambda);

struct DisjointPairResult {
    Mat2 theta1;           // Γ₀-side matrix −I/t
    double t = 0.0;        // position on the line t·I (Γ₀' side)
    double min_distance = 0.0;
};

/// Searches the positive-definite line t·I for a parameter whose spectrum on
/// [lo, hi] is disjoint from σ(L(θ₀)). Throws SearchExhausted.
DisjointPairResult disjoint_pair(const SpectralEngine& eng, const BoundaryParameter& theta0,
                                 double lo, double hi, int max_tries = 40);

}  // namespace slx

#endif  // SLX_LINES_HPP
