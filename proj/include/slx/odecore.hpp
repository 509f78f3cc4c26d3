#ifndef SLX_ODECORE_HPP
#define SLX_ODECORE_HPP

#include <iosfwd>
#include <optional>
#include <string>

#include "slx/problem.hpp"
#include "slx/types.hpp"

namespace slx {

struct IntegratorConfig {
    // Singular-endpoint offsets as fractions of the interval length; a value
    // < 0 selects the default 1e-6. Regular endpoints always integrate to the
    // endpoint itself.
    double delta_a_frac = -1.0;
    double delta_b_frac = -1.0;
    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
    int max_steps = 400000;
    int richardson_levels = 3;

    void validate() const;
    double delta_a() const { return delta_a_frac < 0 ? 1e-6 : delta_a_frac; }
    double delta_b() const { return delta_b_frac < 0 ? 1e-6 : delta_b_frac; }
};

/// Quasi-derivatives of the fundamental system u₁(·,λ), u₂(·,λ) at b, with
/// the Wronskian normalization u10·u21 − u11·u20 = 1.
struct BoundaryData {
    cdouble lambda;
    cdouble u10, u11, u20, u21;
    double wronskian_residual = 0.0;    // |W(b) − 1| before the final rescale
    double wronskian_drift = 0.0;       // max checkpoint deviation of [u1,u2]
    double delta_error_estimate = 0.0;  // Richardson-in-δ error estimate

    cdouble wronskian_q() const { return u10 * u21 - u11 * u20; }
};

/// Library bracket [f,g](x) = p(x)(f g' − f' g) = f·(pg') − (pf')·g.
/// Derivatives by Richardson-extrapolated central differences.
cdouble bracket(const CoefficientTriple& coeff, const RealFn& f, const RealFn& g, double x);

/// Bracket from values and quasi-momenta: f·pg − pf·g.
inline cdouble bracket_qm(cdouble f, cdouble pf, cdouble g, cdouble pg) {
    return f * pg - pf * g;
}

class FundamentalSolver {
public:
    FundamentalSolver(const SLProblem& problem, IntegratorConfig config = {});

    /// Integrates u₁, u₂ across the interval and extracts quasi-derivatives
    /// at b (first-order frame tail corrections plus Richardson-in-δ).
    BoundaryData boundary_data(cdouble lambda) const;

    /// |(λ−λ₀)∫u₂ ṽ w − ([u₂,ṽ](b) − [u₂,ṽ](a))| with ṽ the backward
    /// continuation of v_b (a genuine λ₀-solution).
    struct GreenReport {
        double residual;
        cdouble integral;    // ∫ u₂ ṽ w over (a,b), tails included
        cdouble bracket_b;   // [u₂,ṽ](b)
        cdouble bracket_a;   // [u₂,ṽ](a)
    };
    GreenReport green_identity(cdouble lambda) const;

    /// CSV trajectory dump: x, Re/Im of u₁, pu₁', u₂, pu₂', |W−1|.
    void dump_trajectory(cdouble lambda, std::ostream& os) const;

    const SLProblem& problem() const { return problem_; }
    const IntegratorConfig& config() const { return config_; }

    double cut_a(double delta_frac) const;
    double cut_b(double delta_frac) const;

private:
    struct FrameMoments {
        double uu = 0, uv = 0, vv = 0;  // ∫ w·frame·frame over the cut tail
    };

    BoundaryData boundary_data_at(cdouble lambda, double fa, double fb) const;
    FrameMoments moments_a(double cut) const;
    FrameMoments moments_b(double cut) const;

    SLProblem problem_;
    IntegratorConfig config_;
    bool singular_a_ = false, singular_b_ = false;
    mutable std::vector<std::pair<double, FrameMoments>> mom_cache_a_, mom_cache_b_;
};

double green_identity_residual(const SLProblem& problem, cdouble lambda,
                               const IntegratorConfig& config = {});

BoundaryData fundamental_at_b(const SLProblem& problem, cdouble lambda,
                              const IntegratorConfig& config = {});

}  // namespace slx

#endif  // SLX_ODECORE_HPP
