#ifndef SLX_QUADRATURE_HPP
#define SLX_QUADRATURE_HPP

#include <functional>

namespace slx {

/// 15-point Gauss–Legendre on [lo, hi].
double gauss15(const std::function<double(double)>& f, double lo, double hi);

/// Adaptive quadrature on a finite interval where the integrand may be
/// singular-but-integrable at the endpoints. Dyadic refinement toward both
/// endpoints with Gauss panels in between; relative tolerance best-effort.
double integrate_endpoint_safe(const std::function<double(double)>& f, double lo, double hi,
                               double rel_tol = 1e-12, int max_depth = 52);

/// Verdict of the dyadic divergence heuristic for ∫ f near an endpoint.
enum class TailVerdict { convergent, divergent, inconclusive };

struct TailReport {
    TailVerdict verdict;
    double value;        // partial integral accumulated (meaningful when convergent)
    double growth;       // last partial sum / first panel magnitude
    double last_ratio;   // ΔS_k / ΔS_{k−1} at the deepest levels
};

/// Integrates f over panels [e ± 2^{-k}Δ, …] approaching the endpoint
/// `endpoint` from inside the interval starting at `interior`. Divergence is
/// declared when partial sums exceed `hard_ratio`× the first panel or when the
/// panel increments stop decaying (log-divergence); convergence when the
/// geometric tail estimate is negligible.
TailReport dyadic_tail(const std::function<double(double)>& f, double interior, double endpoint,
                       int max_depth = 48, double hard_ratio = 1e6);

/// As above but toward +∞ (or −∞): panels [c·2^k, c·2^{k+1}].
TailReport dyadic_tail_infinite(const std::function<double(double)>& f, double interior,
                                bool to_plus_infinity, int max_depth = 40,
                                double hard_ratio = 1e6);

}  // namespace slx

#endif  // SLX_QUADRATURE_HPP
