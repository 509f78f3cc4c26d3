#include "slx/quadrature.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace slx {

namespace {
// Nodes/weights for 15-point Gauss–Legendre on [-1, 1].
constexpr double kGx[15] = {
    -0.9879925180204854, -0.9372733924007060, -0.8482065834104272, -0.7244177313601700,
    -0.5709721726085388, -0.3941513470775634, -0.2011940939974345, 0.0,
    0.2011940939974345,  0.3941513470775634,  0.5709721726085388,  0.7244177313601700,
    0.8482065834104272,  0.9372733924007060,  0.9879925180204854};
constexpr double kGw[15] = {
    0.0307532419961173, 0.0703660474881081, 0.1071592204671719, 0.1395706779261543,
    0.1662692058169939, 0.1861610000155622, 0.1984314853271116, 0.2025782419255613,
    0.1984314853271116, 0.1861610000155622, 0.1662692058169939, 0.1395706779261543,
    0.1071592204671719, 0.0703660474881081, 0.0307532419961173};
}  // namespace

double gauss15(const std::function<double(double)>& f, double lo, double hi) {
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    double s = 0.0;
    for (int i = 0; i < 15; ++i) s += kGw[i] * f(c + h * kGx[i]);
    return s * h;
}

namespace {
double adaptive(const std::function<double(double)>& f, double lo, double hi, double whole,
                double tol, int depth) {
    const double mid = 0.5 * (lo + hi);
    const double left = gauss15(f, lo, mid), right = gauss15(f, mid, hi);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= tol * (std::abs(left + right) + 1e-300))
        return left + right;
    return adaptive(f, lo, mid, left, tol, depth - 1) +
           adaptive(f, mid, hi, right, tol, depth - 1);
}
}  // namespace

double integrate_endpoint_safe(const std::function<double(double)>& f, double lo, double hi,
                               double rel_tol, int max_depth) {
    if (!(hi > lo)) return 0.0;
    const double len = hi - lo;
    // Dyadic panels shrink toward both endpoints; the interior core is one
    // adaptive panel. Depth 52 reaches the double-precision resolution limit.
    double total = 0.0;
    const double core_lo = lo + 0.25 * len, core_hi = hi - 0.25 * len;
    total += adaptive(f, core_lo, core_hi, gauss15(f, core_lo, core_hi), rel_tol, 18);
    double width = 0.25 * len;
    double a_edge = core_lo, b_edge = core_hi;
    for (int k = 0; k < max_depth; ++k) {
        width *= 0.5;
        const double a_next = a_edge - width, b_next = b_edge + width;
        if (a_next <= lo || b_next >= hi) break;
        total += gauss15(f, a_next, a_edge) + gauss15(f, b_edge, b_next);
        a_edge = a_next;
        b_edge = b_next;
        const double tail = std::abs(gauss15(f, a_edge, a_edge + width * 0.5)) +
                            std::abs(gauss15(f, b_edge - width * 0.5, b_edge));
        if (tail < rel_tol * (std::abs(total) + 1.0) && k > 8) break;
    }
    // Remaining slivers next to the endpoints, split once more for safety.
    if (a_edge > lo) total += gauss15(f, lo + (a_edge - lo) * 1e-12, a_edge);
    if (b_edge < hi) total += gauss15(f, b_edge, hi - (hi - b_edge) * 1e-12);
    return total;
}

TailReport dyadic_tail(const std::function<double(double)>& f, double interior, double endpoint,
                       int max_depth, double hard_ratio) {
    const double span = endpoint - interior;  // signed
    double sum = 0.0, first_panel = 0.0, prev_inc = 0.0, last_ratio = 0.0;
    int ratio_hits = 0;
    double inner = interior;  // panel edge closest to `interior`
    for (int k = 1; k <= max_depth; ++k) {
        const double outer = endpoint - span * std::pow(0.5, k);
        if (outer == inner) break;  // resolution limit
        const double inc = gauss15(f, inner, outer);
        sum += inc;
        if (k == 1) first_panel = std::abs(inc) + 1e-300;
        if (std::abs(sum) > hard_ratio * first_panel)
            return {TailVerdict::divergent, sum, std::abs(sum) / first_panel, 1.0};
        if (k > 1 && std::abs(prev_inc) > 0.0) {
            last_ratio = std::abs(inc) / std::abs(prev_inc);
            // Increments that stop decaying signal (at least) log divergence.
            if (k > 6 && last_ratio > 0.9) {
                if (++ratio_hits >= 4)
                    return {TailVerdict::divergent, sum, std::abs(sum) / first_panel, last_ratio};
            } else {
                ratio_hits = 0;
            }
            if (k > 6 && last_ratio < 0.85) {
                const double tail_est = std::abs(inc) * last_ratio / (1.0 - last_ratio);
                if (tail_est < 1e-11 * (std::abs(sum) + 1.0))
                    return {TailVerdict::convergent, sum + inc * last_ratio / (1.0 - last_ratio),
                            std::abs(sum) / first_panel, last_ratio};
            }
        }
        prev_inc = inc;
        inner = outer;
    }
    return {TailVerdict::inconclusive, sum, std::abs(sum) / first_panel, last_ratio};
}

TailReport dyadic_tail_infinite(const std::function<double(double)>& f, double interior,
                                bool to_plus_infinity, int max_depth, double hard_ratio) {
    const double dir = to_plus_infinity ? 1.0 : -1.0;
    const double base = std::max(1.0, std::abs(interior));
    double sum = 0.0, first_panel = 0.0, prev_inc = 0.0, last_ratio = 0.0;
    double inner = interior;
    for (int k = 0; k <= max_depth; ++k) {
        const double outer = interior + dir * base * (std::pow(2.0, k + 1) - 1.0);
        const double inc = gauss15(f, inner, outer);
        sum += inc;
        if (k == 0) first_panel = std::abs(inc) + 1e-300;
        if (std::abs(sum) > hard_ratio * first_panel)
            return {TailVerdict::divergent, sum, std::abs(sum) / first_panel, 1.0};
        if (k > 0 && std::abs(prev_inc) > 0.0) {
            last_ratio = std::abs(inc) / std::abs(prev_inc);
            if (k > 3 && last_ratio < 0.5) {
                const double tail_est = std::abs(inc) * last_ratio / (1.0 - last_ratio);
                if (tail_est < 1e-11 * (std::abs(sum) + 1.0))
                    return {TailVerdict::convergent, sum, std::abs(sum) / first_panel, last_ratio};
            }
        }
        prev_inc = inc;
        inner = outer;
    }
    // Panels kept growing or stayed flat: treat as divergent when the sum
    // clearly ran away, otherwise inconclusive.
    if (std::abs(sum) > 1e3 * first_panel)
        return {TailVerdict::divergent, sum, std::abs(sum) / first_panel, last_ratio};
    return {TailVerdict::inconclusive, sum, std::abs(sum) / first_panel, last_ratio};
}

}  // namespace slx
