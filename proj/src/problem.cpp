#include "slx/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "slx/quadrature.hpp"
#include "slx/rk.hpp"

namespace slx {

std::string to_string(EndpointClass c) {
    switch (c) {
        case EndpointClass::regular: return "regular";
        case EndpointClass::limit_circle_nonoscillatory: return "limit-circle-nonoscillatory";
        case EndpointClass::limit_point: return "limit-point";
    }
    return "?";
}

SLProblem free_problem() {
    SLProblem pr;
    pr.name = "free";
    pr.a = 0.0;
    pr.b = pi;
    pr.coeff = {[](double) { return 1.0; }, [](double) { return 0.0; },
                [](double) { return 1.0; }};
    pr.lambda0 = 0.0;
    pr.lower_bound = 0.0;
    pr.frame_a = {0.0, true, 0.0,
                  [](double x) { return x; }, [](double) { return 1.0; },
                  [](double) { return -1.0; }, [](double) { return 0.0; },
                  EndpointClass::regular};
    pr.frame_b = {pi, false, 0.0,
                  [](double x) { return x - pi; }, [](double) { return 1.0; },
                  [](double) { return -1.0; }, [](double) { return 0.0; },
                  EndpointClass::regular};
    return pr;
}

SLProblem legendre_problem() {
    SLProblem pr;
    pr.name = "legendre";
    pr.a = -1.0;
    pr.b = 1.0;
    pr.coeff = {[](double x) { return 1.0 - x * x; }, [](double) { return 0.0; },
                [](double) { return 1.0; }};
    pr.lambda0 = 0.0;
    pr.lower_bound = 0.0;
    auto one = [](double) { return 1.0; };
    auto zero = [](double) { return 0.0; };
    auto at = [](double x) { return std::atanh(x); };
    pr.frame_a = {-1.0, true, 0.0, one, zero, at, one, EndpointClass::limit_circle_nonoscillatory};
    pr.frame_b = {1.0, false, 0.0, one, zero, at, one, EndpointClass::limit_circle_nonoscillatory};
    return pr;
}

SLProblem bessel_problem(double nu) {
    if (!(nu > 0.0 && nu < 1.0))
        throw InvalidProblem("bessel builtin requires 0 < nu < 1");
    SLProblem pr;
    pr.name = "bessel";
    pr.a = 0.0;
    pr.b = 1.0;
    const double s = nu * nu - 0.25;
    pr.coeff = {[](double) { return 1.0; }, [s](double x) { return -s / (x * x); },
                [](double) { return 1.0; }};
    pr.lambda0 = 0.0;
    pr.lower_bound = 0.0;
    const double ap = 0.5 + nu, am = 0.5 - nu;
    pr.frame_a = {0.0, true, 0.0,
                  [ap](double x) { return std::pow(x, ap); },
                  [ap](double x) { return ap * std::pow(x, ap - 1.0); },
                  [am, nu](double x) { return -std::pow(x, am) / (2.0 * nu); },
                  [am, nu](double x) { return -am * std::pow(x, am - 1.0) / (2.0 * nu); },
                  EndpointClass::limit_circle_nonoscillatory};
    pr.frame_b = {1.0, false, 0.0,
                  [ap, am](double x) { return std::pow(x, ap) - std::pow(x, am); },
                  [ap, am](double x) { return ap * std::pow(x, ap - 1.0) - am * std::pow(x, am - 1.0); },
                  [ap, nu](double x) { return -std::pow(x, ap) / (2.0 * nu); },
                  [ap, nu](double x) { return -ap * std::pow(x, ap - 1.0) / (2.0 * nu); },
                  EndpointClass::regular};
    return pr;
}

std::optional<SLProblem> builtin_problem(const std::string& name, double bessel_nu) {
    if (name == "free") return free_problem();
    if (name == "legendre") return legendre_problem();
    if (name == "bessel") return bessel_problem(bessel_nu);
    return std::nullopt;
}

namespace {

struct PanelSums {
    std::vector<double> inc1, inc2;  // per-panel ∫ w|y_i|²
    int osc_panels1 = 0, osc_panels2 = 0;  // deepest panels containing zeros
};

enum class TailClass { conv, div, unknown };

TailClass classify_sums(const std::vector<double>& inc) {
    if (inc.size() < 6) return TailClass::unknown;
    const double first = std::abs(inc.front()) + 1e-300;
    double sum = 0.0;
    for (double v : inc) sum += v;
    if (std::abs(sum) > 1e6 * first) return TailClass::div;
    // Increment-decay test over the deepest panels.
    double ratio_acc = 0.0;
    int cnt = 0;
    for (size_t k = inc.size() - 4; k < inc.size(); ++k) {
        const double prev = std::abs(inc[k - 1]), cur = std::abs(inc[k]);
        if (prev <= 0.0) continue;
        ratio_acc += cur / prev;
        ++cnt;
    }
    if (cnt == 0) return TailClass::conv;  // increments vanished identically
    const double ratio = ratio_acc / cnt;
    if (ratio >= 0.98) return TailClass::div;
    if (ratio < 0.95) {
        const double tail = std::abs(inc.back()) * ratio / (1.0 - ratio);
        if (tail < 1e-6 * (std::abs(sum) + 1e-300)) return TailClass::conv;
    }
    return TailClass::unknown;
}

}  // namespace

EndpointClass classify_endpoint(const CoefficientTriple& coeff, double interior_anchor,
                                double endpoint, double lambda0) {
    const bool infinite = std::isinf(endpoint);

    if (!infinite) {
        // Regular iff 1/p, q, w all integrable up to the endpoint.
        auto invp = [&](double x) { return 1.0 / coeff.p(x); };
        auto absq = [&](double x) { return std::abs(coeff.q(x)); };
        const auto t1 = dyadic_tail(invp, interior_anchor, endpoint);
        const auto t2 = dyadic_tail(absq, interior_anchor, endpoint);
        const auto t3 = dyadic_tail(coeff.w, interior_anchor, endpoint);
        if (t1.verdict == TailVerdict::convergent && t2.verdict == TailVerdict::convergent &&
            t3.verdict == TailVerdict::convergent)
            return EndpointClass::regular;
    }

    // Integrate a λ₀-fundamental pair from the interior anchor toward the
    // endpoint, accumulating ∫ w|y|² per dyadic panel.
    DormandPrince<6> rk;
    rk.rel_tol = 1e-10;
    rk.abs_tol = 1e-12;
    DormandPrince<6>::State state{};  // y1, z1, y2, z2, I1, I2
    state[0] = 1.0;
    state[3] = 1.0;
    auto rhs = [&](double x, const DormandPrince<6>::State& y, DormandPrince<6>::State& dy) {
        const double p = coeff.p(x), q = coeff.q(x), w = coeff.w(x);
        dy[0] = y[1] / p;
        dy[1] = -(q + lambda0 * w) * y[0];
        dy[2] = y[3] / p;
        dy[3] = -(q + lambda0 * w) * y[2];
        dy[4] = w * std::norm(y[0]);
        dy[5] = w * std::norm(y[2]);
    };

    PanelSums sums;
    const int max_depth = infinite ? 34 : 45;
    double edge = interior_anchor;
    double prevI1 = 0.0, prevI2 = 0.0;
    double sign1 = 1.0, sign2 = 1.0;
    int zeros1 = 0, zeros2 = 0;
    std::vector<std::pair<int, int>> zero_counts;

    for (int k = 1; k <= max_depth; ++k) {
        double next;
        if (infinite) {
            const double base = std::max(1.0, std::abs(interior_anchor));
            next = interior_anchor + (endpoint > 0 ? 1.0 : -1.0) * base * (std::pow(2.0, k) - 1.0);
        } else {
            next = endpoint - (endpoint - interior_anchor) * std::pow(0.5, k);
        }
        if (next == edge) break;
        zeros1 = zeros2 = 0;
        auto observer = [&](double, const DormandPrince<6>::State& y) {
            const double s1 = std::real(y[0]) >= 0 ? 1.0 : -1.0;
            const double s2 = std::real(y[2]) >= 0 ? 1.0 : -1.0;
            if (s1 != sign1) ++zeros1;
            if (s2 != sign2) ++zeros2;
            sign1 = s1;
            sign2 = s2;
        };
        try {
            rk.integrate(rhs, state, edge, next, observer);
        } catch (const IntegrationDiverged&) {
            // Blow-up on the way to the endpoint: not square-integrable.
            return EndpointClass::limit_point;
        }
        const double I1 = std::real(state[4]), I2 = std::real(state[5]);
        sums.inc1.push_back(I1 - prevI1);
        sums.inc2.push_back(I2 - prevI2);
        zero_counts.emplace_back(zeros1, zeros2);
        prevI1 = I1;
        prevI2 = I2;
        edge = next;

        if (sums.inc1.size() >= 8) {
            const auto c1 = classify_sums(sums.inc1), c2 = classify_sums(sums.inc2);
            if (c1 == TailClass::div || c2 == TailClass::div) return EndpointClass::limit_point;
            if (c1 == TailClass::conv && c2 == TailClass::conv) {
                // Oscillation probe: zeros in each of the deepest panels.
                int oscillating = 0;
                const size_t n = zero_counts.size();
                for (size_t j = n - std::min<size_t>(4, n); j < n; ++j)
                    if (zero_counts[j].first > 0 || zero_counts[j].second > 0) ++oscillating;
                if (oscillating >= 4)
                    throw NonOscillationUndetermined(
                        "solution zeros accumulate toward the endpoint");
                return EndpointClass::limit_circle_nonoscillatory;
            }
        }
    }
    const auto c1 = classify_sums(sums.inc1), c2 = classify_sums(sums.inc2);
    if (c1 == TailClass::div || c2 == TailClass::div) return EndpointClass::limit_point;
    if (c1 == TailClass::conv && c2 == TailClass::conv)
        return EndpointClass::limit_circle_nonoscillatory;
    throw QuadratureInconclusive("square-integrability not resolved at configured depth");
}

NonprincipalResult make_nonprincipal(const CoefficientTriple& coeff, const RealFn& u,
                                     const RealFn& pu, double endpoint, double alpha_interior,
                                     double beta) {
    // u must not vanish between the endpoint and α.
    const double span = alpha_interior - endpoint;
    const double u_ref = u(alpha_interior);
    if (u_ref == 0.0) throw PrincipalVanishes("principal solution vanishes at alpha");
    for (int k = 0; k <= 40; ++k) {
        const double x = endpoint + span * std::pow(0.5, k);
        const double ux = u(x);
        if (!std::isfinite(ux) || ux * u_ref < 0.0 || ux == 0.0)
            throw PrincipalVanishes("principal solution changes sign in the integration range");
    }

    auto p = coeff.p;
    auto integrand = [p, u](double s) {
        const double us = u(s);
        return 1.0 / (p(s) * us * us);
    };
    auto g = [integrand, alpha_interior](double x) {
        if (x == alpha_interior) return 0.0;
        const double lo = std::min(x, alpha_interior), hi = std::max(x, alpha_interior);
        const double v = integrate_endpoint_safe(integrand, lo, hi, 1e-13, 40);
        return x < alpha_interior ? v : -v;
    };
    const double beta_c = beta;
    RealFn v = [u, g, beta_c](double x) { return -u(x) * (beta_c + g(x)); };
    RealFn pv = [u, pu, g, beta_c](double x) { return -pu(x) * (beta_c + g(x)) + 1.0 / u(x); };
    return {std::move(v), std::move(pv)};
}

namespace {

ValidationCheck frame_normalization_check(const std::string& name, const EndpointFrame& fr,
                                          double far) {
    // [u,v] is constant for a genuine frame; sample approaching the endpoint.
    double worst = 0.0;
    double val = 0.0;
    for (int k = 6; k <= 30; k += 4) {
        const double x = fr.location + (far - fr.location) * std::pow(0.5, k);
        val = fr.u(x) * fr.pv(x) - fr.pu(x) * fr.v(x);
        worst = std::max(worst, std::abs(val - 1.0));
    }
    return {name, worst < 1e-8, worst,
            worst < 1e-8 ? "" : "last [u,v] = " + std::to_string(val)};
}

ValidationCheck ode_residual_check(const std::string& name, const CoefficientTriple& coeff,
                                   double lambda0, const RealFn& y, const RealFn& py,
                                   double lo, double hi) {
    // (p y')' + (q + λ₀ w) y = 0, with (p y')' by central differences of py.
    double worst = 0.0;
    for (int i = 1; i <= 7; ++i) {
        const double x = lo + (hi - lo) * i / 8.0;
        const double h = 1e-5 * (hi - lo);
        const double dpy = (py(x + h) - py(x - h)) / (2.0 * h);
        const double res = dpy + (coeff.q(x) + lambda0 * coeff.w(x)) * y(x);
        const double scale = std::abs(py(x)) / (hi - lo) + std::abs(y(x)) *
                                 (std::abs(coeff.q(x)) + std::abs(lambda0) * coeff.w(x)) + 1.0;
        worst = std::max(worst, std::abs(res) / scale);
    }
    return {name, worst < 1e-5, worst, ""};
}

}  // namespace

ValidationReport validate_problem(const SLProblem& pr, bool throw_on_failure) {
    ValidationReport rep;
    auto add = [&](ValidationCheck c) {
        rep.all_pass = rep.all_pass && c.pass;
        rep.checks.push_back(std::move(c));
    };

    const bool finite = std::isfinite(pr.a) && std::isfinite(pr.b) && pr.a < pr.b;
    add({"interval-finite", finite, finite ? 0.0 : 1.0,
         finite ? "" : "interval must be finite with a < b (supply a compactified problem "
                       "for infinite endpoints)"});
    if (!finite) {
        if (throw_on_failure) throw InvalidProblem("invalid interval: " + rep.checks.back().detail);
        return rep;
    }

    const double len = pr.b - pr.a;
    {
        double worst = 0.0;
        bool ok = true;
        for (int i = 1; i < 24; ++i) {
            const double x = pr.a + len * (0.5 - 0.5 * std::cos(pi * i / 24.0));
            const double p = pr.coeff.p(x), q = pr.coeff.q(x), w = pr.coeff.w(x);
            if (!(p > 0.0) || !(w > 0.0) || !std::isfinite(p) || !std::isfinite(q) ||
                !std::isfinite(w)) {
                ok = false;
                worst = 1.0;
            }
        }
        add({"coefficients-positive", ok, worst, ok ? "" : "p or w not positive/finite"});
    }

    add({"anchors-equal",
         pr.frame_a.anchor == pr.frame_b.anchor && pr.frame_a.anchor == pr.lambda0,
         std::abs(pr.frame_a.anchor - pr.frame_b.anchor), ""});

    const double mid = 0.5 * (pr.a + pr.b);
    add(frame_normalization_check("frame-a-normalization", pr.frame_a, mid));
    add(frame_normalization_check("frame-b-normalization", pr.frame_b, mid));

    // Principal ratio u/v → 0.
    for (const auto* fr : {&pr.frame_a, &pr.frame_b}) {
        double first = -1.0, last = 0.0;
        bool ok = true;
        for (int k = 4; k <= 36; k += 2) {
            const double x = fr->location + (mid - fr->location) * std::pow(0.5, k);
            const double r = std::abs(fr->u(x)) / (std::abs(fr->v(x)) + 1e-300);
            if (first < 0) first = r;
            last = r;
        }
        ok = last < 0.2 * (first + 1e-300) || last < 1e-6;
        add({fr->at_left ? "principal-ratio-a" : "principal-ratio-b", ok, last, ""});
    }

    // Integrability of 1/(p u²) (must diverge) and 1/(p v²) (must converge).
    for (const auto* fr : {&pr.frame_a, &pr.frame_b}) {
        const std::string side = fr->at_left ? "a" : "b";
        auto iu = [fr, &pr](double x) {
            const double ux = fr->u(x);
            return 1.0 / (pr.coeff.p(x) * ux * ux);
        };
        auto iv = [fr, &pr](double x) {
            const double vx = fr->v(x);
            return 1.0 / (pr.coeff.p(x) * vx * vx);
        };
        const auto tu = dyadic_tail(iu, mid, fr->location);
        const auto tv = dyadic_tail(iv, mid, fr->location);
        add({"principal-nonintegrable-" + side, tu.verdict == TailVerdict::divergent, tu.growth,
             tu.verdict == TailVerdict::convergent ? "1/(p u²) integrable: u is not principal"
                                                   : ""});
        add({"nonprincipal-integrable-" + side, tv.verdict == TailVerdict::convergent,
             tv.last_ratio,
             tv.verdict == TailVerdict::divergent ? "1/(p v²) diverges: v is not non-principal"
                                                  : ""});
    }

    // Frames must solve (ℓ−λ₀)y = 0.
    add(ode_residual_check("frame-a-ode-residual", pr.coeff, pr.lambda0, pr.frame_a.u,
                           pr.frame_a.pu, pr.a + 0.05 * len, mid));
    add(ode_residual_check("frame-b-ode-residual", pr.coeff, pr.lambda0, pr.frame_b.u,
                           pr.frame_b.pu, mid, pr.b - 0.05 * len));

    // Endpoint classification: limit-point is a hard failure.
    for (const auto* fr : {&pr.frame_a, &pr.frame_b}) {
        const std::string side = fr->at_left ? "a" : "b";
        EndpointClass cls;
        std::string detail;
        try {
            cls = classify_endpoint(pr.coeff, mid, fr->location, pr.lambda0);
            detail = to_string(cls);
        } catch (const SlxError& e) {
            cls = EndpointClass::limit_point;
            detail = e.what();
        }
        add({"limit-circle-" + side, cls != EndpointClass::limit_point,
             cls == EndpointClass::limit_point ? 1.0 : 0.0, detail});
    }

    if (!rep.all_pass && throw_on_failure) {
        std::ostringstream os;
        os << "problem validation failed:";
        for (const auto& c : rep.checks)
            if (!c.pass) os << " [" << c.name << (c.detail.empty() ? "" : ": " + c.detail) << "]";
        throw InvalidProblem(os.str());
    }
    return rep;
}

}  // namespace slx
