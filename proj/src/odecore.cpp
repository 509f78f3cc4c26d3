#include "slx/odecore.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include "slx/quadrature.hpp"
#include "slx/rk.hpp"

namespace slx {

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0 && rel_tol <= 1e-3) || !(abs_tol > 0.0 && abs_tol <= 1e-3))
        throw InvalidProblem("integrator tolerances must lie in (0, 1e-3]");
    if (delta_a() <= 0.0 || delta_a() >= 0.5 || delta_b() <= 0.0 || delta_b() >= 0.5)
        throw InvalidProblem("singular-endpoint offsets must be strictly inside the interval");
    if (max_steps < 1000) throw InvalidProblem("max_steps too small");
    if (richardson_levels < 1 || richardson_levels > 6)
        throw InvalidProblem("richardson_levels must be in [1, 6]");
}

cdouble bracket(const CoefficientTriple& coeff, const RealFn& f, const RealFn& g, double x) {
    // Richardson-extrapolated central differences for f' and g'.
    auto deriv = [x](const RealFn& fn) {
        const double h = std::max(1e-6, 1e-6 * std::abs(x));
        const double d1 = (fn(x + h) - fn(x - h)) / (2.0 * h);
        const double d2 = (fn(x + h / 2) - fn(x - h / 2)) / h;
        const double d = (4.0 * d2 - d1) / 3.0;
        if (!std::isfinite(d)) throw DerivativeUnavailable("finite difference not finite");
        return d;
    };
    const double fp = deriv(f), gp = deriv(g);
    return coeff.p(x) * (f(x) * gp - fp * g(x));
}

namespace {

using State4 = DormandPrince<4>::State;

struct FrameAtCut {
    // Transfer (f0, f1) -> (f, pf') at the cut: columns are frame values.
    double u, pu, v, pv;

    std::pair<cdouble, cdouble> to_state(cdouble f0, cdouble f1) const {
        return {f0 * u + f1 * v, f0 * pu + f1 * pv};
    }
    // Brackets at the cut: [f, v] = f·pv − pf·v,  [f, u] = f·pu − pf·u.
    cdouble bracket_v(cdouble y, cdouble z) const { return y * pv - z * v; }
    cdouble bracket_u(cdouble y, cdouble z) const { return y * pu - z * u; }
};

FrameAtCut frame_at(const EndpointFrame& fr, double x) {
    return {fr.u(x), fr.pu(x), fr.v(x), fr.pv(x)};
}

// Solve [f,v](x)=beta0, [f,u](x)=beta1 for (f, pf') at the cut.
std::pair<cdouble, cdouble> state_from_brackets(const FrameAtCut& fc, cdouble beta0,
                                                cdouble beta1) {
    // [[pv, -v],[pu, -u]] (f, pf)^T = (beta0, beta1)^T; det = -(u·pv - pu·v) = -[u,v].
    const double det = -(fc.u * fc.pv - fc.pu * fc.v);
    const cdouble f = (beta0 * (-fc.u) - beta1 * (-fc.v)) / det;
    const cdouble pf = (fc.pv * beta1 - fc.pu * beta0) / det;
    return {f, pf};
}

}  // namespace

FundamentalSolver::FundamentalSolver(const SLProblem& problem, IntegratorConfig config)
    : problem_(problem), config_(config) {
    config_.validate();
    singular_a_ = problem_.frame_a.classification != EndpointClass::regular;
    singular_b_ = problem_.frame_b.classification != EndpointClass::regular;
}

double FundamentalSolver::cut_a(double delta_frac) const {
    return singular_a_ ? problem_.a + delta_frac * problem_.length() : problem_.a;
}

double FundamentalSolver::cut_b(double delta_frac) const {
    return singular_b_ ? problem_.b - delta_frac * problem_.length() : problem_.b;
}

FundamentalSolver::FrameMoments FundamentalSolver::moments_a(double cut) const {
    for (const auto& [c, m] : mom_cache_a_)
        if (c == cut) return m;
    FrameMoments m;
    if (cut > problem_.a) {
        const auto& fr = problem_.frame_a;
        const auto& w = problem_.coeff.w;
        m.uu = integrate_endpoint_safe([&](double x) { return w(x) * fr.u(x) * fr.u(x); },
                                       problem_.a, cut);
        m.uv = integrate_endpoint_safe([&](double x) { return w(x) * fr.u(x) * fr.v(x); },
                                       problem_.a, cut);
        m.vv = integrate_endpoint_safe([&](double x) { return w(x) * fr.v(x) * fr.v(x); },
                                       problem_.a, cut);
    }
    mom_cache_a_.emplace_back(cut, m);
    return m;
}

FundamentalSolver::FrameMoments FundamentalSolver::moments_b(double cut) const {
    for (const auto& [c, m] : mom_cache_b_)
        if (c == cut) return m;
    FrameMoments m;
    if (cut < problem_.b) {
        const auto& fr = problem_.frame_b;
        const auto& w = problem_.coeff.w;
        m.uu = integrate_endpoint_safe([&](double x) { return w(x) * fr.u(x) * fr.u(x); }, cut,
                                       problem_.b);
        m.uv = integrate_endpoint_safe([&](double x) { return w(x) * fr.u(x) * fr.v(x); }, cut,
                                       problem_.b);
        m.vv = integrate_endpoint_safe([&](double x) { return w(x) * fr.v(x) * fr.v(x); }, cut,
                                       problem_.b);
    }
    mom_cache_b_.emplace_back(cut, m);
    return m;
}

BoundaryData FundamentalSolver::boundary_data_at(cdouble lambda, double fa, double fb) const {
    const double xa = cut_a(fa), xb = cut_b(fb);
    const cdouble dl = lambda - problem_.lambda0;

    // Initial data at the a-cut from the frame expansion with first-order
    // bracket-evolution corrections: [f,v](x) = f0(a) + (λ−λ₀)∫ w f v, etc.
    const auto fca = frame_at(problem_.frame_a, xa);
    const auto ma = moments_a(xa);
    // u1 ≈ u_a near a; u2 ≈ v_a near a.
    const cdouble b0_u1 = 1.0 + dl * ma.uv, b1_u1 = dl * ma.uu;
    const cdouble b0_u2 = dl * ma.vv, b1_u2 = -1.0 + dl * ma.uv;
    auto [y1, z1] = state_from_brackets(fca, b0_u1, b1_u1);
    auto [y2, z2] = state_from_brackets(fca, b0_u2, b1_u2);

    DormandPrince<4> rk;
    rk.rel_tol = config_.rel_tol;
    rk.abs_tol = config_.abs_tol;
    rk.max_steps = config_.max_steps;
    const auto& coeff = problem_.coeff;
    auto rhs = [&coeff, lambda](double x, const State4& y, State4& dy) {
        const double p = coeff.p(x), q = coeff.q(x), w = coeff.w(x);
        dy[0] = y[1] / p;
        dy[1] = -(q + lambda * w) * y[0];
        dy[2] = y[3] / p;
        dy[3] = -(q + lambda * w) * y[2];
    };

    State4 st{y1, z1, y2, z2};
    const cdouble w_start = st[0] * st[3] - st[1] * st[2];
    double drift = 0.0;
    auto observer = [&](double, const State4& y) {
        const cdouble w = y[0] * y[3] - y[1] * y[2];
        drift = std::max(drift, std::abs(w - w_start));
    };
    rk.integrate(rhs, st, xa, xb, observer);
    const double wscale = std::max(1.0, std::abs(w_start));
    if (drift > 1e-6 * wscale)
        throw WronskianDrift("fundamental-system Wronskian drifted by " + std::to_string(drift));

    // Quasi-derivatives at b via brackets at the cut plus tail corrections,
    // iterated twice (corrections are first order in the tail moments).
    const auto fcb = frame_at(problem_.frame_b, xb);
    const auto mb = moments_b(xb);
    BoundaryData bd;
    bd.lambda = lambda;
    bd.wronskian_drift = drift;

    auto extract = [&](cdouble y, cdouble z, cdouble& f0, cdouble& f1) {
        const cdouble Av = fcb.bracket_v(y, z);  // [f, v_b](xb)
        const cdouble Au = fcb.bracket_u(y, z);  // [f, u_b](xb)
        f0 = Av;
        f1 = -Au;
        for (int it = 0; it < 3; ++it) {
            const cdouble tail_v = dl * (f0 * mb.uv + f1 * mb.vv);
            const cdouble tail_u = dl * (f0 * mb.uu + f1 * mb.uv);
            f0 = Av + tail_v;
            f1 = -(Au + tail_u);
        }
    };
    extract(st[0], st[1], bd.u10, bd.u11);
    extract(st[2], st[3], bd.u20, bd.u21);

    // Renormalize u2 so that the quasi-derivative Wronskian at b is exactly 1.
    const cdouble W = bd.wronskian_q();
    bd.wronskian_residual = std::abs(W - 1.0);
    if (std::abs(W) < 1e-8)
        throw WronskianDrift("quasi-derivative Wronskian nearly singular at b");
    bd.u20 /= W;
    bd.u21 /= W;
    return bd;
}

BoundaryData FundamentalSolver::boundary_data(cdouble lambda) const {
    if (!singular_a_ && !singular_b_) return boundary_data_at(lambda, 0.0, 0.0);

    const int levels = std::max(1, config_.richardson_levels);
    std::vector<BoundaryData> bds;
    double fa = config_.delta_a_frac < 0 ? 1e-6 : config_.delta_a_frac;
    double fb = config_.delta_b_frac < 0 ? 1e-6 : config_.delta_b_frac;
    for (int l = 0; l < levels; ++l) {
        bds.push_back(boundary_data_at(lambda, fa, fb));
        fa *= 0.5;
        fb *= 0.5;
    }
    if (levels == 1) return bds[0];

    // Measured-order Richardson on each component; the order in δ is a
    // heuristic, so the final correction is surfaced as the error estimate.
    BoundaryData out = bds.back();
    auto extrapolate = [&](auto pick) {
        cdouble v0 = pick(bds[bds.size() - 3]);
        cdouble v1 = pick(bds[bds.size() - 2]);
        cdouble v2 = pick(bds[bds.size() - 1]);
        const double d1 = std::abs(v1 - v0), d2 = std::abs(v2 - v1);
        const double scale = std::abs(v2) + 1.0;
        if (d2 < 1e-13 * scale) {
            out.delta_error_estimate = std::max(out.delta_error_estimate, d2);
            return v2;
        }
        double rate = (d1 > 0 && d2 > 0) ? d1 / d2 : 2.0;
        rate = std::clamp(rate, 1.2, 64.0);
        const cdouble corr = (v2 - v1) / (rate - 1.0);
        out.delta_error_estimate =
            std::max(out.delta_error_estimate, std::abs(corr) / (rate - 0.99));
        return v2 + corr;
    };
    if (bds.size() >= 3) {
        out.u10 = extrapolate([](const BoundaryData& b) { return b.u10; });
        out.u11 = extrapolate([](const BoundaryData& b) { return b.u11; });
        out.u20 = extrapolate([](const BoundaryData& b) { return b.u20; });
        out.u21 = extrapolate([](const BoundaryData& b) { return b.u21; });
        const cdouble W = out.wronskian_q();
        out.wronskian_residual = std::max(out.wronskian_residual, std::abs(W - 1.0));
        out.u20 /= W;
        out.u21 /= W;
    } else {
        out.delta_error_estimate = std::abs(bds[1].u11 - bds[0].u11);
    }
    return out;
}

FundamentalSolver::GreenReport FundamentalSolver::green_identity(cdouble lambda) const {
    const double fa = config_.delta_a_frac < 0 ? 1e-6 : config_.delta_a_frac;
    const double fb = config_.delta_b_frac < 0 ? 1e-6 : config_.delta_b_frac;
    const double xa = cut_a(fa), xb = cut_b(fb);
    const cdouble dl = lambda - problem_.lambda0;
    const auto& coeff = problem_.coeff;

    // Backward continuation of v_b: a genuine λ₀-solution on the whole interval.
    DormandPrince<2> rk2;
    rk2.rel_tol = config_.rel_tol;
    rk2.abs_tol = config_.abs_tol;
    rk2.max_steps = config_.max_steps;
    std::vector<double> xs;
    std::vector<double> vy, vz;
    {
        DormandPrince<2>::State s{problem_.frame_b.v(xb), problem_.frame_b.pv(xb)};
        const double l0 = problem_.lambda0;
        auto rhs = [&coeff, l0](double x, const DormandPrince<2>::State& y,
                                DormandPrince<2>::State& dy) {
            dy[0] = y[1] / coeff.p(x);
            dy[1] = -(coeff.q(x) + l0 * coeff.w(x)) * y[0];
        };
        xs.push_back(xb);
        vy.push_back(std::real(s[0]));
        vz.push_back(std::real(s[1]));
        rk2.integrate(rhs, s, xb, xa, [&](double x, const DormandPrince<2>::State& y) {
            xs.push_back(x);
            vy.push_back(std::real(y[0]));
            vz.push_back(std::real(y[1]));
        });
    }
    // xs descends from xb to xa; reverse for interpolation.
    std::reverse(xs.begin(), xs.end());
    std::reverse(vy.begin(), vy.end());
    std::reverse(vz.begin(), vz.end());
    auto vtilde = [&](double x) -> std::pair<double, double> {
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        size_t i = std::min(xs.size() - 2, std::max<size_t>(1, it - xs.begin()) - 1);
        const double x0 = xs[i], x1 = xs[i + 1], h = x1 - x0;
        const double t = std::clamp((x - x0) / h, 0.0, 1.0);
        const double y0 = vy[i], y1 = vy[i + 1];
        const double d0 = vz[i] / coeff.p(x0), d1 = vz[i + 1] / coeff.p(x1);
        const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
        const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
        const double val = h00 * y0 + h * h10 * d0 + h01 * y1 + h * h11 * d1;
        const double pz = vz[i] + (vz[i + 1] - vz[i]) * t;  // linear in the momentum
        return {val, pz};
    };
    const auto [va_val, va_mom] = vtilde(xa);

    // Frame coefficients of ṽ at a (exact constants for a λ₀-solution).
    const auto fca = frame_at(problem_.frame_a, xa);
    const cdouble alpha = fca.bracket_v(va_val, va_mom);   // [ṽ, v_a]
    const cdouble beta = -fca.bracket_u(va_val, va_mom);   // −[ṽ, u_a]

    // Forward pass: u2 with the cross integral ∫ w u2 ṽ accumulated.
    // u2 ≈ v_a near a: initial data corrected as in boundary_data_at.
    const auto ma = moments_a(xa);
    const cdouble beta0 = dl * ma.vv, beta1 = -1.0 + dl * ma.uv;
    auto [y2, z2] = state_from_brackets(fca, beta0, beta1);

    DormandPrince<3> rk3;
    rk3.rel_tol = config_.rel_tol;
    rk3.abs_tol = config_.abs_tol;
    rk3.max_steps = config_.max_steps;
    DormandPrince<3>::State st{y2, z2, 0.0};
    auto rhs3 = [&](double x, const DormandPrince<3>::State& y, DormandPrince<3>::State& dy) {
        const double p = coeff.p(x), q = coeff.q(x), w = coeff.w(x);
        dy[0] = y[1] / p;
        dy[1] = -(q + lambda * w) * y[0];
        dy[2] = w * y[0] * vtilde(x).first;
    };
    rk3.integrate(rhs3, st, xa, xb);

    // Brackets of u2 against ṽ at both cuts, with frame tail corrections.
    const auto fcb = frame_at(problem_.frame_b, xb);
    const auto mb = moments_b(xb);
    cdouble f0 = fcb.bracket_v(st[0], st[1]), f1 = -fcb.bracket_u(st[0], st[1]);
    for (int it = 0; it < 3; ++it) {
        const cdouble nf0 = fcb.bracket_v(st[0], st[1]) + dl * (f0 * mb.uv + f1 * mb.vv);
        const cdouble nf1 = -(fcb.bracket_u(st[0], st[1]) + dl * (f0 * mb.uu + f1 * mb.uv));
        f0 = nf0;
        f1 = nf1;
    }
    const cdouble bracket_b = f0;  // ṽ = v_b near b
    // [u2, ṽ](a) = α[u2,u_a](a) + β[u2,v_a](a) = −α·u2[1](a) + β·u2[0](a) = −α.
    const cdouble bracket_a = -alpha;

    // Tail pieces of the cross integral.
    const cdouble tail_a = std::real(alpha) * ma.uv + std::real(beta) * ma.vv;
    const cdouble tail_b = f0 * mb.uv + f1 * mb.vv;
    const cdouble integral = st[2] + tail_a + tail_b;

    const cdouble lhs = dl * integral;
    const cdouble rhs_val = bracket_b - bracket_a;
    return {std::abs(lhs - rhs_val), integral, bracket_b, bracket_a};
}

void FundamentalSolver::dump_trajectory(cdouble lambda, std::ostream& os) const {
    const double fa = config_.delta_a_frac < 0 ? 1e-6 : config_.delta_a_frac;
    const double fb = config_.delta_b_frac < 0 ? 1e-6 : config_.delta_b_frac;
    const double xa = cut_a(fa), xb = cut_b(fb);
    const cdouble dl = lambda - problem_.lambda0;
    const auto fca = frame_at(problem_.frame_a, xa);
    const auto ma = moments_a(xa);
    auto [y1, z1] = state_from_brackets(fca, 1.0 + dl * ma.uv, dl * ma.uu);
    auto [y2, z2] = state_from_brackets(fca, dl * ma.vv, -1.0 + dl * ma.uv);

    DormandPrince<4> rk;
    rk.rel_tol = config_.rel_tol;
    rk.abs_tol = config_.abs_tol;
    rk.max_steps = config_.max_steps;
    const auto& coeff = problem_.coeff;
    auto rhs = [&coeff, lambda](double x, const State4& y, State4& dy) {
        const double p = coeff.p(x), q = coeff.q(x), w = coeff.w(x);
        dy[0] = y[1] / p;
        dy[1] = -(q + lambda * w) * y[0];
        dy[2] = y[3] / p;
        dy[3] = -(q + lambda * w) * y[2];
    };
    State4 st{y1, z1, y2, z2};
    const cdouble w0 = st[0] * st[3] - st[1] * st[2];
    os << "x,re_u1,im_u1,re_pu1,im_pu1,re_u2,im_u2,re_pu2,im_pu2,wronskian_residual\n";
    auto row = [&](double x, const State4& y) {
        const cdouble w = y[0] * y[3] - y[1] * y[2];
        os << x << ',' << std::real(y[0]) << ',' << std::imag(y[0]) << ',' << std::real(y[1])
           << ',' << std::imag(y[1]) << ',' << std::real(y[2]) << ',' << std::imag(y[2]) << ','
           << std::real(y[3]) << ',' << std::imag(y[3]) << ',' << std::abs(w - w0) << '\n';
    };
    row(xa, st);
    rk.integrate(rhs, st, xa, xb, row);
}

BoundaryData fundamental_at_b(const SLProblem& problem, cdouble lambda,
                              const IntegratorConfig& config) {
    return FundamentalSolver(problem, config).boundary_data(lambda);
}

double green_identity_residual(const SLProblem& problem, cdouble lambda,
                               const IntegratorConfig& config) {
    return FundamentalSolver(problem, config).green_identity(lambda).residual;
}

}  // namespace slx
