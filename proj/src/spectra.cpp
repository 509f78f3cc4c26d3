#include "slx/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "slx/parallel.hpp"
#include "slx/quadrature.hpp"

namespace slx {

void CoupledBC::validate() const {
    if (!(alpha > -pi - 1e-12 && alpha <= pi + 1e-12))
        throw InvalidProblem("coupled BC: alpha must lie in (-pi, pi]");
    const double imag_norm = std::abs(std::imag(R.a11)) + std::abs(std::imag(R.a12)) +
                             std::abs(std::imag(R.a21)) + std::abs(std::imag(R.a22));
    if (imag_norm > 1e-12 * (R.max_abs() + 1.0))
        throw InvalidProblem("coupled BC: R must be real");
    if (std::abs(R.det() - 1.0) > 1e-9 * (R.max_abs() * R.max_abs() + 1.0))
        throw InvalidProblem("coupled BC: det R must equal 1");
}

BoundaryParameter BoundaryParameter::matrix(const Mat2& theta) {
    if (!theta.is_hermitian(1e-9 * (theta.max_abs() + 1.0)))
        throw InadmissiblePair("boundary parameter matrix must be Hermitian");
    BoundaryParameter p;
    p.value_ = theta;
    return p;
}

BoundaryParameter BoundaryParameter::relation(SelfAdjointRelation rel) {
    if (rel.mul_dim == 0) return matrix(rel.as_matrix());
    BoundaryParameter p;
    p.value_ = std::move(rel);
    return p;
}

BoundaryParameter BoundaryParameter::relation(const Mat2& a0, const Mat2& b0) {
    return relation(SelfAdjointRelation::from_pair(a0, b0));
}

BoundaryParameter BoundaryParameter::coupled(const CoupledBC& bc) {
    return coupled_to_relation(bc);
}

BoundaryParameter BoundaryParameter::from_vartheta(const Mat2& vartheta) {
    // θ = −ϑ⁻¹, realized as the pair (ϑ, −I); a relation when ϑ is singular.
    return relation(vartheta, -Mat2::identity());
}

std::string BoundaryParameter::describe() const {
    std::ostringstream os;
    if (is_matrix()) {
        const auto& t = theta();
        os << "matrix[" << std::real(t.a11) << "," << t.a12 << ";" << t.a21 << ","
           << std::real(t.a22) << "]";
    } else {
        os << "relation(mul_dim=" << rel().mul_dim << ")";
    }
    return os.str();
}

BoundaryParameter coupled_to_relation(const CoupledBC& bc) {
    bc.validate();
    const cdouble ea = std::exp(cdouble(0.0, bc.alpha));
    const double r11 = std::real(bc.R.a11), r12 = std::real(bc.R.a12);
    const double r21 = std::real(bc.R.a21), r22 = std::real(bc.R.a22);
    // Boundary rows C0·Γ₀ + C1·Γ₁ = 0 of (y[0](b), y[1](b)) = e^{iα}R(y[0](a), y[1](a)).
    const Mat2 c0{ea * r11, -1.0, ea * r21, 0.0};
    const Mat2 c1{ea * r12, 0.0, ea * r22, 1.0};
    // A*Γ₁ = B*Γ₀ with A* = C1, B* = −C0.
    return BoundaryParameter::relation(c1.adjoint(), -(c0.adjoint()));
}

// ---------------------------------------------------------------------------

SpectralEngine::SpectralEngine(const SLProblem& problem, IntegratorConfig cfg, ScanOptions opts)
    : solver_(problem, cfg), opts_(opts) {
    // One evaluation warms the frame-moment caches (all Richardson δ-levels),
    // after which boundary_data() has no mutable state and is thread-safe.
    (void)solver_.boundary_data(problem.lambda0 + 0.318309886);
}

const BoundaryData& SpectralEngine::data(cdouble lambda) const {
    const std::pair<double, double> key{std::real(lambda), std::imag(lambda)};
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    BoundaryData bd = solver_.boundary_data(lambda);
    std::lock_guard<std::mutex> lock(cache_mutex_);
    return cache_.emplace(key, bd).first->second;
}

bool SpectralEngine::in_rho_L0(const BoundaryData& bd) const {
    return std::abs(bd.u20) > pole_guard_scale(bd, opts_.pole_guard);
}

bool SpectralEngine::in_rho_Linf(const BoundaryData& bd) const {
    return std::abs(bd.u11) > pole_guard_scale(bd, opts_.pole_guard);
}

double SpectralEngine::liouville_length() const {
    if (!liouville_) {
        const auto& pr = solver_.problem();
        const auto& c = pr.coeff;
        double len = integrate_endpoint_safe(
            [&c](double x) { return std::sqrt(c.w(x) / c.p(x)); }, pr.a, pr.b, 1e-8, 48);
        liouville_ = std::clamp(len, 1e-2, 1e4);
    }
    return *liouville_;
}

double SpectralEngine::refine_root(const std::function<double(double)>& fn, double lo,
                                   double hi) const {
    // Illinois-type regula falsi with bisection safeguarding.
    double a = lo, b = hi, fa = fn(a), fb = fn(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    double side = 0;
    for (int it = 0; it < 90; ++it) {
        const double width_tol = 1e-13 * (1.0 + std::abs(a) + std::abs(b));
        if (std::abs(b - a) < width_tol) break;
        double c = (fa * b - fb * a) / (fa - fb);
        if (!(c > std::min(a, b) && c < std::max(a, b))) c = 0.5 * (a + b);
        const double fc = fn(c);
        if (fc == 0.0) return c;
        if ((fc > 0) == (fb > 0)) {
            b = c;
            fb = fc;
            if (side == -1) fa *= 0.5;
            side = -1;
        } else {
            a = c;
            fa = fc;
            if (side == 1) fb *= 0.5;
            side = 1;
        }
    }
    return std::abs(fa) < std::abs(fb) ? a : b;
}

namespace {

/// Golden-section minimizer of |fn| on [lo, hi].
double golden_min(const std::function<double(double)>& fn, double lo, double hi, int iters = 60) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = std::abs(fn(x1)), f2 = std::abs(fn(x2));
    for (int i = 0; i < iters && (b - a) > 1e-14 * (1.0 + std::abs(a)); ++i) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = std::abs(fn(x1));
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = std::abs(fn(x2));
        }
    }
    return f1 < f2 ? x1 : x2;
}

}  // namespace

const std::vector<double>& SpectralEngine::anchors_L0(double lo, double hi) const {
    if (l0_cache_ && l0_cache_->first.first <= lo && l0_cache_->first.second >= hi)
        return l0_cache_->second;
    const double rlo = l0_cache_ ? std::min(lo, l0_cache_->first.first) : lo;
    const double rhi = l0_cache_ ? std::max(hi, l0_cache_->first.second) : hi;
    auto fn = [this](double l) { return std::real(data(l).u20); };
    auto roots = scan_entire(fn, rlo, rhi, false, {});
    l0_cache_ = {{rlo, rhi}, std::move(roots)};
    return l0_cache_->second;
}

const std::vector<double>& SpectralEngine::anchors_Linf(double lo, double hi) const {
    if (linf_cache_ && linf_cache_->first.first <= lo && linf_cache_->first.second >= hi)
        return linf_cache_->second;
    const double rlo = linf_cache_ ? std::min(lo, linf_cache_->first.first) : lo;
    const double rhi = linf_cache_ ? std::max(hi, linf_cache_->first.second) : hi;
    auto fn = [this](double l) { return std::real(data(l).u11); };
    auto roots = scan_entire(fn, rlo, rhi, false, {});
    linf_cache_ = {{rlo, rhi}, std::move(roots)};
    return linf_cache_->second;
}

std::vector<double> SpectralEngine::grid_points(double lo, double hi) const {
    // Uniform in s = sign(λ)√|λ|, with density set by the Liouville length
    // (zeros of the entire functions are ~π/L apart in s).
    const double L = liouville_length();
    auto s_of = [](double l) { return l >= 0 ? std::sqrt(l) : -std::sqrt(-l); };
    const double s_lo = s_of(lo), s_hi = s_of(hi);
    const double ds = (pi / L) / std::max(8, opts_.cells_per_gap / 2);
    const int n = std::max(64, static_cast<int>(std::ceil((s_hi - s_lo) / ds)) + 1);
    std::vector<double> pts;
    pts.reserve(n + 1);
    for (int i = 0; i <= n; ++i) {
        const double s = s_lo + (s_hi - s_lo) * i / n;
        pts.push_back(s >= 0 ? s * s : -s * s);
    }
    pts.front() = lo;
    pts.back() = hi;
    return pts;
}

std::vector<double> SpectralEngine::scan_entire(
    const std::function<double(double)>& fn, double lo, double hi, bool find_dips,
    const std::function<double(double)>& dip_certify) const {
    const auto pts = grid_points(lo, hi);
    std::vector<double> vals(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) { vals[i] = fn(pts[i]); });

    std::vector<double> roots;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (vals[i] == 0.0) {
            roots.push_back(pts[i]);
            continue;
        }
        if (vals[i] * vals[i + 1] < 0.0) roots.push_back(refine_root(fn, pts[i], pts[i + 1]));
    }
    if (vals.back() == 0.0) roots.push_back(pts.back());

    if (find_dips) {
        for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
            if (vals[i] == 0.0) continue;
            const bool local_min = std::abs(vals[i]) < std::abs(vals[i - 1]) &&
                                   std::abs(vals[i]) <= std::abs(vals[i + 1]);
            const bool same_sign = vals[i - 1] * vals[i] > 0.0 && vals[i] * vals[i + 1] > 0.0;
            if (!local_min || !same_sign) continue;
            const double neighborhood =
                std::max({std::abs(vals[i - 1]), std::abs(vals[i + 1]), 1e-300});
            if (std::abs(vals[i]) > 0.5 * neighborhood) continue;
            const double cand = golden_min(fn, pts[i - 1], pts[i + 1]);
            const double fc = std::abs(fn(cand));
            if (fc > 1e-7 * neighborhood) continue;  // not a genuine tangency
            if (dip_certify && dip_certify(cand) < 1.0) continue;
            roots.push_back(cand);
        }
    }

    std::sort(roots.begin(), roots.end());
    std::vector<double> unique;
    for (double r : roots) {
        if (unique.empty() || r - unique.back() > 2.0 * opts_.tol_root * (1.0 + std::abs(r)))
            unique.push_back(r);
    }
    return unique;
}

std::vector<EigenvalueRecord> SpectralEngine::eigenvalues_L0(double lo, double hi) const {
    std::vector<EigenvalueRecord> out;
    for (double r : anchors_L0(lo, hi)) {
        if (r < lo || r > hi) continue;
        out.push_back({r, 1, false, std::abs(data(r).u20), "Gamma0"});
    }
    return out;
}

std::vector<EigenvalueRecord> SpectralEngine::eigenvalues_Linf(double lo, double hi) const {
    std::vector<EigenvalueRecord> out;
    for (double r : anchors_Linf(lo, hi)) {
        if (r < lo || r > hi) continue;
        out.push_back({r, 1, false, std::abs(data(r).u11), "Gamma0p"});
    }
    return out;
}

namespace {

Mat2 n_matrix(const BoundaryData& bd) { return {-bd.u10, 1.0, 1.0, -bd.u21}; }
Mat2 g_matrix(const BoundaryData& bd) { return {bd.u21, 1.0, 1.0, bd.u10}; }

cdouble quad_form(const Mat2& m, const std::array<cdouble, 2>& x,
                  const std::array<cdouble, 2>& y) {
    // x* M y
    const auto my = m.apply(y);
    return std::conj(x[0]) * my[0] + std::conj(x[1]) * my[1];
}

}  // namespace

struct SpectralEngine::ParamFunctions {
    // Entire real scan function whose zeros contain σ(L(θ)) ∩ ρ(L₀) plus
    // possible artifacts on σ(L₀); disentangled pointwise afterwards.
    std::function<double(double)> scan;
    // Γ₀-side kernel dimension (valid on ρ(L₀)) and residual.
    std::function<int(const BoundaryData&)> mult0;
    std::function<double(const BoundaryData&)> residual0;
    // Γ₀'-side kernel dimension (valid on ρ(L∞)) and residual.
    std::function<int(const BoundaryData&)> mult_inf;
    std::function<double(const BoundaryData&)> residual_inf;
};

namespace {

double real_checked(cdouble v) {
    // Scan functions are real on the real axis up to integration noise.
    return std::real(v);
}

}  // namespace

ScanResult SpectralEngine::eigenvalues(const BoundaryParameter& param, double lo,
                                       double hi) const {
    if (param.is_Linf()) return {eigenvalues_Linf(lo, hi), {}};
    if (param.is_L0()) return {eigenvalues_L0(lo, hi), {}};

    ParamFunctions pf;
    const double nt = opts_.nullity_thresh;
    if (param.is_matrix()) {
        const Mat2 theta = param.theta();
        pf.scan = [this, theta](double l) {
            const auto& bd = data(l);
            return real_checked((theta * bd.u20 - n_matrix(bd)).det());
        };
        pf.mult0 = [theta, nt](const BoundaryData& bd) {
            const Mat2 m0 = n_matrix(bd) * (cdouble(1.0) / bd.u20);
            return (theta - m0).nullity(nt);
        };
        pf.residual0 = [theta](const BoundaryData& bd) {
            const Mat2 m0 = n_matrix(bd) * (cdouble(1.0) / bd.u20);
            return std::abs((theta - m0).det());
        };
        pf.mult_inf = [theta, nt](const BoundaryData& bd) {
            // ϑ = −θ⁻¹ as the pair (θ, −I): kernel of −I − M∞θ.
            const Mat2 minf = g_matrix(bd) * (cdouble(1.0) / bd.u11);
            return (Mat2::identity() + minf * theta).nullity(nt);
        };
        pf.residual_inf = [theta](const BoundaryData& bd) {
            const Mat2 minf = g_matrix(bd) * (cdouble(1.0) / bd.u11);
            return std::abs((Mat2::identity() + minf * theta).det());
        };
    } else {
        const SelfAdjointRelation rel = param.rel();
        const auto oo = rel.op_direction;
        const double top = rel.theta_op;
        pf.scan = [this, oo, top](double l) {
            const auto& bd = data(l);
            return real_checked(top * bd.u20 - quad_form(n_matrix(bd), oo, oo));
        };
        pf.mult0 = [rel, nt](const BoundaryData& bd) {
            const Mat2 m0 = n_matrix(bd) * (cdouble(1.0) / bd.u20);
            return (rel.B - m0 * rel.A).nullity(nt);
        };
        pf.residual0 = [rel](const BoundaryData& bd) {
            const Mat2 m0 = n_matrix(bd) * (cdouble(1.0) / bd.u20);
            return std::abs((rel.B - m0 * rel.A).det());
        };
        pf.mult_inf = [rel, nt](const BoundaryData& bd) {
            // ϑ = (B, −A): kernel of (−A − M∞B).
            const Mat2 minf = g_matrix(bd) * (cdouble(1.0) / bd.u11);
            return (rel.A + minf * rel.B).nullity(nt);
        };
        pf.residual_inf = [rel](const BoundaryData& bd) {
            const Mat2 minf = g_matrix(bd) * (cdouble(1.0) / bd.u11);
            return std::abs((rel.A + minf * rel.B).det());
        };
    }

    auto certify = [&](double l) -> double {
        const auto& bd = data(l);
        if (in_rho_L0(bd)) return pf.mult0(bd);
        if (in_rho_Linf(bd)) return pf.mult_inf(bd);
        return 1.0;  // σ(L₀)∩σ(L∞): reported as uncovered downstream
    };

    const auto roots = scan_entire(pf.scan, lo, hi, true, certify);

    ScanResult result;
    for (double r : roots) {
        const auto& bd = data(r);
        EigenvalueRecord rec;
        rec.lambda = r;
        const bool rho0 = in_rho_L0(bd), rhoInf = in_rho_Linf(bd);
        if (rho0) {
            rec.multiplicity = pf.mult0(bd);
            rec.residual = pf.residual0(bd);
            rec.via = "Gamma0";
        } else if (rhoInf) {
            rec.multiplicity = pf.mult_inf(bd);
            rec.residual = pf.residual_inf(bd);
            rec.via = "Gamma0p";
        } else {
            result.uncovered.push_back({r, std::abs(bd.u10 * bd.u21 - 1.0)});
            continue;
        }
        if (rec.multiplicity == 0) continue;  // artifact zero on σ(L₀)
        rec.degenerate = rec.multiplicity == 2;
        result.records.push_back(rec);
    }
    return result;
}

int SpectralEngine::multiplicity(const BoundaryParameter& param, double lambda) const {
    const auto& bd = data(lambda);
    const bool rho0 = in_rho_L0(bd), rhoInf = in_rho_Linf(bd);
    if (param.is_L0()) return rho0 ? 0 : 1;
    if (param.is_Linf()) return rhoInf ? 0 : 1;

    const double nt = opts_.nullity_thresh;
    if (rho0) {
        const Mat2 m0 = n_matrix(bd) * (cdouble(1.0) / bd.u20);
        if (param.is_matrix()) return (param.theta() - m0).nullity(nt);
        return (param.rel().B - m0 * param.rel().A).nullity(nt);
    }
    if (rhoInf) {
        const Mat2 minf = g_matrix(bd) * (cdouble(1.0) / bd.u11);
        if (param.is_matrix())
            return (Mat2::identity() + minf * param.theta()).nullity(nt);
        return (param.rel().A + minf * param.rel().B).nullity(nt);
    }
    throw UncoveredPoint("multiplicity undetermined on sigma(L0) ∩ sigma(Linf)", lambda,
                         std::abs(bd.u10 * bd.u21 - 1.0));
}

int SpectralEngine::multiplicity_vartheta(const Mat2& vartheta, double lambda) const {
    const auto& bd = data(lambda);
    if (!in_rho_Linf(bd))
        throw AtPole("multiplicity_vartheta: lambda in sigma(Linf)");
    const Mat2 minf = g_matrix(bd) * (cdouble(1.0) / bd.u11);
    return (vartheta - minf).nullity(opts_.nullity_thresh);
}

DegenerateParameter SpectralEngine::degenerate_parameter(double lambda_star) const {
    if (lambda_star < solver_.problem().lower_bound - 1e-12)
        throw OutsideResolventUnion("degenerate parameter requested below the lower bound K");
    const auto& bd = data(lambda_star);
    DegenerateParameter out;
    if (in_rho_L0(bd)) {
        Mat2 m0 = n_matrix(bd) * (cdouble(1.0) / bd.u20);
        out.theta = m0.hermitian_part();  // real symmetric at real λ
    }
    if (in_rho_Linf(bd)) {
        Mat2 minf = g_matrix(bd) * (cdouble(1.0) / bd.u11);
        out.vartheta = minf.hermitian_part();
    }
    if (!out.theta && !out.vartheta) {
        std::ostringstream os;
        os << "lambda* in sigma(L0) ∩ sigma(Linf); |u1[0]u2[1]-1| = "
           << std::abs(bd.u10 * bd.u21 - 1.0);
        throw OutsideResolventUnion(os.str());
    }
    return out;
}

RelationReduction SpectralEngine::relation_to_matrix(const BoundaryParameter& param,
                                                     double lambda) const {
    if (param.is_matrix())
        throw InadmissiblePair("relation_to_matrix expects a relation parameter");
    const auto& rel = param.rel();
    if (rel.mul_dim == 2) return {RelationCase::L0_marker, std::nullopt};

    const auto& bd = data(lambda);
    if (!in_rho_L0(bd)) throw AtPole("relation_to_matrix: lambda in sigma(L0)");
    const Mat2 m0 = n_matrix(bd) * (cdouble(1.0) / bd.u20);

    const auto& oo = rel.op_direction;
    const auto& mm = rel.mul_direction;
    const cdouble m11 = quad_form(m0, oo, oo);
    const cdouble m12 = quad_form(m0, oo, mm);
    const cdouble m21 = quad_form(m0, mm, oo);
    const double scale = m0.max_abs() + std::abs(rel.theta_op) + 1.0;

    if (std::abs(rel.theta_op - m11) > 1e-6 * scale)
        throw NotAnEigenvalue("lambda is not an eigenvalue of the relation parameter");

    const bool decoupled = std::abs(m21) <= 1e-9 * scale;
    // θ̃ in the adapted basis U = [ô m̂]; the coupling row of M₀ is matched so
    // that det(θ̃ − M₀) = 0 with the relation's own boundary eigenvector.
    Mat2 theta_basis =
        decoupled ? Mat2::diag(rel.theta_op, 0.0)
                  : Mat2{rel.theta_op, m12, std::conj(m12), 0.0};
    // θ̃ = U θ̃^U U*.
    const Mat2 u{oo[0], mm[0], oo[1], mm[1]};
    Mat2 theta_tilde = u * theta_basis * u.adjoint();
    theta_tilde = theta_tilde.hermitian_part();
    return {decoupled ? RelationCase::K1K4 : RelationCase::K1K3, theta_tilde};
}

double SpectralEngine::discriminant(const Mat2& R, double lambda) const {
    const auto& bd = data(lambda);
    const double r11 = std::real(R.a11), r12 = std::real(R.a12);
    const double r21 = std::real(R.a21), r22 = std::real(R.a22);
    return r11 * std::real(bd.u21) + r22 * std::real(bd.u10) - r21 * std::real(bd.u20) -
           r12 * std::real(bd.u11);
}

bool SpectralEngine::coupled_eigentest(const CoupledBC& bc, double lambda, double tol) const {
    bc.validate();
    return std::abs(discriminant(bc.R, lambda) - 2.0 * std::cos(bc.alpha)) < tol;
}

}  // namespace slx
