#ifndef SLX_SPECTRA_HPP
#define SLX_SPECTRA_HPP

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "slx/odecore.hpp"
#include "slx/weyl.hpp"

namespace slx {

/// Canonical coupled boundary condition (e^{iα}R with real R, det R = 1).
struct CoupledBC {
    double alpha = 0.0;       // in (−π, π]
    Mat2 R = Mat2::identity();  // real entries

    void validate() const;
};

/// Boundary parameter in the Γ₀ triple: Hermitian matrix θ or self-adjoint
/// relation. Relations with mul_dim = 0 are auto-converted to Matrix.
class BoundaryParameter {
public:
    static BoundaryParameter matrix(const Mat2& theta);
    static BoundaryParameter relation(const Mat2& a0, const Mat2& b0);
    static BoundaryParameter relation(SelfAdjointRelation rel);
    static BoundaryParameter coupled(const CoupledBC& bc);
    /// Γ₀'-side matrix ϑ mapped to the Γ₀ triple: θ = −ϑ⁻¹ (relation pair
    /// (ϑ, −I) when ϑ is singular).
    static BoundaryParameter from_vartheta(const Mat2& vartheta);

    bool is_matrix() const { return std::holds_alternative<Mat2>(value_); }
    const Mat2& theta() const { return std::get<Mat2>(value_); }
    const SelfAdjointRelation& rel() const { return std::get<SelfAdjointRelation>(value_); }
    int mul_dim() const { return is_matrix() ? 0 : rel().mul_dim; }

    bool is_L0() const { return !is_matrix() && rel().mul_dim == 2; }
    bool is_Linf() const { return is_matrix() && theta().max_abs() < 1e-14; }

    std::string describe() const;

private:
    BoundaryParameter() = default;
    std::variant<Mat2, SelfAdjointRelation> value_;
};

struct EigenvalueRecord {
    double lambda = 0.0;
    int multiplicity = 1;
    bool degenerate = false;
    double residual = 0.0;   // |det(θ−M₀)|, |u2[0]|, … depending on the route
    std::string via;         // "Gamma0", "Gamma0p"
};

struct UncoveredRecord {
    double lambda = 0.0;
    double certificate = 0.0;  // |u1[0]u2[1] − 1|
};

struct ScanResult {
    std::vector<EigenvalueRecord> records;
    std::vector<UncoveredRecord> uncovered;
};

struct ScanOptions {
    double tol_root = 1e-10;
    int cells_per_gap = 64;     // scan cells between L₀/L∞ anchor points
    double pole_guard = 1e-10;  // scale factor for |u2[0]|, |u1[1]| pole tests
    double nullity_thresh = 1e-7;
    double margin = 1.0;
};

struct DegenerateParameter {
    std::optional<Mat2> theta;     // = M₀(λ*) when λ* ∈ ρ(L₀)
    std::optional<Mat2> vartheta;  // = M∞(λ*) when λ* ∈ ρ(L∞)
};

enum class RelationCase { L0_marker, K1K3, K1K4 };

struct RelationReduction {
    RelationCase which;
    std::optional<Mat2> theta_tilde;  // absent for the L₀ marker
};

/// Spectral engine: caches boundary data per λ and hosts every eigenvalue
/// operation for one validated problem.
class SpectralEngine {
public:
    explicit SpectralEngine(const SLProblem& problem, IntegratorConfig cfg = {},
                            ScanOptions opts = {});

    const BoundaryData& data(cdouble lambda) const;
    const SLProblem& problem() const { return solver_.problem(); }
    const ScanOptions& options() const { return opts_; }

    bool in_rho_L0(const BoundaryData& bd) const;
    bool in_rho_Linf(const BoundaryData& bd) const;

    std::vector<EigenvalueRecord> eigenvalues_L0(double lo, double hi) const;
    std::vector<EigenvalueRecord> eigenvalues_Linf(double lo, double hi) const;

    ScanResult eigenvalues(const BoundaryParameter& param, double lo, double hi) const;

    /// dim ker(θ − M₀(λ)) resp. the Γ₀' analogue; throws UncoveredPoint on
    /// σ(L₀)∩σ(L∞) for parameters other than L₀/L∞ themselves.
    int multiplicity(const BoundaryParameter& param, double lambda) const;

    /// Multiplicity directly from a Γ₀'-side matrix ϑ at λ ∈ ρ(L∞).
    int multiplicity_vartheta(const Mat2& vartheta, double lambda) const;

    DegenerateParameter degenerate_parameter(double lambda_star) const;

    RelationReduction relation_to_matrix(const BoundaryParameter& param, double lambda) const;

    /// D(R,λ) = r₁₁u₂¹ + r₂₂u₁⁰ − r₂₁u₂⁰ − r₁₂u₁¹ (classical bases f = v_a,
    /// g = −u_a, h = v_b, k = −u_b).
    double discriminant(const Mat2& R, double lambda) const;
    bool coupled_eigentest(const CoupledBC& bc, double lambda, double tol = 1e-7) const;

    /// Anchor sets used for grid construction (computed lazily, cached).
    const std::vector<double>& anchors_L0(double lo, double hi) const;
    const std::vector<double>& anchors_Linf(double lo, double hi) const;

    /// Liouville length ∫√(w/p): sets the spectral-density scale of the grid.
    double liouville_length() const;

private:
    struct ParamFunctions;

    std::vector<double> scan_entire(const std::function<double(double)>& fn, double lo,
                                    double hi, bool find_dips,
                                    const std::function<double(double)>& dip_certify) const;
    std::vector<double> grid_points(double lo, double hi) const;
    double refine_root(const std::function<double(double)>& fn, double lo, double hi) const;

    FundamentalSolver solver_;
    ScanOptions opts_;
    mutable std::map<std::pair<double, double>, BoundaryData> cache_;
    mutable std::mutex cache_mutex_;
    mutable std::optional<std::pair<std::pair<double, double>, std::vector<double>>> l0_cache_;
    mutable std::optional<std::pair<std::pair<double, double>, std::vector<double>>> linf_cache_;
    mutable std::optional<double> liouville_;
};

/// Translates a coupled condition into its Γ₀-triple relation (self-adjoint
/// iff det R = 1, which from_pair enforces).
BoundaryParameter coupled_to_relation(const CoupledBC& bc);

}  // namespace slx

#endif  // SLX_SPECTRA_HPP
