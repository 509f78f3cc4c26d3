#ifndef SLX_ORACLE_HPP
#define SLX_ORACLE_HPP

#include <array>
#include <vector>

#include "slx/spectra.hpp"

namespace slx {

/// Second-order finite-difference model of the problem on [a+δ, b−δ] with
/// frame-transfer boundary closure. The reduced pencil is Hermitian
/// tridiagonal with (at most) two bordered rows from the boundary-condition
/// couple; the mass matrix is diagonal-plus-border and positive definite.
struct DiscreteModel {
    int n_nodes = 0;
    double h = 0.0;
    double x_first = 0.0, x_last = 0.0;

    // Interior pencil (m = n_nodes − 2).
    std::vector<double> adiag, bdiag;  // A and B diagonals
    std::vector<double> aoff;          // A off-diagonal (B has none)

    // Border couple (the boundary-condition dofs), ≤ 2 kept after redundancy
    // elimination.
    int n_border = 0;
    std::array<std::array<cdouble, 2>, 2> couple_first{};  // A[f_first, c_k]
    std::array<std::array<cdouble, 2>, 2> couple_last{};   // A[f_last, c_k]
    Mat2 acc, bcc;  // border blocks (only the kept n_border×n_border part)

    double frame_residual = 0.0;  // ODE residual of the frames at the cuts
    double flux_skew = 0.0;       // anti-Hermitian defect of the closure

    int size() const { return static_cast<int>(adiag.size()) + n_border; }

    /// #eigenvalues of (A, B) strictly below `shift` (Sylvester inertia).
    int count_below(double shift) const;

    struct Extracted {
        double lambda;
        double residual;
    };
    /// Index-targeted bisection + one inverse-iteration residual estimate.
    Extracted eigenvalue_by_index(int index, double lo, double hi) const;
};

/// Builds the discrete model. δ is the absolute truncation offset applied at
/// singular endpoints (regular endpoints keep their exact location). Throws
/// FrameInaccurate when the frame functions fail the ODE residual test at the
/// cut points.
DiscreteModel discretize(const SLProblem& problem, const BoundaryParameter& param, int n_nodes,
                         double delta = 1e-6);

/// k lowest eigenvalues with residual norms.
std::vector<DiscreteModel::Extracted> oracle_spectrum(const DiscreteModel& model, int k,
                                                      double search_lo);

/// All eigenvalues in [lo, hi].
std::vector<DiscreteModel::Extracted> oracle_eigenvalues_in(const DiscreteModel& model,
                                                            double lo, double hi);

}  // namespace slx

#endif  // SLX_ORACLE_HPP
