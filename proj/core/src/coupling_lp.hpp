#pragma once

// Internal machinery shared by the feasibility, transport and capacity
// modules: assembling the coupling polytope LP, mapping LP certificates back
// to measure-level objects, and re-verifying couplings independently of any
// LP bookkeeping.

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cmot/lp.hpp"
#include "cmot/measures.hpp"

namespace cmot::detail {

/// LP over couplings pi(i, j) >= 0 with
///   rows [0, n_src):                row sums equal alpha weights
///   rows [n_src, n_src + n_tgt):    column sums equal beta weights on the
///                                   candidate targets (zero off the support)
///   rows [n_src + n_tgt, ... ):     d barycenter rows per source atom for
///                                   the martingale kinds
/// Variables exist only for admissible cells: ball-excluded cells are not
/// materialized, capacity cells carry their cap as an upper bound.
struct CouplingLp {
    LinearProgram lp;
    std::vector<std::pair<int, int>> cells;  // var index -> (i, j)
    std::vector<std::vector<int>> cell_var;  // (i, j) -> var index or -1
    int n_src = 0;
    int n_tgt = 0;
    int dim = 1;
    bool barycenter_rows = false;

    int row_sum_row(int i) const { return i; }
    int column_row(int j) const { return n_src + j; }
    int barycenter_row(int i, int t) const { return n_src + n_tgt + i * dim + t; }

    Eigen::MatrixXd solution_matrix(const Eigen::VectorXd& x) const;

    /// Violating test function on the candidate targets, read off the
    /// (normalized) Farkas multipliers of the column rows with a sign flip.
    std::vector<double> violating_function(const Eigen::VectorXd& farkas) const;

    /// Dual potential phi on the candidate targets from the optimal row
    /// multipliers, again with a sign flip.
    std::vector<double> dual_potential(const Eigen::VectorXd& dual) const;
};

CouplingLp build_coupling_lp(const DiscreteMeasure& alpha, const DiscreteMeasure& beta,
                             const ConstraintSpec& constraint,
                             const Eigen::MatrixXd* cost);  // null -> feasibility objective 0

/// Lower value of a capacity-constrained kernel at one source atom:
///   min { sum_j q_j f_j : 0 <= q_j <= caps_j, sum_j q_j = 1 }
/// computed greedily by filling the cheapest values first. Returns nullopt
/// when the caps sum to less than 1 (no admissible kernel).
std::optional<double> capacity_envelope(std::span<const double> f, std::span<const double> caps);

/// alpha(f^Gamma) - beta(f) recomputed from scratch through the envelope
/// machinery (never through LP duals). `infinite` is set when some source
/// atom has no admissible kernel at all.
struct GapResult {
    double gap = 0.0;
    bool infinite = false;
};
GapResult certificate_gap(std::span<const double> f, const DiscreteMeasure& alpha,
                          const DiscreteMeasure& beta, const ConstraintSpec& constraint);

/// Independent re-verification of a coupling against marginals and
/// constraint membership; all quantities are recomputed from the matrix.
struct CouplingCheck {
    bool ok = true;
    double max_row_error = 0.0;     // vs alpha weights
    double max_column_error = 0.0;  // vs beta weights on the targets
    double max_barycenter_error = 0.0;
    double mass_outside_ball = 0.0;
    double max_cap_excess = 0.0;
};
CouplingCheck verify_coupling(const Coupling& coupling, const DiscreteMeasure& alpha,
                              const DiscreteMeasure& beta, const ConstraintSpec& constraint,
                              double tol);

/// Beta weights spread over the candidate targets (zero where beta has no
/// atom). Requires constraint.covers(beta).
std::vector<double> beta_on_targets(const DiscreteMeasure& beta, const ConstraintSpec& constraint);

}  // namespace cmot::detail
