#pragma once

#include <vector>

#include "cmot/feasibility.hpp"
#include "cmot/measures.hpp"

namespace cmot {

/// Solution of the constrained transport problem together with its dual
/// certificate. The dual potential phi lives on the candidate targets; the
/// source-side potential is the inner envelope applied to phi,
///   f_dual(x) = inf { E^Q[phi] + c(x, Q) : Q admissible at x },
/// recomputed through the envelope module as an independent verification
/// path, so gap = |primal - dual| measures real agreement, not bookkeeping.
struct SolveReport {
    double primal_value = 0.0;
    Coupling coupling;
    std::vector<double> phi;             // on constraint targets
    std::vector<double> dual_potential;  // f_dual on source atoms
    double dual_value = 0.0;
    double gap = 0.0;
    bool unique_hint = false;  // no dual degeneracy observed at the optimum
};

/// Minimizes sum C(x_i, y_j) pi(i, j) over admissible couplings of
/// (alpha, beta). Throws InfeasibleInstanceError with an embedded certificate
/// when no admissible coupling exists; UnboundedCostError cannot occur for
/// finite cost tables and is asserted.
SolveReport solve_primal(const DiscreteMeasure& alpha, const DiscreteMeasure& beta,
                         const ConstraintSpec& constraint, const CostSpec& cost,
                         const LpOptions& options = {});

/// Primal solve plus the dual side: phi is read off the optimal column
/// multipliers and dual_value = alpha(f_dual) - beta(phi).
SolveReport solve_dual(const DiscreteMeasure& alpha, const DiscreteMeasure& beta,
                       const ConstraintSpec& constraint, const CostSpec& cost,
                       const LpOptions& options = {});

/// sum_{i,j} pi(x_i, y_j) C(x_i, y_j). Additive in coupling mixtures.
double evaluate_plan(const Coupling& coupling, const CostSpec& cost);

}  // namespace cmot
