#pragma once

#include <utility>
#include <vector>

#include "cmot/measures.hpp"
#include "cmot/transport.hpp"

namespace cmot {

/// Capacity-constrained transport instance: couplings must satisfy
///   pi(x_i, y_j) <= alpha_i * bound(i, j) * reference(i, j)
/// with the reference a stochastic matrix over the supports of alpha and
/// beta (rows follow alpha's sorted atoms, columns beta's). Infinite bound
/// entries mean "no cap on this cell"; a zero reference entry forbids the
/// cell regardless of the bound.
struct CapacityInstance {
    DiscreteMeasure alpha;
    DiscreteMeasure beta;
    Eigen::MatrixXd reference;
    Eigen::MatrixXd bound;
    CostSpec cost;

    ConstraintSpec constraint() const;
};

/// Minimizes the cost over capacity-admissible couplings. Infeasible
/// instances throw InfeasibleInstanceError whose certificate f verifies
/// alpha(f^Gamma) > beta(f) for the capacity envelope, which decides the
/// non-emptiness question constructively.
SolveReport solve_capacity(const CapacityInstance& instance, const LpOptions& options = {});

/// Cell classification of a feasible plan: empty (mass 0 within 1e-9),
/// saturated (mass equals the cap within cell_tol * cap), or interior.
/// The plan is geometrically extreme when the interior cells carry no mass.
struct ExtremalityReport {
    bool extreme = false;
    double interior_mass = 0.0;
    std::vector<std::pair<int, int>> saturated_cells;  // the set W
    std::vector<std::pair<int, int>> interior_cells;
};

ExtremalityReport check_extremality(const CapacityInstance& instance, const Coupling& coupling,
                                    double cell_tol = 1e-9, double mass_tol = 1e-9);

}  // namespace cmot
