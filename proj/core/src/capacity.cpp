#include "cmot/capacity.hpp"

#include <cmath>

namespace cmot {

ConstraintSpec CapacityInstance::constraint() const {
    return ConstraintSpec::capacity_bound(reference, bound, beta.atoms());
}

SolveReport solve_capacity(const CapacityInstance& instance, const LpOptions& options) {
    return solve_dual(instance.alpha, instance.beta, instance.constraint(), instance.cost, options);
}

ExtremalityReport check_extremality(const CapacityInstance& instance, const Coupling& coupling,
                                    double cell_tol, double mass_tol) {
    ConstraintSpec spec = instance.constraint();
    const Eigen::MatrixXd& pi = coupling.matrix();
    ExtremalityReport report;
    for (Eigen::Index i = 0; i < pi.rows(); ++i) {
        for (Eigen::Index j = 0; j < pi.cols(); ++j) {
            double mass = pi(i, j);
            double cap = spec.cell_cap(static_cast<int>(i), static_cast<int>(j),
                                       instance.alpha.weights()[static_cast<std::size_t>(i)]);
            if (mass <= 1e-9) continue;  // empty
            if (!std::isinf(cap) && cap - mass <= cell_tol * std::max(cap, 1e-300)) {
                report.saturated_cells.emplace_back(static_cast<int>(i), static_cast<int>(j));
            } else {
                report.interior_cells.emplace_back(static_cast<int>(i), static_cast<int>(j));
                report.interior_mass += mass;
            }
        }
    }
    report.extreme = report.interior_mass <= mass_tol;
    return report;
}

}  // namespace cmot
