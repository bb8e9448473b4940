#include "cmot/transport.hpp"

#include <cmath>

#include "cmot/envelope.hpp"
#include "coupling_lp.hpp"

namespace cmot {

namespace {

SolveReport solve_impl(const DiscreteMeasure& alpha, const DiscreteMeasure& beta,
                       const ConstraintSpec& constraint, const CostSpec& cost,
                       const LpOptions& options, bool with_dual) {
    if (!constraint.covers(beta))
        throw TargetsOutsideCandidatesError(
            "solve: candidate targets must contain the support of beta");

    Eigen::MatrixXd c = cost.matrix(alpha.atoms(), constraint.targets());
    detail::CouplingLp clp = detail::build_coupling_lp(alpha, beta, constraint, &c);
    LpOutcome outcome = solve_lp(clp.lp, options);

    if (outcome.status == LpStatus::Infeasible) {
        FeasibilityReport fr;
        fr.feasible = false;
        ViolatingFunction vf;
        vf.values = clp.violating_function(outcome.farkas);
        detail::GapResult g = detail::certificate_gap(vf.values, alpha, beta, constraint);
        vf.gap = g.gap;
        vf.gap_infinite = g.infinite;
        fr.certificate = std::move(vf);
        throw InfeasibleInstanceError("solve: instance is infeasible", std::move(fr));
    }
    if (outcome.status == LpStatus::Unbounded)
        throw UnboundedCostError("solve: unbounded objective on a finite cost table");

    SolveReport report;
    report.primal_value = outcome.value;
    report.coupling = Coupling(alpha, constraint.targets(), clp.solution_matrix(outcome.solution));
    report.unique_hint = !outcome.dual_degenerate;

    detail::CouplingCheck check =
        detail::verify_coupling(report.coupling, alpha, beta, constraint, 1e-9);
    if (!check.ok)
        throw NumericalBreakdownError("solve: optimizer failed independent re-verification");

    if (with_dual) {
        report.phi = clp.dual_potential(outcome.dual);
        report.dual_potential.resize(alpha.size());
        double alpha_side = 0.0;
        for (std::size_t i = 0; i < alpha.size(); ++i) {
            double v = 0.0;
            if (constraint.kind() == ConstraintKind::CapacityBound) {
                std::vector<double> shifted(report.phi.size());
                std::vector<double> caps(report.phi.size());
                for (std::size_t j = 0; j < shifted.size(); ++j) {
                    shifted[j] = report.phi[j] + c(static_cast<Eigen::Index>(i),
                                                   static_cast<Eigen::Index>(j));
                    caps[j] = constraint.cell_cap(static_cast<int>(i), static_cast<int>(j), 1.0);
                }
                auto env = detail::capacity_envelope(shifted, caps);
                if (!env)
                    throw NumericalBreakdownError("solve: empty admissible set on a solved instance");
                v = *env;
            } else {
                std::vector<double> row(report.phi.size());
                for (std::size_t j = 0; j < row.size(); ++j)
                    row[j] = c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                EnvelopeResult env = r_c_gamma(report.phi, alpha.atoms()[i], row, constraint);
                if (!env.finite)
                    throw NumericalBreakdownError("solve: empty admissible set on a solved instance");
                v = env.value;
            }
            report.dual_potential[i] = v;
            alpha_side += alpha.weights()[i] * v;
        }
        double beta_side = 0.0;
        std::vector<double> bw = detail::beta_on_targets(beta, constraint);
        for (std::size_t j = 0; j < bw.size(); ++j) beta_side += bw[j] * report.phi[j];
        report.dual_value = alpha_side - beta_side;
        report.gap = std::abs(report.primal_value - report.dual_value);
    }
    return report;
}

}  // namespace

SolveReport solve_primal(const DiscreteMeasure& alpha, const DiscreteMeasure& beta,
                         const ConstraintSpec& constraint, const CostSpec& cost,
                         const LpOptions& options) {
    return solve_impl(alpha, beta, constraint, cost, options, false);
}

SolveReport solve_dual(const DiscreteMeasure& alpha, const DiscreteMeasure& beta,
                       const ConstraintSpec& constraint, const CostSpec& cost,
                       const LpOptions& options) {
    return solve_impl(alpha, beta, constraint, cost, options, true);
}

double evaluate_plan(const Coupling& coupling, const CostSpec& cost) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < coupling.matrix().rows(); ++i) {
        const Point& x = coupling.source().atoms()[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < coupling.matrix().cols(); ++j) {
            double mass = coupling.matrix()(i, j);
            if (mass != 0.0) total += mass * cost.value(x, coupling.targets()[static_cast<std::size_t>(j)]);
        }
    }
    return total;
}

}  // namespace cmot
