#include "cmot/feasibility.hpp"

#include <cmath>

#include "cmot/envelope.hpp"
#include "coupling_lp.hpp"

namespace cmot {

namespace {

constexpr double kGapThreshold = 1e-9;
constexpr double kMarginalFloor = 1e-11;

std::vector<bool> admissibility_flags(const DiscreteMeasure& alpha,
                                      const ConstraintSpec& constraint) {
    std::vector<bool> flags;
    flags.reserve(alpha.size());
    std::vector<double> zero(constraint.targets().size(), 0.0);
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (constraint.kind() == ConstraintKind::CapacityBound) {
            std::vector<double> caps(zero.size());
            for (std::size_t j = 0; j < caps.size(); ++j)
                caps[j] = constraint.cell_cap(static_cast<int>(i), static_cast<int>(j), 1.0);
            flags.push_back(detail::capacity_envelope(zero, caps).has_value());
        } else if (constraint.kind() == ConstraintKind::Unconstrained) {
            flags.push_back(true);
        } else {
            flags.push_back(f_gamma(zero, alpha.atoms()[i], constraint).finite);
        }
    }
    return flags;
}

ViolatingFunction extract_certificate(const detail::CouplingLp& clp, const LpOutcome& outcome,
                                      const DiscreteMeasure& alpha, const DiscreteMeasure& beta,
                                      const ConstraintSpec& constraint) {
    ViolatingFunction vf;
    vf.values = clp.violating_function(outcome.farkas);
    detail::GapResult g = detail::certificate_gap(vf.values, alpha, beta, constraint);
    vf.gap = g.gap;
    vf.gap_infinite = g.infinite;
    return vf;
}

}  // namespace

FeasibilityReport check_feasibility(const DiscreteMeasure& alpha, const DiscreteMeasure& beta,
                                    const ConstraintSpec& constraint, const LpOptions& options) {
    if (!constraint.covers(beta))
        throw TargetsOutsideCandidatesError(
            "check_feasibility: candidate targets must contain the support of beta");

    FeasibilityReport report;
    report.source_admissible = admissibility_flags(alpha, constraint);

    detail::CouplingLp clp = detail::build_coupling_lp(alpha, beta, constraint, nullptr);
    LpOutcome outcome = solve_lp(clp.lp, options);

    if (outcome.status == LpStatus::Optimal) {
        report.feasible = true;
        report.witness = Coupling(alpha, constraint.targets(), clp.solution_matrix(outcome.solution));
        detail::CouplingCheck check =
            detail::verify_coupling(*report.witness, alpha, beta, constraint, 1e-9);
        if (!check.ok)
            throw NumericalBreakdownError(
                "check_feasibility: witness failed independent re-verification");
        return report;
    }

    report.feasible = false;
    ViolatingFunction vf = extract_certificate(clp, outcome, alpha, beta, constraint);
    if (!vf.gap_infinite && vf.gap <= kGapThreshold) {
        // marginal certificate: re-solve with tightened tolerances
        LpOptions tight = options;
        tight.feasibility_tol = 1e-12;
        tight.optimality_tol = 1e-12;
        LpOutcome retry = solve_lp(clp.lp, tight);
        if (retry.status == LpStatus::Optimal) {
            report.feasible = true;
            report.witness =
                Coupling(alpha, constraint.targets(), clp.solution_matrix(retry.solution));
            return report;
        }
        vf = extract_certificate(clp, retry, alpha, beta, constraint);
        if (!vf.gap_infinite && vf.gap <= kGapThreshold) report.marginal = vf.gap >= kMarginalFloor;
    }
    report.certificate = std::move(vf);
    return report;
}

ConvexOrderReport check_convex_order(const DiscreteMeasure& alpha, const DiscreteMeasure& beta) {
    if (alpha.dim() != 1 || beta.dim() != 1)
        throw DimensionMismatchError("check_convex_order: requires d = 1");
    ConvexOrderReport report;
    report.means_match = std::abs(alpha.mean().scalar() - beta.mean().scalar()) <= 1e-10;
    if (!report.means_match) {
        report.ordered = false;
        return report;
    }
    report.ordered = true;
    double worst = 0.0;
    auto probe = [&](const Point& y) {
        double gap = convex_order_potential(alpha, y) - convex_order_potential(beta, y);
        if (gap > 1e-10 && gap > worst) {
            worst = gap;
            report.violation = y;
            report.violation_gap = gap;
            report.ordered = false;
        }
    };
    for (const Point& y : alpha.atoms()) probe(y);
    for (const Point& y : beta.atoms()) probe(y);
    return report;
}

}  // namespace cmot
