#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "cmot/lp.hpp"
#include "cmot/measures.hpp"

namespace cmot {

/// Infeasibility witness: a test function f on the candidate targets whose
/// envelope average strictly exceeds its target average,
///   alpha(f^Gamma) - beta(f) > 0.
/// The gap is recomputed from scratch through the envelope module, never
/// copied out of LP internals. gap_infinite marks source atoms with no
/// admissible kernel at all.
struct ViolatingFunction {
    std::vector<double> values;
    double gap = 0.0;
    bool gap_infinite = false;
};

struct FeasibilityReport {
    bool feasible = false;
    std::optional<Coupling> witness;               // feasible case
    std::optional<ViolatingFunction> certificate;  // infeasible case
    std::vector<bool> source_admissible;           // Gamma(x_i) nonempty, per source atom
    bool marginal = false;  // certificate gap within [1e-11, 1e-9] after a tightened re-solve
};

/// Raised by solvers on infeasible instances; carries the full report.
class InfeasibleInstanceError : public Error {
  public:
    InfeasibleInstanceError(const std::string& what, FeasibilityReport report)
        : Error(what), report_(std::make_shared<FeasibilityReport>(std::move(report))) {}
    const FeasibilityReport& report() const { return *report_; }

  private:
    std::shared_ptr<FeasibilityReport> report_;
};

/// Decides whether a coupling with marginals (alpha, beta) and admissible
/// kernels exists. Feasible instances return a witness coupling that passes
/// independent constraint re-verification; infeasible instances return a
/// violating test function extracted from the Farkas certificate of the
/// coupling LP, with the gap re-established through the envelope module.
///
/// Requires constraint.targets() to contain the support of beta.
FeasibilityReport check_feasibility(const DiscreteMeasure& alpha, const DiscreteMeasure& beta,
                                    const ConstraintSpec& constraint,
                                    const LpOptions& options = {});

struct ConvexOrderReport {
    bool ordered = false;
    bool means_match = false;
    std::optional<Point> violation;  // atom where the potential order fails
    double violation_gap = 0.0;
};

/// 1-D convex order test via potential functions: alpha precedes beta iff the
/// means agree within 1e-10 and u_alpha <= u_beta + 1e-10 at every atom of
/// either measure. Equivalent to martingale-kind feasibility.
ConvexOrderReport check_convex_order(const DiscreteMeasure& alpha, const DiscreteMeasure& beta);

}  // namespace cmot
