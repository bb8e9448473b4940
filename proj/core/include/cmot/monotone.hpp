#pragma once

#include <optional>
#include <vector>

#include "cmot/measures.hpp"
#include "cmot/transport.hpp"

namespace cmot {

/// A forbidden support configuration: two targets of a left source straddling
/// a target of a right source, with all three ball conditions satisfied.
struct TripleViolation {
    double x = 0.0, y_minus = 0.0, y_plus = 0.0;
    double x_prime = 0.0, y_prime = 0.0;
};

/// A two-row exchange that beats the incumbent kernels: kernels m_i, m_j with
/// m_i + m_j equal to the incumbent kernel sum, both admissible, improving
/// the kernel cost sum c(x_i, m_i) + c(x_j, m_j) by `improvement`.
struct CompetitorViolation {
    Eigen::Index row_i = 0, row_j = 0;
    DiscreteMeasure m_i, m_j;
    double improvement = 0.0;  // in kernel units, strictly positive
};

struct MonotoneReport {
    bool passes = true;
    std::optional<TripleViolation> triple;
    std::optional<CompetitorViolation> competitor;
    /// False when the cost lacks a strictly convex marginal derivative, in
    /// which case left-monotonicity of optimizers is reported as not
    /// guaranteed rather than asserted.
    bool guaranteed = true;
};

/// Support check: passes iff no triple (x,y-),(x,y+),(x',y') in the support
/// has x < x', y- < y' < y+ (strict means difference > 1e-12) with
/// |y'-x| <= a(x), |y- - x'| <= a(x') and |y+ - x'| <= a(x'). d = 1 only.
MonotoneReport check_gamma_left_monotone(const Coupling& coupling, const RadiusTable& radius);

/// Exchange test for one source pair: solves the two-row exchange LP
///   min c(x_i, m_i) + c(x_j, m_j)
///   s.t. m_i + m_j = incumbent kernel sum, m_i and m_j admissible
/// and passes iff the incumbent kernels attain the minimum within 1e-8.
/// Throws NoAdmissibleExchangeError if the exchange LP is infeasible, which
/// cannot happen when the incumbent itself is admissible.
MonotoneReport competitor_check(const Coupling& coupling, const ConstraintSpec& constraint,
                                const CostSpec& cost, Eigen::Index row_i, Eigen::Index row_j,
                                const LpOptions& options = {});

/// All-pairs exchange test; reports the first failing pair. Pair checks are
/// independent and may run concurrently.
MonotoneReport competitor_check_all_pairs(const Coupling& coupling,
                                          const ConstraintSpec& constraint, const CostSpec& cost,
                                          const LpOptions& options = {});

struct UniquenessReport {
    bool unique = false;
    /// True when the cost family carries the uniqueness guarantee (two-point
    /// source, strictly convex marginal cost).
    bool guaranteed = false;
    Coupling plan;
    double max_deviation = 0.0;  // entrywise gap between the probe optimizers
};

/// Solves the primal, then re-solves restricted to the optimal face under a
/// fixed generic tie-breaking objective in both directions; unique iff all
/// optimizers coincide entrywise within 1e-8. Requires |support(alpha)| = 2.
UniquenessReport uniqueness_probe(const DiscreteMeasure& alpha, const DiscreteMeasure& beta,
                                  const ConstraintSpec& constraint, const CostSpec& cost,
                                  const LpOptions& options = {});

}  // namespace cmot
