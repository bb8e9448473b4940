#pragma once

#include <span>
#include <vector>

#include "cmot/measures.hpp"

namespace cmot {

/// Value and attaining kernel of the lower-value operator
///   f^Gamma(x) = inf { E^Q[f] : Q admissible at x }.
/// When no admissible kernel exists (the candidate set misses the ball, or x
/// lies outside the convex hull of the admissible points) the value is the
/// +infinity marker: finite == false and empty_admissible == true. The marker
/// is never smuggled into LP data as a float infinity.
struct EnvelopeResult {
    double value = 0.0;
    bool finite = true;
    bool empty_admissible = false;
    DiscreteMeasure kernel;          // optimal kernel, present iff finite
    std::vector<int> active_points;  // indices into the candidate targets, <= d+1 of them

    static EnvelopeResult infinite() {
        EnvelopeResult r;
        r.finite = false;
        r.empty_admissible = true;
        return r;
    }
};

/// Restricted convex envelope of f evaluated at x.
///
/// MartingaleBall: lower convex envelope of f restricted to the candidate
/// targets inside the closed ball around x, evaluated at x. Martingale is the
/// same with infinite radius. Unconstrained is the plain minimum of f.
///
/// f is given by its values on constraint.targets(), in that order.
/// The 1-D path computes the lower convex hull by a monotone-chain scan; for
/// d > 1 it falls back to the barycenter-constrained LP. Ties among optimal
/// kernels are broken by the hull's leftmost segment; the value is unique,
/// the kernel need not be.
EnvelopeResult f_gamma(std::span<const double> f, const Point& x, const ConstraintSpec& constraint);

/// Batch evaluation at many points. Pure; the contract permits concurrent
/// evaluation of distinct points.
std::vector<EnvelopeResult> f_gamma_batch(std::span<const double> f,
                                          std::span<const Point> xs,
                                          const ConstraintSpec& constraint);

/// Backward recursion over the grids: g_N = f on grids[N], then
///   g_{n-1}(x) = envelope of g_n restricted to the ball around x in grids[n]
/// for each x in grids[n-1]. Returns all stages; [0] is g_0 on grids[0].
/// An empty admissible set anywhere propagates the +infinity marker.
struct MultiPeriodEnvelope {
    // stages[n][k]: g_n at grids[n][k]; stages[N] is f itself
    std::vector<std::vector<EnvelopeResult>> stages;
    std::vector<double> g0() const;  // values, +infinity marker as +inf double
    bool all_finite() const;
};

MultiPeriodEnvelope f_gamma_multiperiod(std::span<const double> f,
                                        const std::vector<RadiusTable>& radii,
                                        const std::vector<std::vector<Point>>& grids,
                                        ConstraintKind kind);

/// The inner operator of the dual problem:
///   inf { E^Q[phi] + c(x, Q) : Q admissible at x }.
/// For costs linear in the kernel this is exactly f_gamma applied to
/// y -> phi(y) + C(x, y); cost_row holds C(x, y_j) on constraint.targets().
EnvelopeResult r_c_gamma(std::span<const double> phi, const Point& x,
                         std::span<const double> cost_row, const ConstraintSpec& constraint);

/// Convenience overload resolving the cost row from a CostSpec (requires a
/// difference cost, or a table cost pinned to the exact points).
EnvelopeResult r_c_gamma(std::span<const double> phi, const Point& x, const CostSpec& cost,
                         const ConstraintSpec& constraint);

/// 1-D potential function u_mu(y) = integral |y - z| mu(dz). Convex order of
/// equal-mean measures is equivalent to pointwise order of potentials.
double convex_order_potential(const DiscreteMeasure& mu, const Point& y);

}  // namespace cmot
