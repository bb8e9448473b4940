#pragma once

#include <vector>

#include "cmot/feasibility.hpp"
#include "cmot/measures.hpp"

namespace cmot {

/// Marginals pinned at strictly increasing times, with one ball-radius table
/// per interval. The interval constraint depends only on the current state,
/// never on the path history; that is what makes kernels state-indexed
/// matrices and the pasting construction work.
struct MarginalCurve {
    std::vector<int> times;
    std::vector<DiscreteMeasure> marginals;
    std::vector<RadiusTable> radii;  // one per interval

    void validate() const;
    std::size_t intervals() const { return radii.size(); }
};

/// Initial law plus stagewise stochastic kernels grids[i] -> grids[i+1].
struct PathMeasure {
    DiscreteMeasure initial;
    std::vector<std::vector<Point>> grids;
    std::vector<Eigen::MatrixXd> kernels;

    /// Law at time index t (pushforward of the initial law).
    DiscreteMeasure marginal_at(std::size_t t) const;
};

struct MultiMarginalReport {
    bool feasible = true;
    int first_infeasible = -1;
    std::vector<FeasibilityReport> intervals;
};

/// Feasibility of the whole curve reduces to feasibility of every
/// consecutive pair under its interval constraint; this runs exactly that
/// pairwise reduction. Interval checks are independent of each other.
MultiMarginalReport check_multimarginal(const MarginalCurve& curve, const LpOptions& options = {});

/// Composes per-interval witness couplings into a PathMeasure through their
/// disintegration kernels. Consecutive witnesses must agree on the shared
/// marginal within 1e-10, else MarginalMismatchError.
PathMeasure paste(const std::vector<Coupling>& witnesses);

/// Pushes the initial law through the kernel chain and compares each time
/// slice against the curve's marginals within tol.
bool verify_marginals(const PathMeasure& path, const MarginalCurve& curve, double tol = 1e-10);

/// Independent re-check that every kernel row is a probability vector with
/// barycenter at its state and support inside the interval ball.
struct PathCheck {
    bool ok = true;
    double max_row_sum_error = 0.0;
    double max_barycenter_error = 0.0;
    double mass_outside_ball = 0.0;
};
PathCheck verify_path_constraints(const PathMeasure& path, const MarginalCurve& curve,
                                  double tol = 1e-9);

struct SkorokhodOptions {
    double kappa = 3.0;       // per-step bound = kappa * sqrt(sigma / n)
    int grid_cap = 10000;     // total path-grid points before GridOverflowError
    LpOptions lp;
};

/// Discrete analogue of embedding beta into a stopped motion started at
/// alpha within total quadratic budget sigma: feasibility of an n-step
/// martingale from alpha to beta whose per-step increments are bounded by
/// kappa * sqrt(sigma / n), decided by a single LP on the path lattice. The
/// intermediate marginals are free. Reported as an analogue with the
/// per-step bound stated, not as an approximation with an error estimate.
///
/// On feasible instances *out_path (when given) receives the embedding; on
/// infeasible ones the certificate f lives on the terminal grid and its gap
/// is re-established through the multi-period envelope recursion.
FeasibilityReport skorokhod_discrete(const DiscreteMeasure& alpha, const DiscreteMeasure& beta,
                                     double sigma, int n_steps,
                                     const SkorokhodOptions& options = {},
                                     PathMeasure* out_path = nullptr);

}  // namespace cmot
