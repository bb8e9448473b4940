#include "cmot/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cmot/lp.hpp"

namespace cmot {

namespace {

EnvelopeResult min_over_targets(std::span<const double> f, const ConstraintSpec& constraint) {
    const auto& ys = constraint.targets();
    int best = 0;
    for (std::size_t j = 1; j < ys.size(); ++j)
        if (f[j] < f[best]) best = static_cast<int>(j);
    EnvelopeResult r;
    r.value = f[static_cast<std::size_t>(best)];
    r.kernel = DiscreteMeasure::dirac(ys[static_cast<std::size_t>(best)]);
    r.active_points = {best};
    return r;
}

/// 1-D: lower convex hull of the admissible (y, f(y)) pairs via monotone
/// chain, then evaluate the hull at x.
EnvelopeResult hull_envelope_1d(std::span<const double> f, const Point& x,
                                const ConstraintSpec& constraint) {
    const auto& ys = constraint.targets();
    const double radius = constraint.kind() == ConstraintKind::Martingale
                              ? std::numeric_limits<double>::infinity()
                              : constraint.radius().at(x);
    const double xv = x.scalar();

    std::vector<int> adm;  // targets are sorted, so adm is sorted by y
    adm.reserve(ys.size());
    for (std::size_t j = 0; j < ys.size(); ++j)
        if (std::abs(ys[j].scalar() - xv) <= radius + ConstraintSpec::kBallTol)
            adm.push_back(static_cast<int>(j));
    if (adm.empty()) return EnvelopeResult::infinite();

    const double y_lo = ys[static_cast<std::size_t>(adm.front())].scalar();
    const double y_hi = ys[static_cast<std::size_t>(adm.back())].scalar();
    if (xv < y_lo - ConstraintSpec::kBallTol || xv > y_hi + ConstraintSpec::kBallTol)
        return EnvelopeResult::infinite();

    // monotone chain, keeping only strict right turns (collinear middle
    // points are dropped, so segments are maximal and ties resolve to the
    // leftmost segment containing x)
    std::vector<int> hull;
    hull.reserve(adm.size());
    auto yv = [&](int j) { return ys[static_cast<std::size_t>(j)].scalar(); };
    auto fv = [&](int j) { return f[static_cast<std::size_t>(j)]; };
    for (int j : adm) {
        while (hull.size() >= 2) {
            int a = hull[hull.size() - 2];
            int b = hull[hull.size() - 1];
            double cross = (yv(b) - yv(a)) * (fv(j) - fv(a)) - (yv(j) - yv(a)) * (fv(b) - fv(a));
            if (cross <= 0.0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(j);
    }

    EnvelopeResult r;
    // exact hit on a hull vertex: the optimal kernel is the Dirac there
    for (int j : hull) {
        if (yv(j) == xv) {
            r.value = fv(j);
            r.kernel = DiscreteMeasure::dirac(ys[static_cast<std::size_t>(j)]);
            r.active_points = {j};
            return r;
        }
    }
    if (hull.size() == 1) {
        // single admissible point not equal to x: barycenter condition fails
        // unless x coincides with it up to the ball tolerance
        int j = hull[0];
        if (std::abs(yv(j) - xv) <= ConstraintSpec::kBallTol) {
            r.value = fv(j);
            r.kernel = DiscreteMeasure::dirac(ys[static_cast<std::size_t>(j)]);
            r.active_points = {j};
            return r;
        }
        return EnvelopeResult::infinite();
    }

    double xq = std::min(std::max(xv, yv(hull.front())), yv(hull.back()));
    std::size_t seg = 0;
    while (seg + 2 < hull.size() && yv(hull[seg + 1]) < xq) ++seg;
    int l = hull[seg];
    int u = hull[seg + 1];
    double lambda = (yv(u) - xq) / (yv(u) - yv(l));  // weight on the left endpoint
    lambda = std::min(std::max(lambda, 0.0), 1.0);
    r.value = lambda * fv(l) + (1.0 - lambda) * fv(u);
    if (lambda >= 1.0) {
        r.kernel = DiscreteMeasure::dirac(ys[static_cast<std::size_t>(l)]);
        r.active_points = {l};
    } else if (lambda <= 0.0) {
        r.kernel = DiscreteMeasure::dirac(ys[static_cast<std::size_t>(u)]);
        r.active_points = {u};
    } else {
        r.kernel = DiscreteMeasure({ys[static_cast<std::size_t>(l)], ys[static_cast<std::size_t>(u)]},
                                   {lambda, 1.0 - lambda});
        r.active_points = {l, u};
    }
    return r;
}

/// d > 1: solve min sum q_j f_j over kernels with barycenter x supported on
/// the admissible candidate points.
EnvelopeResult lp_envelope(std::span<const double> f, const Point& x,
                           const ConstraintSpec& constraint) {
    const auto& ys = constraint.targets();
    const int d = x.dim();
    const double radius = constraint.kind() == ConstraintKind::Martingale
                              ? std::numeric_limits<double>::infinity()
                              : constraint.radius().at(x);
    std::vector<int> adm;
    for (std::size_t j = 0; j < ys.size(); ++j)
        if (distance(ys[j], x) <= radius + ConstraintSpec::kBallTol)
            adm.push_back(static_cast<int>(j));
    if (adm.empty()) return EnvelopeResult::infinite();

    const Eigen::Index n = static_cast<Eigen::Index>(adm.size());
    Eigen::MatrixXd a(1 + d, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(1 + d);
    Eigen::VectorXd c(n);
    b[0] = 1.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const Point& y = ys[static_cast<std::size_t>(adm[static_cast<std::size_t>(k)])];
        a(0, k) = 1.0;
        for (int t = 0; t < d; ++t) a(1 + t, k) = y[t] - x[t];
        c[k] = f[static_cast<std::size_t>(adm[static_cast<std::size_t>(k)])];
    }
    LpOutcome out = solve_lp(LinearProgram::standard(a, b, c));
    if (out.status != LpStatus::Optimal) return EnvelopeResult::infinite();

    EnvelopeResult r;
    r.value = out.value;
    std::vector<Point> atoms;
    std::vector<double> weights;
    for (Eigen::Index k = 0; k < n; ++k) {
        if (out.solution[k] > 1e-12) {
            atoms.push_back(ys[static_cast<std::size_t>(adm[static_cast<std::size_t>(k)])]);
            weights.push_back(out.solution[k]);
            r.active_points.push_back(adm[static_cast<std::size_t>(k)]);
        }
    }
    r.kernel = DiscreteMeasure(std::move(atoms), std::move(weights));
    return r;
}

}  // namespace

EnvelopeResult f_gamma(std::span<const double> f, const Point& x, const ConstraintSpec& constraint) {
    if (f.size() != constraint.targets().size())
        throw DimensionMismatchError("f_gamma: payoff length must match candidate targets");
    if (constraint.kind() == ConstraintKind::CapacityBound)
        throw DimensionMismatchError("f_gamma: capacity constraints are handled by the capacity module");
    for (double v : f)
        if (!std::isfinite(v)) throw DimensionMismatchError("f_gamma: payoff must be finite");
    if (constraint.kind() == ConstraintKind::Unconstrained) return min_over_targets(f, constraint);
    if (x.dim() == 1) return hull_envelope_1d(f, x, constraint);
    return lp_envelope(f, x, constraint);
}

std::vector<EnvelopeResult> f_gamma_batch(std::span<const double> f, std::span<const Point> xs,
                                          const ConstraintSpec& constraint) {
    std::vector<EnvelopeResult> out;
    out.reserve(xs.size());
    for (const Point& x : xs) out.push_back(f_gamma(f, x, constraint));
    return out;
}

std::vector<double> MultiPeriodEnvelope::g0() const {
    std::vector<double> v;
    v.reserve(stages.front().size());
    for (const EnvelopeResult& r : stages.front())
        v.push_back(r.finite ? r.value : std::numeric_limits<double>::infinity());
    return v;
}

bool MultiPeriodEnvelope::all_finite() const {
    for (const auto& stage : stages)
        for (const EnvelopeResult& r : stage)
            if (!r.finite) return false;
    return true;
}

MultiPeriodEnvelope f_gamma_multiperiod(std::span<const double> f,
                                        const std::vector<RadiusTable>& radii,
                                        const std::vector<std::vector<Point>>& grids,
                                        ConstraintKind kind) {
    if (grids.size() < 2) throw DimensionMismatchError("multiperiod envelope: need at least two grids");
    const std::size_t n = grids.size() - 1;
    if (radii.size() != n)
        throw DimensionMismatchError("multiperiod envelope: one radius table per interval");
    if (f.size() != grids.back().size())
        throw DimensionMismatchError("multiperiod envelope: payoff must live on the terminal grid");

    MultiPeriodEnvelope out;
    out.stages.resize(n + 1);
    auto& terminal = out.stages[n];
    terminal.reserve(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        EnvelopeResult r;
        r.value = f[k];
        r.kernel = DiscreteMeasure::dirac(grids[n][k]);
        r.active_points = {static_cast<int>(k)};
        terminal.push_back(std::move(r));
    }

    for (std::size_t stage = n; stage-- > 0;) {
        const auto& next_vals = out.stages[stage + 1];
        std::vector<double> g(next_vals.size());
        bool next_finite = true;
        for (std::size_t k = 0; k < next_vals.size(); ++k) {
            if (!next_vals[k].finite) next_finite = false;
            g[k] = next_vals[k].value;
        }
        ConstraintSpec step;
        switch (kind) {
            case ConstraintKind::Martingale: step = ConstraintSpec::martingale(grids[stage + 1]); break;
            case ConstraintKind::MartingaleBall:
                step = ConstraintSpec::martingale_ball(radii[stage], grids[stage + 1]);
                break;
            case ConstraintKind::Unconstrained:
                step = ConstraintSpec::unconstrained(grids[stage + 1]);
                break;
            case ConstraintKind::CapacityBound:
                throw DimensionMismatchError("multiperiod envelope: capacity kind not supported");
        }
        // target sorting must not permute the payoff, so grids have to be
        // sorted already
        for (std::size_t j = 1; j < grids[stage + 1].size(); ++j)
            if (!(grids[stage + 1][j - 1] < grids[stage + 1][j]))
                throw DimensionMismatchError("multiperiod envelope: grids must be sorted and distinct");

        auto& here = out.stages[stage];
        here.reserve(grids[stage].size());
        for (const Point& x : grids[stage]) {
            if (!next_finite) {
                // a +infinity marker upstream poisons any kernel that can
                // reach it
                bool reaches_infinite = false;
                const double radius = kind == ConstraintKind::MartingaleBall
                                          ? radii[stage].at(x)
                                          : std::numeric_limits<double>::infinity();
                for (std::size_t k = 0; k < g.size(); ++k) {
                    if (!next_vals[k].finite &&
                        distance(grids[stage + 1][k], x) <= radius + ConstraintSpec::kBallTol) {
                        reaches_infinite = true;
                        break;
                    }
                }
                if (reaches_infinite) {
                    here.push_back(EnvelopeResult::infinite());
                    continue;
                }
            }
            here.push_back(f_gamma(g, x, step));
        }
    }
    return out;
}

EnvelopeResult r_c_gamma(std::span<const double> phi, const Point& x,
                         std::span<const double> cost_row, const ConstraintSpec& constraint) {
    if (phi.size() != cost_row.size())
        throw DimensionMismatchError("r_c_gamma: phi and cost row lengths differ");
    std::vector<double> shifted(phi.size());
    for (std::size_t j = 0; j < phi.size(); ++j) shifted[j] = phi[j] + cost_row[j];
    return f_gamma(shifted, x, constraint);
}

EnvelopeResult r_c_gamma(std::span<const double> phi, const Point& x, const CostSpec& cost,
                         const ConstraintSpec& constraint) {
    std::vector<double> row(constraint.targets().size());
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = cost.value(x, constraint.targets()[j]);
    return r_c_gamma(phi, x, row, constraint);
}

double convex_order_potential(const DiscreteMeasure& mu, const Point& y) {
    if (mu.dim() != 1 || y.dim() != 1)
        throw DimensionMismatchError("convex_order_potential: requires d = 1");
    double u = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i)
        u += mu.weights()[i] * std::abs(y.scalar() - mu.atoms()[i].scalar());
    return u;
}

}  // namespace cmot
