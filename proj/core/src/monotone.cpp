#include "cmot/monotone.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cmot/lp.hpp"
#include "coupling_lp.hpp"

namespace cmot {

namespace {

constexpr double kStrict = 1e-12;       // strict inequality margin
constexpr double kSupportTol = 1e-12;   // support membership
constexpr double kExchangeTol = 1e-8;   // incumbent optimality slack

std::vector<int> row_support(const Eigen::MatrixXd& pi, Eigen::Index i) {
    std::vector<int> s;
    for (Eigen::Index j = 0; j < pi.cols(); ++j)
        if (pi(i, j) > kSupportTol) s.push_back(static_cast<int>(j));
    return s;
}

}  // namespace

MonotoneReport check_gamma_left_monotone(const Coupling& coupling, const RadiusTable& radius) {
    if (coupling.source().dim() != 1)
        throw DimensionMismatchError("check_gamma_left_monotone: requires d = 1");
    MonotoneReport report;
    const Eigen::MatrixXd& pi = coupling.matrix();
    const auto& xs = coupling.source().atoms();
    const auto& ys = coupling.targets();

    for (Eigen::Index i = 0; i < pi.rows(); ++i) {
        const double x = xs[static_cast<std::size_t>(i)].scalar();
        const double ax = radius.at(xs[static_cast<std::size_t>(i)]);
        std::vector<int> si = row_support(pi, i);
        if (si.size() < 2) continue;
        for (Eigen::Index k = 0; k < pi.rows(); ++k) {
            if (k == i) continue;
            const double xp = xs[static_cast<std::size_t>(k)].scalar();
            if (!(xp - x > kStrict)) continue;
            const double axp = radius.at(xs[static_cast<std::size_t>(k)]);
            for (int jp : row_support(pi, k)) {
                const double yp = ys[static_cast<std::size_t>(jp)].scalar();
                if (std::abs(yp - x) > ax + ConstraintSpec::kBallTol) continue;
                for (std::size_t a = 0; a < si.size(); ++a) {
                    const double ym = ys[static_cast<std::size_t>(si[a])].scalar();
                    if (!(yp - ym > kStrict)) continue;
                    if (std::abs(ym - xp) > axp + ConstraintSpec::kBallTol) continue;
                    for (std::size_t b = a + 1; b < si.size(); ++b) {
                        const double yq = ys[static_cast<std::size_t>(si[b])].scalar();
                        if (!(yq - yp > kStrict)) continue;
                        if (std::abs(yq - xp) > axp + ConstraintSpec::kBallTol) continue;
                        report.passes = false;
                        report.triple = TripleViolation{x, ym, yq, xp, yp};
                        return report;
                    }
                }
            }
        }
    }
    return report;
}

MonotoneReport competitor_check(const Coupling& coupling, const ConstraintSpec& constraint,
                                const CostSpec& cost, Eigen::Index row_i, Eigen::Index row_j,
                                const LpOptions& options) {
    MonotoneReport report;
    report.guaranteed = cost.strictly_convex_marginal();
    const Eigen::MatrixXd& pi = coupling.matrix();
    const auto& xs = coupling.source().atoms();
    const auto& ys = coupling.targets();
    if (ys != constraint.targets())
        throw DimensionMismatchError("competitor_check: coupling targets must match the constraint");
    const double wi = coupling.row_mass(row_i);
    const double wj = coupling.row_mass(row_j);
    if (wi <= 0.0 || wj <= 0.0) throw ZeroMassRowError("competitor_check: zero-mass row");

    const Point& x = xs[static_cast<std::size_t>(row_i)];
    const Point& xp = xs[static_cast<std::size_t>(row_j)];
    const int d = x.dim();
    const bool martingale = constraint.kind() == ConstraintKind::Martingale ||
                            constraint.kind() == ConstraintKind::MartingaleBall;

    // union support of the incumbent kernels carries all exchanged mass
    std::vector<int> cols;
    std::vector<double> balance;
    for (Eigen::Index j = 0; j < pi.cols(); ++j) {
        double m = pi(row_i, j) / wi + pi(row_j, j) / wj;
        if (m > 0.0) {
            cols.push_back(static_cast<int>(j));
            balance.push_back(m);
        }
    }
    const int u = static_cast<int>(cols.size());

    // variables: m_i on admissible cells, then m_j
    std::vector<std::pair<int, int>> vars;  // (owner 0/1, position in cols)
    for (int k = 0; k < u; ++k)
        if (constraint.in_ball(x, ys[static_cast<std::size_t>(cols[static_cast<std::size_t>(k)])]))
            vars.emplace_back(0, k);
    for (int k = 0; k < u; ++k)
        if (constraint.in_ball(xp, ys[static_cast<std::size_t>(cols[static_cast<std::size_t>(k)])]))
            vars.emplace_back(1, k);

    const int n_rows = u + 1 + (martingale ? 2 * d : 0);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_rows, static_cast<Eigen::Index>(vars.size()));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n_rows);
    Eigen::VectorXd c(static_cast<Eigen::Index>(vars.size()));
    for (int k = 0; k < u; ++k) b[k] = balance[static_cast<std::size_t>(k)];
    b[u] = 1.0;  // m_i is a probability measure; m_j's mass is then implied

    for (std::size_t v = 0; v < vars.size(); ++v) {
        auto [owner, k] = vars[v];
        const Point& src = owner == 0 ? x : xp;
        const Point& y = ys[static_cast<std::size_t>(cols[static_cast<std::size_t>(k)])];
        const Eigen::Index col = static_cast<Eigen::Index>(v);
        a(k, col) = 1.0;
        if (owner == 0) a(u, col) = 1.0;
        if (martingale)
            for (int t = 0; t < d; ++t) a(u + 1 + owner * d + t, col) = y[t] - src[t];
        c[col] = cost.value(src, y);
    }

    LinearProgram lp = LinearProgram::standard(std::move(a), std::move(b), std::move(c));
    if (constraint.kind() == ConstraintKind::CapacityBound) {
        for (std::size_t v = 0; v < vars.size(); ++v) {
            auto [owner, k] = vars[v];
            int i = owner == 0 ? static_cast<int>(row_i) : static_cast<int>(row_j);
            lp.upper[static_cast<Eigen::Index>(v)] =
                constraint.cell_cap(i, cols[static_cast<std::size_t>(k)], 1.0);
        }
    }

    LpOutcome outcome = solve_lp(lp, options);
    if (outcome.status != LpStatus::Optimal)
        throw NoAdmissibleExchangeError(
            "competitor_check: exchange LP infeasible; the incumbent coupling violates its own "
            "constraint");

    double incumbent = 0.0;
    for (Eigen::Index j = 0; j < pi.cols(); ++j) {
        const Point& y = ys[static_cast<std::size_t>(j)];
        if (pi(row_i, j) > 0.0) incumbent += pi(row_i, j) / wi * cost.value(x, y);
        if (pi(row_j, j) > 0.0) incumbent += pi(row_j, j) / wj * cost.value(xp, y);
    }
    double delta = incumbent - outcome.value;
    if (delta <= kExchangeTol) return report;

    report.passes = false;
    CompetitorViolation violation;
    violation.row_i = row_i;
    violation.row_j = row_j;
    violation.improvement = delta;
    std::vector<Point> ai, aj;
    std::vector<double> mi, mj;
    for (std::size_t v = 0; v < vars.size(); ++v) {
        double mass = outcome.solution[static_cast<Eigen::Index>(v)];
        if (mass <= 1e-14) continue;
        auto [owner, k] = vars[v];
        const Point& y = ys[static_cast<std::size_t>(cols[static_cast<std::size_t>(k)])];
        if (owner == 0) {
            ai.push_back(y);
            mi.push_back(mass);
        } else {
            aj.push_back(y);
            mj.push_back(mass);
        }
    }
    violation.m_i = DiscreteMeasure(std::move(ai), std::move(mi));
    violation.m_j = DiscreteMeasure(std::move(aj), std::move(mj));
    report.competitor = std::move(violation);
    return report;
}

MonotoneReport competitor_check_all_pairs(const Coupling& coupling,
                                          const ConstraintSpec& constraint, const CostSpec& cost,
                                          const LpOptions& options) {
    MonotoneReport report;
    report.guaranteed = cost.strictly_convex_marginal();
    const Eigen::Index rows = coupling.matrix().rows();
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = i + 1; j < rows; ++j) {
            MonotoneReport pair = competitor_check(coupling, constraint, cost, i, j, options);
            if (!pair.passes) return pair;
        }
    }
    return report;
}

UniquenessReport uniqueness_probe(const DiscreteMeasure& alpha, const DiscreteMeasure& beta,
                                  const ConstraintSpec& constraint, const CostSpec& cost,
                                  const LpOptions& options) {
    if (alpha.size() != 2)
        throw DimensionMismatchError("uniqueness_probe: alpha must have exactly two atoms");

    SolveReport base = solve_primal(alpha, beta, constraint, cost, options);

    Eigen::MatrixXd c = cost.matrix(alpha.atoms(), constraint.targets());
    detail::CouplingLp clp = detail::build_coupling_lp(alpha, beta, constraint, &c);

    // fixed generic tie-breaking direction
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd tie(clp.lp.num_vars());
    for (Eigen::Index k = 0; k < tie.size(); ++k) tie[k] = unit(rng);

    // restrict to the optimal face and probe it from both ends
    LinearProgram face = clp.lp;
    face.eq_matrix.conservativeResize(face.eq_matrix.rows() + 1, Eigen::NoChange);
    face.eq_matrix.row(face.eq_matrix.rows() - 1) = clp.lp.objective.transpose();
    face.eq_rhs.conservativeResize(face.eq_rhs.size() + 1);
    face.eq_rhs[face.eq_rhs.size() - 1] = base.primal_value;

    UniquenessReport report;
    report.guaranteed = cost.strictly_convex_marginal();
    report.plan = base.coupling;
    report.max_deviation = 0.0;
    for (int dir = 0; dir < 2; ++dir) {
        face.objective = dir == 0 ? tie : Eigen::VectorXd(-tie);
        LpOptions face_options = options;
        face_options.feasibility_tol = std::max(options.feasibility_tol, 1e-8);
        LpOutcome probe = solve_lp(face, face_options);
        if (probe.status != LpStatus::Optimal)
            throw NumericalBreakdownError("uniqueness_probe: optimal face probe failed");
        Eigen::MatrixXd m = clp.solution_matrix(probe.solution);
        double dev = (m - base.coupling.matrix()).cwiseAbs().maxCoeff();
        report.max_deviation = std::max(report.max_deviation, dev);
    }
    report.unique = report.max_deviation <= 1e-8;
    return report;
}

}  // namespace cmot
