#include "cmot/multiperiod.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cmot/envelope.hpp"
#include "cmot/lp.hpp"
#include "coupling_lp.hpp"

namespace cmot {

void MarginalCurve::validate() const {
    if (marginals.size() < 2) throw DimensionMismatchError("curve: need at least two marginals");
    if (times.size() != marginals.size())
        throw DimensionMismatchError("curve: one time per marginal");
    if (radii.size() + 1 != marginals.size())
        throw DimensionMismatchError("curve: one radius table per interval");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (times[i] <= times[i - 1])
            throw DimensionMismatchError("curve: times must be strictly increasing");
}

DiscreteMeasure PathMeasure::marginal_at(std::size_t t) const {
    Eigen::VectorXd w(static_cast<Eigen::Index>(grids[0].size()));
    for (std::size_t k = 0; k < grids[0].size(); ++k)
        w[static_cast<Eigen::Index>(k)] = initial.weight_of(grids[0][k]);
    for (std::size_t i = 0; i < t; ++i) w = kernels[i].transpose() * w;
    std::vector<double> weights(w.data(), w.data() + w.size());
    return DiscreteMeasure(grids[t], weights);
}

MultiMarginalReport check_multimarginal(const MarginalCurve& curve, const LpOptions& options) {
    curve.validate();
    MultiMarginalReport report;
    for (std::size_t i = 0; i < curve.intervals(); ++i) {
        ConstraintSpec step =
            ConstraintSpec::martingale_ball(curve.radii[i], curve.marginals[i + 1].atoms());
        report.intervals.push_back(
            check_feasibility(curve.marginals[i], curve.marginals[i + 1], step, options));
        if (!report.intervals.back().feasible && report.feasible) {
            report.feasible = false;
            report.first_infeasible = static_cast<int>(i);
        }
    }
    return report;
}

PathMeasure paste(const std::vector<Coupling>& witnesses) {
    if (witnesses.empty()) throw DimensionMismatchError("paste: no witnesses");
    for (std::size_t i = 0; i + 1 < witnesses.size(); ++i) {
        DiscreteMeasure reached = witnesses[i].target_marginal();
        if (measure_distance(reached, witnesses[i + 1].source()) > 1e-10)
            throw MarginalMismatchError("paste: witness " + std::to_string(i) +
                                        " target marginal differs from the next source");
    }

    PathMeasure path;
    path.initial = witnesses.front().source();
    path.grids.push_back(path.initial.atoms());
    for (std::size_t i = 0; i < witnesses.size(); ++i) {
        const Coupling& w = witnesses[i];
        DiscreteMeasure reached = w.target_marginal();
        path.grids.push_back(reached.atoms());

        Eigen::MatrixXd k(static_cast<Eigen::Index>(w.source().size()),
                          static_cast<Eigen::Index>(reached.size()));
        for (Eigen::Index r = 0; r < k.rows(); ++r) {
            DiscreteMeasure kernel = w.kernel_row(r);
            for (Eigen::Index c = 0; c < k.cols(); ++c)
                k(r, c) = kernel.weight_of(reached.atoms()[static_cast<std::size_t>(c)]);
        }
        path.kernels.push_back(std::move(k));
    }
    return path;
}

bool verify_marginals(const PathMeasure& path, const MarginalCurve& curve, double tol) {
    curve.validate();
    if (curve.marginals.size() != path.grids.size()) return false;
    for (std::size_t t = 0; t < path.grids.size(); ++t)
        if (measure_distance(path.marginal_at(t), curve.marginals[t]) > tol) return false;
    return true;
}

PathCheck verify_path_constraints(const PathMeasure& path, const MarginalCurve& curve,
                                  double tol) {
    PathCheck check;
    for (std::size_t i = 0; i < path.kernels.size(); ++i) {
        const Eigen::MatrixXd& k = path.kernels[i];
        for (Eigen::Index r = 0; r < k.rows(); ++r) {
            const Point& x = path.grids[i][static_cast<std::size_t>(r)];
            double radius = curve.radii[i].at(x);
            check.max_row_sum_error = std::max(check.max_row_sum_error, std::abs(k.row(r).sum() - 1.0));
            Point residual = Point::zero(x.dim());
            for (Eigen::Index c = 0; c < k.cols(); ++c) {
                const Point& y = path.grids[i + 1][static_cast<std::size_t>(c)];
                residual = residual + k(r, c) * (y - x);
                if (distance(x, y) > radius + ConstraintSpec::kBallTol)
                    check.mass_outside_ball += k(r, c);
            }
            check.max_barycenter_error = std::max(check.max_barycenter_error, residual.norm());
        }
    }
    check.ok = check.max_row_sum_error <= tol && check.max_barycenter_error <= tol &&
               check.mass_outside_ball <= tol;
    return check;
}

namespace {

std::vector<Point> skorokhod_grid(const DiscreteMeasure& alpha, const DiscreteMeasure& beta,
                                  double step, int reach) {
    std::set<double> pts;
    for (const Point& a : alpha.atoms())
        for (int k = -reach; k <= reach; ++k) pts.insert(a.scalar() + k * step);
    for (const Point& b : beta.atoms()) pts.insert(b.scalar());
    std::vector<Point> grid;
    grid.reserve(pts.size());
    for (double v : pts) grid.emplace_back(v);
    return grid;
}

}  // namespace

FeasibilityReport skorokhod_discrete(const DiscreteMeasure& alpha, const DiscreteMeasure& beta,
                                     double sigma, int n_steps, const SkorokhodOptions& options,
                                     PathMeasure* out_path) {
    if (alpha.dim() != 1 || beta.dim() != 1)
        throw DimensionMismatchError("skorokhod: requires d = 1");
    if (sigma <= 0.0) throw SchemaViolationError("skorokhod: sigma must be positive");
    if (n_steps < 1) throw SchemaViolationError("skorokhod: need at least one step");

    const double step = std::sqrt(sigma / n_steps);
    const double bound = options.kappa * step;
    const int per_step_reach = static_cast<int>(std::ceil(options.kappa));

    std::vector<std::vector<Point>> grids;
    grids.push_back(alpha.atoms());
    std::size_t total = alpha.size();
    for (int i = 1; i <= n_steps; ++i) {
        grids.push_back(skorokhod_grid(alpha, beta, step, i * per_step_reach));
        total += grids.back().size();
        if (total > static_cast<std::size_t>(options.grid_cap))
            throw GridOverflowError("skorokhod: path grid exceeds the configured cap");
    }

    // flow variables u_i(x, y) over admissible steps |y - x| <= bound
    struct Var {
        int stage, from, to;
    };
    std::vector<Var> vars;
    std::vector<int> stage_offset(static_cast<std::size_t>(n_steps) + 1, 0);
    for (int i = 0; i < n_steps; ++i) {
        stage_offset[static_cast<std::size_t>(i)] = static_cast<int>(vars.size());
        for (std::size_t f = 0; f < grids[static_cast<std::size_t>(i)].size(); ++f)
            for (std::size_t t = 0; t < grids[static_cast<std::size_t>(i) + 1].size(); ++t)
                if (distance(grids[static_cast<std::size_t>(i)][f],
                             grids[static_cast<std::size_t>(i) + 1][t]) <=
                    bound + ConstraintSpec::kBallTol)
                    vars.push_back({i, static_cast<int>(f), static_cast<int>(t)});
    }
    stage_offset[static_cast<std::size_t>(n_steps)] = static_cast<int>(vars.size());

    // rows: mass balance + martingale per (stage, state), then the terminal marginal
    std::vector<int> mass_row_offset(static_cast<std::size_t>(n_steps), 0);
    std::vector<int> bary_row_offset(static_cast<std::size_t>(n_steps), 0);
    int n_rows = 0;
    for (int i = 0; i < n_steps; ++i) {
        mass_row_offset[static_cast<std::size_t>(i)] = n_rows;
        n_rows += static_cast<int>(grids[static_cast<std::size_t>(i)].size());
        bary_row_offset[static_cast<std::size_t>(i)] = n_rows;
        n_rows += static_cast<int>(grids[static_cast<std::size_t>(i)].size());
    }
    const int terminal_offset = n_rows;
    n_rows += static_cast<int>(grids.back().size());

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_rows, static_cast<Eigen::Index>(vars.size()));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n_rows);
    for (std::size_t f = 0; f < grids[0].size(); ++f)
        b[mass_row_offset[0] + static_cast<int>(f)] = alpha.weights()[f];
    for (std::size_t t = 0; t < grids.back().size(); ++t)
        b[terminal_offset + static_cast<int>(t)] = beta.weight_of(grids.back()[t]);

    for (std::size_t v = 0; v < vars.size(); ++v) {
        const Var& var = vars[v];
        const Eigen::Index col = static_cast<Eigen::Index>(v);
        const double from = grids[static_cast<std::size_t>(var.stage)][static_cast<std::size_t>(var.from)].scalar();
        const double to = grids[static_cast<std::size_t>(var.stage) + 1][static_cast<std::size_t>(var.to)].scalar();
        a(mass_row_offset[static_cast<std::size_t>(var.stage)] + var.from, col) += 1.0;
        a(bary_row_offset[static_cast<std::size_t>(var.stage)] + var.from, col) = to - from;
        if (var.stage + 1 < n_steps)
            a(mass_row_offset[static_cast<std::size_t>(var.stage) + 1] + var.to, col) -= 1.0;
        else
            a(terminal_offset + var.to, col) += 1.0;
    }

    LinearProgram lp = LinearProgram::standard(std::move(a), std::move(b),
                                               Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vars.size())));
    LpOutcome outcome = solve_lp(lp, options.lp);

    FeasibilityReport report;
    report.source_admissible.assign(alpha.size(), true);
    PathMeasure path;
    path.initial = alpha;
    path.grids = grids;

    if (outcome.status == LpStatus::Optimal) {
        report.feasible = true;
        // stagewise kernels; states with no incoming mass keep a Dirac kernel
        for (int i = 0; i < n_steps; ++i) {
            const auto& from_grid = grids[static_cast<std::size_t>(i)];
            const auto& to_grid = grids[static_cast<std::size_t>(i) + 1];
            Eigen::MatrixXd flow = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(from_grid.size()),
                                                         static_cast<Eigen::Index>(to_grid.size()));
            for (int v = stage_offset[static_cast<std::size_t>(i)];
                 v < stage_offset[static_cast<std::size_t>(i) + 1]; ++v)
                flow(vars[static_cast<std::size_t>(v)].from, vars[static_cast<std::size_t>(v)].to) =
                    std::max(outcome.solution[v], 0.0);
            Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(flow.rows(), flow.cols());
            for (Eigen::Index r = 0; r < flow.rows(); ++r) {
                double m = flow.row(r).sum();
                if (m > 1e-15) {
                    kernel.row(r) = flow.row(r) / m;
                } else {
                    // unreached state: stay put (grids are nested, so the
                    // state exists downstream and a Dirac step is admissible)
                    const Point& x = from_grid[static_cast<std::size_t>(r)];
                    for (Eigen::Index c = 0; c < kernel.cols(); ++c)
                        if (to_grid[static_cast<std::size_t>(c)] == x) kernel(r, c) = 1.0;
                }
            }
            path.kernels.push_back(std::move(kernel));
        }

        // induced coupling between the initial and terminal laws
        Eigen::MatrixXd transition =
            Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(grids[0].size()),
                                      static_cast<Eigen::Index>(grids[0].size()));
        for (const Eigen::MatrixXd& k : path.kernels) transition = transition * k;
        Eigen::MatrixXd joint(transition.rows(), transition.cols());
        for (Eigen::Index r = 0; r < joint.rows(); ++r)
            joint.row(r) = alpha.weights()[static_cast<std::size_t>(r)] * transition.row(r);
        report.witness = Coupling(alpha, grids.back(), joint);
        if (out_path) *out_path = std::move(path);
        return report;
    }

    // infeasible: terminal-row multipliers give the violating payoff, whose
    // gap is re-established through the backward envelope recursion
    report.feasible = false;
    ViolatingFunction vf;
    vf.values.resize(grids.back().size());
    for (std::size_t t = 0; t < grids.back().size(); ++t)
        vf.values[t] = -outcome.farkas[terminal_offset + static_cast<int>(t)];

    std::vector<RadiusTable> radii(static_cast<std::size_t>(n_steps), RadiusTable::uniform(bound));
    MultiPeriodEnvelope env =
        f_gamma_multiperiod(vf.values, radii, grids, ConstraintKind::MartingaleBall);
    double alpha_side = 0.0;
    bool infinite = false;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (!env.stages[0][i].finite) {
            infinite = true;
            break;
        }
        alpha_side += alpha.weights()[i] * env.stages[0][i].value;
    }
    double beta_side = 0.0;
    for (std::size_t t = 0; t < grids.back().size(); ++t)
        beta_side += beta.weight_of(grids.back()[t]) * vf.values[t];
    vf.gap_infinite = infinite;
    vf.gap = infinite ? std::numeric_limits<double>::infinity() : alpha_side - beta_side;
    report.certificate = std::move(vf);
    if (out_path) *out_path = std::move(path);  // grids only; no kernels exist
    return report;
}

}  // namespace cmot
