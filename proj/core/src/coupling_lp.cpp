#include "coupling_lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cmot/envelope.hpp"

namespace cmot::detail {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Eigen::MatrixXd CouplingLp::solution_matrix(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_src, n_tgt);
    for (std::size_t k = 0; k < cells.size(); ++k)
        m(cells[k].first, cells[k].second) = std::max(x[static_cast<Eigen::Index>(k)], 0.0);
    return m;
}

std::vector<double> CouplingLp::violating_function(const Eigen::VectorXd& farkas) const {
    std::vector<double> f(static_cast<std::size_t>(n_tgt));
    for (int j = 0; j < n_tgt; ++j) f[static_cast<std::size_t>(j)] = -farkas[column_row(j)];
    return f;
}

std::vector<double> CouplingLp::dual_potential(const Eigen::VectorXd& dual) const {
    std::vector<double> phi(static_cast<std::size_t>(n_tgt));
    for (int j = 0; j < n_tgt; ++j) phi[static_cast<std::size_t>(j)] = -dual[column_row(j)];
    return phi;
}

std::vector<double> beta_on_targets(const DiscreteMeasure& beta, const ConstraintSpec& constraint) {
    std::vector<double> w(constraint.targets().size(), 0.0);
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = beta.weight_of(constraint.targets()[j]);
    return w;
}

CouplingLp build_coupling_lp(const DiscreteMeasure& alpha, const DiscreteMeasure& beta,
                             const ConstraintSpec& constraint, const Eigen::MatrixXd* cost) {
    CouplingLp out;
    out.n_src = static_cast<int>(alpha.size());
    out.n_tgt = static_cast<int>(constraint.targets().size());
    out.dim = alpha.dim();
    out.barycenter_rows = constraint.kind() == ConstraintKind::Martingale ||
                          constraint.kind() == ConstraintKind::MartingaleBall;
    if (constraint.kind() == ConstraintKind::CapacityBound &&
        (constraint.reference().rows() != out.n_src ||
         constraint.reference().cols() != out.n_tgt))
        throw DimensionMismatchError("capacity: reference shape must be |alpha| x |targets|");

    out.cell_var.assign(static_cast<std::size_t>(out.n_src),
                        std::vector<int>(static_cast<std::size_t>(out.n_tgt), -1));
    std::vector<double> caps;
    for (int i = 0; i < out.n_src; ++i) {
        const Point& x = alpha.atoms()[static_cast<std::size_t>(i)];
        for (int j = 0; j < out.n_tgt; ++j) {
            const Point& y = constraint.targets()[static_cast<std::size_t>(j)];
            if (!constraint.in_ball(x, y)) continue;
            double cap = constraint.cell_cap(i, j, alpha.weights()[static_cast<std::size_t>(i)]);
            if (cap <= 0.0 && constraint.kind() == ConstraintKind::CapacityBound) continue;
            out.cell_var[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                static_cast<int>(out.cells.size());
            out.cells.emplace_back(i, j);
            caps.push_back(cap);
        }
    }

    const int n_rows = out.n_src + out.n_tgt + (out.barycenter_rows ? out.dim * out.n_src : 0);
    const Eigen::Index n_vars = static_cast<Eigen::Index>(out.cells.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_rows, n_vars);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n_rows);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n_vars);

    for (int i = 0; i < out.n_src; ++i) b[out.row_sum_row(i)] = alpha.weights()[static_cast<std::size_t>(i)];
    std::vector<double> bw = beta_on_targets(beta, constraint);
    for (int j = 0; j < out.n_tgt; ++j) b[out.column_row(j)] = bw[static_cast<std::size_t>(j)];

    for (std::size_t k = 0; k < out.cells.size(); ++k) {
        auto [i, j] = out.cells[k];
        const Eigen::Index col = static_cast<Eigen::Index>(k);
        a(out.row_sum_row(i), col) = 1.0;
        a(out.column_row(j), col) = 1.0;
        if (out.barycenter_rows) {
            const Point& x = alpha.atoms()[static_cast<std::size_t>(i)];
            const Point& y = constraint.targets()[static_cast<std::size_t>(j)];
            for (int t = 0; t < out.dim; ++t) a(out.barycenter_row(i, t), col) = y[t] - x[t];
        }
        if (cost) c[col] = (*cost)(i, j);
    }

    out.lp = LinearProgram::standard(std::move(a), std::move(b), std::move(c));
    if (constraint.kind() == ConstraintKind::CapacityBound)
        for (std::size_t k = 0; k < caps.size(); ++k)
            out.lp.upper[static_cast<Eigen::Index>(k)] = caps[k];
    return out;
}

std::optional<double> capacity_envelope(std::span<const double> f, std::span<const double> caps) {
    if (f.size() != caps.size())
        throw DimensionMismatchError("capacity envelope: f and caps lengths differ");
    std::vector<std::size_t> order(f.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
    double mass = 0.0, value = 0.0;
    for (std::size_t k : order) {
        double take = std::min(caps[k], 1.0 - mass);
        if (take <= 0.0) continue;
        value += take * f[k];
        mass += take;
        if (mass >= 1.0) return value;
    }
    if (mass >= 1.0 - 1e-12) return value;
    return std::nullopt;  // caps sum below 1: no admissible kernel
}

GapResult certificate_gap(std::span<const double> f, const DiscreteMeasure& alpha,
                          const DiscreteMeasure& beta, const ConstraintSpec& constraint) {
    GapResult out;
    double alpha_side = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        const Point& x = alpha.atoms()[i];
        double v = 0.0;
        if (constraint.kind() == ConstraintKind::CapacityBound) {
            std::vector<double> caps(f.size());
            for (std::size_t j = 0; j < f.size(); ++j)
                caps[j] = constraint.cell_cap(static_cast<int>(i), static_cast<int>(j), 1.0);
            auto env = capacity_envelope(f, caps);
            if (!env) {
                out.infinite = true;
                return out;
            }
            v = *env;
        } else {
            EnvelopeResult env = f_gamma(f, x, constraint);
            if (!env.finite) {
                out.infinite = true;
                return out;
            }
            v = env.value;
        }
        alpha_side += alpha.weights()[i] * v;
    }
    double beta_side = 0.0;
    std::vector<double> bw = beta_on_targets(beta, constraint);
    for (std::size_t j = 0; j < f.size(); ++j) beta_side += bw[j] * f[j];
    out.gap = alpha_side - beta_side;
    return out;
}

CouplingCheck verify_coupling(const Coupling& coupling, const DiscreteMeasure& alpha,
                              const DiscreteMeasure& beta, const ConstraintSpec& constraint,
                              double tol) {
    CouplingCheck out;
    const Eigen::MatrixXd& pi = coupling.matrix();
    if (coupling.targets() != constraint.targets() ||
        pi.rows() != static_cast<Eigen::Index>(alpha.size()) ||
        coupling.source().atoms() != alpha.atoms()) {
        out.ok = false;
        return out;
    }
    for (Eigen::Index i = 0; i < pi.rows(); ++i) {
        double rs = pi.row(i).sum();
        out.max_row_error =
            std::max(out.max_row_error, std::abs(rs - alpha.weights()[static_cast<std::size_t>(i)]));
    }
    std::vector<double> bw = beta_on_targets(beta, constraint);
    for (Eigen::Index j = 0; j < pi.cols(); ++j) {
        double cs = pi.col(j).sum();
        out.max_column_error =
            std::max(out.max_column_error, std::abs(cs - bw[static_cast<std::size_t>(j)]));
    }
    for (Eigen::Index i = 0; i < pi.rows(); ++i) {
        const Point& x = alpha.atoms()[static_cast<std::size_t>(i)];
        if (constraint.kind() == ConstraintKind::Martingale ||
            constraint.kind() == ConstraintKind::MartingaleBall) {
            Point residual = Point::zero(alpha.dim());
            for (Eigen::Index j = 0; j < pi.cols(); ++j) {
                const Point& y = coupling.targets()[static_cast<std::size_t>(j)];
                residual = residual + pi(i, j) * (y - x);
                if (!constraint.in_ball(x, y)) out.mass_outside_ball += pi(i, j);
            }
            out.max_barycenter_error = std::max(out.max_barycenter_error, residual.norm());
        } else if (constraint.kind() == ConstraintKind::CapacityBound) {
            for (Eigen::Index j = 0; j < pi.cols(); ++j) {
                double cap = constraint.cell_cap(static_cast<int>(i), static_cast<int>(j),
                                                 alpha.weights()[static_cast<std::size_t>(i)]);
                if (!std::isinf(cap))
                    out.max_cap_excess = std::max(out.max_cap_excess, pi(i, j) - cap);
            }
        }
    }
    out.ok = out.max_row_error <= tol && out.max_column_error <= tol &&
             out.max_barycenter_error <= tol && out.mass_outside_ball <= tol &&
             out.max_cap_excess <= tol;
    return out;
}

}  // namespace cmot::detail
