#include "cmot/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace cmot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarState { Basic, AtLower, AtUpper };

/// Working state of the bounded-variable simplex over the extended system
/// [A | signed artificials]. Artificial j has column sign(residual_j) * e_j,
/// so the initial basis matrix is its own inverse.
class Simplex {
  public:
    Simplex(const LinearProgram& lp, const LpOptions& opt)
        : lp_(lp), opt_(opt), m_(lp.num_rows()), n_(lp.num_vars()) {
        cols_ = n_ + m_;
        lower_.resize(cols_);
        upper_.resize(cols_);
        lower_.head(n_) = lp.lower;
        upper_.head(n_) = lp.upper;
        lower_.tail(m_).setZero();
        upper_.tail(m_).setConstant(kInf);
        x_.resize(cols_);
        state_.assign(static_cast<std::size_t>(cols_), VarState::AtLower);

        for (Eigen::Index j = 0; j < n_; ++j) {
            if (!std::isfinite(lower_[j]) || lower_[j] < 0.0)
                throw DimensionMismatchError("lp: lower bounds must be finite and nonnegative");
            if (upper_[j] < lower_[j])
                throw DimensionMismatchError("lp: upper bound below lower bound");
            x_[j] = lower_[j];
        }

        Eigen::VectorXd residual = lp.eq_rhs;
        for (Eigen::Index j = 0; j < n_; ++j)
            if (x_[j] != 0.0) residual -= lp.eq_matrix.col(j) * x_[j];

        art_sign_.resize(m_);
        basis_.resize(static_cast<std::size_t>(m_));
        for (Eigen::Index i = 0; i < m_; ++i) {
            art_sign_[i] = residual[i] >= 0.0 ? 1.0 : -1.0;
            basis_[static_cast<std::size_t>(i)] = n_ + i;
            state_[static_cast<std::size_t>(n_ + i)] = VarState::Basic;
            x_[n_ + i] = std::abs(residual[i]);
        }
        binv_ = Eigen::MatrixXd::Zero(m_, m_);
        for (Eigen::Index i = 0; i < m_; ++i) binv_(i, i) = art_sign_[i];
    }

    /// Runs phase 1 then phase 2. Fills outcome.
    LpOutcome run() {
        LpOutcome out;

        Eigen::VectorXd phase1_cost = Eigen::VectorXd::Zero(cols_);
        phase1_cost.tail(m_).setConstant(1.0);
        LpStatus st = optimize(phase1_cost);
        if (st == LpStatus::Unbounded)
            throw NumericalBreakdownError("lp: phase 1 reported unbounded");
        refactorize(phase1_cost);
        double infeas = objective_value(phase1_cost);
        if (infeas > opt_.feasibility_tol) {
            out.status = LpStatus::Infeasible;
            Eigen::VectorXd y = dual_vector(phase1_cost);
            double scale = y.lpNorm<Eigen::Infinity>();
            out.farkas = scale > 0.0 ? Eigen::VectorXd(y / scale) : y;
            out.iterations = iterations_;
            return out;
        }
        drive_out_artificials();
        // pin artificials at zero for phase 2
        for (Eigen::Index j = n_; j < cols_; ++j) upper_[j] = 0.0;

        Eigen::VectorXd phase2_cost = Eigen::VectorXd::Zero(cols_);
        phase2_cost.head(n_) = lp_.objective;
        st = optimize(phase2_cost);
        if (st == LpStatus::Unbounded) {
            out.status = LpStatus::Unbounded;
            out.iterations = iterations_;
            return out;
        }
        refactorize(phase2_cost);

        out.status = LpStatus::Optimal;
        out.solution = x_.head(n_);
        for (Eigen::Index j = 0; j < n_; ++j)
            out.solution[j] = std::min(std::max(out.solution[j], lower_[j]), upper_[j]);
        out.value = lp_.objective.dot(out.solution);
        out.dual = dual_vector(phase2_cost);
        out.reduced_costs = lp_.objective - lp_.eq_matrix.transpose() * out.dual;
        out.iterations = iterations_;
        for (Eigen::Index j = 0; j < n_; ++j) {
            if (state_[static_cast<std::size_t>(j)] == VarState::Basic) continue;
            if (upper_[j] - lower_[j] <= opt_.pivot_tol) continue;
            if (std::abs(out.reduced_costs[j]) <= opt_.optimality_tol) {
                out.dual_degenerate = true;
                break;
            }
        }
        return out;
    }

  private:
    Eigen::VectorXd column(Eigen::Index j) const {
        if (j < n_) return lp_.eq_matrix.col(j);
        Eigen::VectorXd e = Eigen::VectorXd::Zero(m_);
        e[j - n_] = art_sign_[j - n_];
        return e;
    }

    double objective_value(const Eigen::VectorXd& cost) const {
        double v = 0.0;
        for (Eigen::Index j = 0; j < cols_; ++j) v += cost[j] * x_[j];
        return v;
    }

    Eigen::VectorXd dual_vector(const Eigen::VectorXd& cost) const {
        Eigen::VectorXd cb(m_);
        for (Eigen::Index i = 0; i < m_; ++i) cb[i] = cost[basis_[static_cast<std::size_t>(i)]];
        return binv_.transpose() * cb;
    }

    void refactorize(const Eigen::VectorXd& cost) {
        (void)cost;
        Eigen::MatrixXd b(m_, m_);
        for (Eigen::Index i = 0; i < m_; ++i) b.col(i) = column(basis_[static_cast<std::size_t>(i)]);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
        if (!lu.isInvertible())
            throw NumericalBreakdownError("lp: singular basis during refactorization");
        binv_ = lu.inverse();
        // recompute basic values from scratch to control drift
        Eigen::VectorXd r = lp_.eq_rhs;
        for (Eigen::Index j = 0; j < cols_; ++j) {
            if (state_[static_cast<std::size_t>(j)] == VarState::Basic) continue;
            if (x_[j] != 0.0) r -= column(j) * x_[j];
        }
        Eigen::VectorXd xb = binv_ * r;
        for (Eigen::Index i = 0; i < m_; ++i) x_[basis_[static_cast<std::size_t>(i)]] = xb[i];
    }

    /// One simplex phase for the given extended cost vector.
    LpStatus optimize(const Eigen::VectorXd& cost) {
        bool bland = false;
        int stalled = 0;
        const int bland_after = 5 * static_cast<int>(m_ + cols_);
        double last_obj = objective_value(cost);
        int since_refactor = 0;

        while (true) {
            if (iterations_++ > opt_.max_iterations)
                throw NumericalBreakdownError("lp: iteration limit exceeded");
            if (++since_refactor >= opt_.refactor_every) {
                refactorize(cost);
                since_refactor = 0;
            }

            Eigen::VectorXd y = dual_vector(cost);

            // pricing
            Eigen::Index entering = -1;
            int enter_dir = +1;  // +1: leave lower bound, -1: leave upper bound
            double best_score = opt_.optimality_tol;
            for (Eigen::Index j = 0; j < cols_; ++j) {
                VarState s = state_[static_cast<std::size_t>(j)];
                if (s == VarState::Basic) continue;
                if (upper_[j] - lower_[j] <= 0.0) continue;  // pinned
                double rc = cost[j] - y.dot(column(j));
                double score = 0.0;
                int dir = 0;
                if (s == VarState::AtLower && rc < -opt_.optimality_tol) {
                    score = -rc;
                    dir = +1;
                } else if (s == VarState::AtUpper && rc > opt_.optimality_tol) {
                    score = rc;
                    dir = -1;
                } else {
                    continue;
                }
                if (bland) {  // first eligible index
                    entering = j;
                    enter_dir = dir;
                    break;
                }
                if (score > best_score) {
                    best_score = score;
                    entering = j;
                    enter_dir = dir;
                }
            }
            if (entering < 0) return LpStatus::Optimal;

            Eigen::VectorXd d = binv_ * column(entering);
            Eigen::VectorXd w = enter_dir > 0 ? d : Eigen::VectorXd(-d);

            // ratio test: entering moves by t >= 0, basic values move by -t*w
            double t_max = upper_[entering] - lower_[entering];
            Eigen::Index leave_row = -1;
            bool leave_at_upper = false;
            double best_pivot = 0.0;
            for (Eigen::Index i = 0; i < m_; ++i) {
                Eigen::Index k = basis_[static_cast<std::size_t>(i)];
                double xi = x_[k];
                double limit = kInf;
                bool hits_upper = false;
                if (w[i] > opt_.pivot_tol) {
                    limit = (xi - lower_[k]) / w[i];
                } else if (w[i] < -opt_.pivot_tol) {
                    if (std::isinf(upper_[k])) continue;
                    limit = (upper_[k] - xi) / (-w[i]);
                    hits_upper = true;
                } else {
                    continue;
                }
                if (limit < -0.0) limit = 0.0;
                bool better = false;
                if (limit < t_max - 1e-15) {
                    better = true;
                } else if (limit <= t_max + 1e-15 && leave_row >= 0) {
                    // tie-break: larger pivot magnitude, then lower variable index
                    double mag = std::abs(w[i]);
                    if (bland) {
                        better = k < basis_[static_cast<std::size_t>(leave_row)];
                    } else if (mag > best_pivot + 1e-15) {
                        better = true;
                    } else if (mag >= best_pivot - 1e-15) {
                        better = k < basis_[static_cast<std::size_t>(leave_row)];
                    }
                } else if (limit <= t_max + 1e-15 && leave_row < 0 && limit < t_max) {
                    better = true;
                }
                if (better) {
                    t_max = std::min(limit, t_max);
                    leave_row = i;
                    leave_at_upper = hits_upper;
                    best_pivot = std::abs(w[i]);
                }
            }

            if (std::isinf(t_max)) return LpStatus::Unbounded;
            double t = std::max(t_max, 0.0);

            // apply the move
            for (Eigen::Index i = 0; i < m_; ++i) x_[basis_[static_cast<std::size_t>(i)]] -= t * w[i];
            if (enter_dir > 0)
                x_[entering] = lower_[entering] + t;
            else
                x_[entering] = upper_[entering] - t;

            if (leave_row < 0) {
                // bound flip, basis unchanged
                state_[static_cast<std::size_t>(entering)] =
                    enter_dir > 0 ? VarState::AtUpper : VarState::AtLower;
            } else {
                Eigen::Index leaving = basis_[static_cast<std::size_t>(leave_row)];
                if (std::abs(d[leave_row]) < opt_.pivot_tol) {
                    refactorize(cost);
                    since_refactor = 0;
                    d = binv_ * column(entering);
                    if (std::abs(d[leave_row]) < opt_.pivot_tol)
                        throw NumericalBreakdownError("lp: pivot below tolerance");
                }
                x_[leaving] = leave_at_upper ? upper_[leaving] : lower_[leaving];
                state_[static_cast<std::size_t>(leaving)] =
                    leave_at_upper ? VarState::AtUpper : VarState::AtLower;
                state_[static_cast<std::size_t>(entering)] = VarState::Basic;
                basis_[static_cast<std::size_t>(leave_row)] = entering;
                update_binv(d, leave_row);
                x_[entering] = enter_dir > 0 ? lower_[entering] + t : upper_[entering] - t;
            }

            double obj = objective_value(cost);
            if (obj < last_obj - 1e-12 * (1.0 + std::abs(last_obj))) {
                stalled = 0;
            } else if (++stalled > bland_after) {
                bland = true;
            }
            last_obj = obj;
        }
    }

    /// Product-form update: make binv the inverse of the basis with the
    /// pivot column replacing row `r`'s variable. d = binv * entering column.
    void update_binv(const Eigen::VectorXd& d, Eigen::Index r) {
        double piv = d[r];
        Eigen::RowVectorXd pivot_row = binv_.row(r) / piv;
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (i == r) continue;
            if (d[i] != 0.0) binv_.row(i) -= d[i] * pivot_row;
        }
        binv_.row(r) = pivot_row;
    }

    /// After a feasible phase 1, pivot artificials out of the basis where
    /// possible; rows where no structural column has a nonzero tableau entry
    /// are redundant and keep their artificial basic at zero.
    void drive_out_artificials() {
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (basis_[static_cast<std::size_t>(i)] < n_) continue;
            Eigen::RowVectorXd row = binv_.row(i) * lp_.eq_matrix;
            Eigen::Index pick = -1;
            double best = opt_.pivot_tol * 10.0;
            for (Eigen::Index j = 0; j < n_; ++j) {
                if (state_[static_cast<std::size_t>(j)] == VarState::Basic) continue;
                if (std::abs(row[j]) > best) {
                    best = std::abs(row[j]);
                    pick = j;
                }
            }
            if (pick < 0) {
                x_[basis_[static_cast<std::size_t>(i)]] = 0.0;
                continue;  // redundant row
            }
            Eigen::VectorXd d = binv_ * column(pick);
            Eigen::Index leaving = basis_[static_cast<std::size_t>(i)];
            state_[static_cast<std::size_t>(leaving)] = VarState::AtLower;
            x_[leaving] = 0.0;
            state_[static_cast<std::size_t>(pick)] = VarState::Basic;
            basis_[static_cast<std::size_t>(i)] = pick;
            update_binv(d, i);
            // degenerate pivot: entering keeps its current value
        }
    }

    const LinearProgram& lp_;
    LpOptions opt_;
    Eigen::Index m_, n_, cols_;
    Eigen::VectorXd lower_, upper_, x_, art_sign_;
    std::vector<VarState> state_;
    std::vector<Eigen::Index> basis_;
    Eigen::MatrixXd binv_;
    int iterations_ = 0;
};

}  // namespace

LinearProgram LinearProgram::standard(Eigen::MatrixXd a, Eigen::VectorXd b, Eigen::VectorXd c) {
    LinearProgram lp;
    lp.eq_matrix = std::move(a);
    lp.eq_rhs = std::move(b);
    lp.objective = std::move(c);
    lp.lower = Eigen::VectorXd::Zero(lp.eq_matrix.cols());
    lp.upper = Eigen::VectorXd::Constant(lp.eq_matrix.cols(), kInf);
    return lp;
}

LpOutcome solve_lp(const LinearProgram& lp, const LpOptions& options) {
    if (lp.eq_matrix.rows() != lp.eq_rhs.size() || lp.eq_matrix.cols() != lp.objective.size() ||
        lp.lower.size() != lp.objective.size() || lp.upper.size() != lp.objective.size())
        throw DimensionMismatchError("lp: inconsistent dimensions");
    if (!lp.eq_rhs.allFinite()) throw DimensionMismatchError("lp: rhs must be finite");
    Simplex s(lp, options);
    return s.run();
}

bool verify_certificate(const LinearProgram& lp, const LpOutcome& outcome, double tol) {
    const Eigen::Index n = lp.num_vars();
    if (outcome.status == LpStatus::Unbounded) return true;  // nothing claimed

    if (outcome.status == LpStatus::Optimal) {
        if (outcome.solution.size() != n) return false;
        double scale_b = 1.0 + lp.eq_rhs.lpNorm<Eigen::Infinity>();
        Eigen::VectorXd residual = lp.eq_matrix * outcome.solution - lp.eq_rhs;
        if (residual.lpNorm<Eigen::Infinity>() > tol * scale_b) return false;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (outcome.solution[j] < lp.lower[j] - tol) return false;
            if (outcome.solution[j] > lp.upper[j] + tol) return false;
        }
        double v = lp.objective.dot(outcome.solution);
        if (std::abs(v - outcome.value) > tol * (1.0 + std::abs(outcome.value))) return false;
        if (outcome.dual.size() == lp.num_rows()) {
            // dual value with bound contributions must meet the primal value
            Eigen::VectorXd rc = lp.objective - lp.eq_matrix.transpose() * outcome.dual;
            double dual_value = outcome.dual.dot(lp.eq_rhs);
            for (Eigen::Index j = 0; j < n; ++j) {
                if (rc[j] > tol) {
                    dual_value += rc[j] * lp.lower[j];
                } else if (rc[j] < -tol) {
                    if (std::isinf(lp.upper[j])) return false;  // dual infeasible
                    dual_value += rc[j] * lp.upper[j];
                }
            }
            double scale_v = 1.0 + std::abs(outcome.value);
            if (std::abs(dual_value - outcome.value) > 100 * tol * scale_v) return false;
        }
        return true;
    }

    // Infeasible: y'b must exceed sup over the box of y'Ax
    if (outcome.farkas.size() != lp.num_rows()) return false;
    double norm = outcome.farkas.lpNorm<Eigen::Infinity>();
    if (norm <= 0.0) return false;
    Eigen::VectorXd y = outcome.farkas / norm;
    Eigen::VectorXd yta = lp.eq_matrix.transpose() * y;
    double sup = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (yta[j] > tol) {
            if (std::isinf(lp.upper[j])) return false;
            sup += yta[j] * lp.upper[j];
        } else if (yta[j] < 0.0) {
            sup += yta[j] * lp.lower[j];
        }
    }
    double scale_b = 1.0 + lp.eq_rhs.lpNorm<Eigen::Infinity>();
    return y.dot(lp.eq_rhs) - sup > tol * scale_b;
}

}  // namespace cmot
