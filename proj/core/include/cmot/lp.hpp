#pragma once

#include <Eigen/Dense>

#include "cmot/errors.hpp"

namespace cmot {

struct LpOptions {
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    double pivot_tol = 1e-12;
    int max_iterations = 200000;
    int refactor_every = 64;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

/// min c'x  s.t.  A x = b,  lower <= x <= upper.
/// Lower bounds default to 0 and must be finite and nonnegative; upper bounds
/// may be +infinity. Dense storage throughout: every instance this library
/// produces is desk scale (a few hundred variables).
struct LinearProgram {
    Eigen::VectorXd objective;
    Eigen::MatrixXd eq_matrix;
    Eigen::VectorXd eq_rhs;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    static LinearProgram standard(Eigen::MatrixXd a, Eigen::VectorXd b, Eigen::VectorXd c);

    Eigen::Index num_vars() const { return eq_matrix.cols(); }
    Eigen::Index num_rows() const { return eq_matrix.rows(); }
};

/// Result of a solve. Every claim is re-verifiable by substitution:
///   Optimal:    A*solution = b within tolerance, value = objective'solution,
///               dual/reduced_costs satisfy complementary slackness;
///   Infeasible: farkas is a row multiplier vector y with
///               y'b > sup { y'A x : lower <= x <= upper },
///               which for the cone case (lower = 0, upper = +inf) is the
///               classical certificate y'A <= 0, y'b > 0.
struct LpOutcome {
    LpStatus status = LpStatus::Optimal;
    Eigen::VectorXd solution;
    double value = 0.0;
    Eigen::VectorXd dual;           // equality-row multipliers at optimality
    Eigen::VectorXd reduced_costs;  // objective - eq_matrix' * dual
    Eigen::VectorXd farkas;         // infeasibility certificate, inf-norm 1
    bool dual_degenerate = false;   // alternate optima cannot be excluded
    int iterations = 0;
};

/// Two-phase primal simplex with bounded variables. Dantzig pricing with a
/// switch to Bland's rule after 5*(rows+cols) iterations without objective
/// improvement, so termination is guaranteed. Deterministic: identical inputs
/// give bit-identical outcomes.
///
/// Pure function; concurrent solves on distinct inputs are safe.
LpOutcome solve_lp(const LinearProgram& lp, const LpOptions& options = {});

/// Re-verifies an outcome's evidence by substitution. Returns false instead
/// of throwing on any violation.
bool verify_certificate(const LinearProgram& lp, const LpOutcome& outcome, double tol = 1e-8);

}  // namespace cmot
