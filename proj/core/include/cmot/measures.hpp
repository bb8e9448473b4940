#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cmot/errors.hpp"
#include "cmot/point.hpp"

namespace cmot {

/// Finitely supported probability measure on R^d. After validation the atom
/// list is sorted, duplicate atoms are merged (weights summed), zero-weight
/// atoms are dropped, and the weights sum to 1 within 1e-12.
///
/// Instances are immutable once constructed and safe to share across threads.
class DiscreteMeasure {
  public:
    DiscreteMeasure() = default;

    /// Validating constructor. Throws NegativeWeightError or
    /// AllZeroWeightsError on degenerate input.
    DiscreteMeasure(std::vector<Point> atoms, std::vector<double> weights);

    static DiscreteMeasure dirac(const Point& p) { return DiscreteMeasure({p}, {1.0}); }

    const std::vector<Point>& atoms() const { return atoms_; }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t size() const { return atoms_.size(); }
    int dim() const { return atoms_.empty() ? 1 : atoms_[0].dim(); }

    Point mean() const;

    /// Weight carried by an atom exactly equal to p; 0 if absent.
    double weight_of(const Point& p) const;

    /// Index of atom exactly equal to p, or -1.
    int index_of(const Point& p) const;

    friend bool operator==(const DiscreteMeasure& a, const DiscreteMeasure& b) {
        return a.atoms_ == b.atoms_ && a.weights_ == b.weights_;
    }

  private:
    std::vector<Point> atoms_;
    std::vector<double> weights_;
};

/// Normalizes, merges duplicate atoms, drops zero weights and sorts.
/// Idempotent: validate(validate(m)) == validate(m) exactly.
DiscreteMeasure validate(const DiscreteMeasure& m);

/// Max |w_a(p) - w_b(p)| over the union of supports.
double measure_distance(const DiscreteMeasure& a, const DiscreteMeasure& b);

/// Joint measure on source atoms x target points, stored row-major:
/// matrix(i, j) is the mass transported from source atom i to target j.
/// Row sums must equal the source weights within 1e-10.
class Coupling {
  public:
    Coupling() = default;

    /// Validating constructor; throws DimensionMismatchError or
    /// NegativeWeightError when the matrix cannot be a coupling of `source`.
    Coupling(DiscreteMeasure source, std::vector<Point> targets, Eigen::MatrixXd matrix);

    const DiscreteMeasure& source() const { return source_; }
    const std::vector<Point>& targets() const { return targets_; }
    const Eigen::MatrixXd& matrix() const { return matrix_; }

    /// Disintegration kernel at source atom i (row / row mass).
    /// Throws ZeroMassRowError when the row carries no mass.
    DiscreteMeasure kernel_row(Eigen::Index i) const;

    /// Pushforward onto the target points (the column-sum measure).
    DiscreteMeasure target_marginal() const;

    double row_mass(Eigen::Index i) const { return matrix_.row(i).sum(); }
    double total_mass() const { return matrix_.sum(); }

    static constexpr double kRowSumTol = 1e-10;

  private:
    DiscreteMeasure source_;
    std::vector<Point> targets_;
    Eigen::MatrixXd matrix_;
};

/// Mean of the row-i kernel. Throws ZeroMassRowError on a zero row.
Point barycenter_of_row(const Coupling& coupling, Eigen::Index i);

/// Ball radius a(.) evaluated on source points: either one uniform value or
/// an exact-match table keyed by point.
class RadiusTable {
  public:
    RadiusTable() = default;
    static RadiusTable uniform(double value);
    static RadiusTable table(std::vector<Point> points, std::vector<double> values);

    /// Radius at x. Table lookups require an exact point match.
    double at(const Point& x) const;
    bool is_uniform() const { return uniform_.has_value(); }
    double uniform_value() const { return *uniform_; }

    /// Scales every radius by s (used by monotonicity-in-radius tests).
    RadiusTable scaled(double s) const;

  private:
    std::optional<double> uniform_;
    std::vector<Point> points_;
    std::vector<double> values_;
};

enum class ConstraintKind { MartingaleBall, Martingale, CapacityBound, Unconstrained };

std::string to_string(ConstraintKind k);

/// Per-source-point admissible kernel set Gamma(x). A kernel at x is a
/// probability measure on the finite candidate target set Y; the kind decides
/// which kernels are admissible:
///   MartingaleBall: barycenter x, support inside the closed ball |y-x|<=a(x)
///   Martingale:     barycenter x (a == infinity)
///   CapacityBound:  q(y_j) <= bound(i,j) * reference(i,j), rows indexed by
///                   the source atoms the spec is used with
///   Unconstrained:  every kernel on Y
///
/// Restricting kernels to the finite set Y (default: the target measure's
/// support) is the central discretization choice of this library: every
/// statement it checks is an exact statement about the finite-state problem,
/// not an approximation of a continuum one.
class ConstraintSpec {
  public:
    ConstraintSpec() = default;

    static ConstraintSpec martingale_ball(RadiusTable radius, std::vector<Point> targets);
    static ConstraintSpec martingale(std::vector<Point> targets);
    static ConstraintSpec capacity_bound(Eigen::MatrixXd reference, Eigen::MatrixXd bound,
                                         std::vector<Point> targets);
    static ConstraintSpec unconstrained(std::vector<Point> targets);

    ConstraintKind kind() const { return kind_; }
    const RadiusTable& radius() const { return radius_; }
    /// Candidate targets, sorted ascending and distinct.
    const std::vector<Point>& targets() const { return targets_; }
    const Eigen::MatrixXd& reference() const { return reference_; }
    const Eigen::MatrixXd& bound() const { return bound_; }

    /// Closed-ball membership |y - x| <= a(x) with tolerance 1e-12.
    bool in_ball(const Point& x, const Point& y) const;

    /// Cell capacity alpha_weight * bound(i,j) * reference(i,j); +infinity
    /// when the bound is infinite and the reference positive.
    double cell_cap(int i, int j, double alpha_weight) const;

    /// True when the target set of this spec contains every atom of beta.
    bool covers(const DiscreteMeasure& beta) const;

    static constexpr double kBallTol = 1e-12;

  private:
    ConstraintKind kind_ = ConstraintKind::Unconstrained;
    RadiusTable radius_;
    std::vector<Point> targets_;
    Eigen::MatrixXd reference_;  // CapacityBound only
    Eigen::MatrixXd bound_;      // CapacityBound only
};

enum class CostKind { Table, Difference };
enum class DifferenceFunction { Exp, Power, Samples };

/// Pointwise cost C(x, y). Either an explicit table pinned to known source and
/// target points, or h(y - x) for a named scalar h (d = 1 only).
class CostSpec {
  public:
    CostSpec() = default;

    static CostSpec table(std::vector<Point> source_points, std::vector<Point> target_points,
                          Eigen::MatrixXd values);
    static CostSpec exp_difference();
    static CostSpec power_difference(double p);
    /// h given by exact samples at the offsets that will be needed.
    static CostSpec sampled_difference(std::vector<double> offsets, std::vector<double> values);

    CostKind kind() const { return kind_; }
    DifferenceFunction difference_function() const { return h_; }
    double power() const { return power_; }

    double value(const Point& x, const Point& y) const;

    /// Cost matrix over source_atoms x targets.
    Eigen::MatrixXd matrix(const std::vector<Point>& source_atoms,
                           const std::vector<Point>& targets) const;

    /// True when the marginal cost h' is strictly convex, which is what the
    /// left-monotonicity and two-point uniqueness guarantees require. Table
    /// costs and the shipped power/sample generators return false: results on
    /// those costs are reported as not guaranteed rather than asserted.
    bool strictly_convex_marginal() const { return kind_ == CostKind::Difference && h_ == DifferenceFunction::Exp; }

  private:
    CostKind kind_ = CostKind::Difference;
    DifferenceFunction h_ = DifferenceFunction::Exp;
    double power_ = 1.0;
    std::map<double, double> samples_;
    std::vector<Point> source_points_;  // Table
    std::vector<Point> target_points_;  // Table
    Eigen::MatrixXd values_;            // Table
};

}  // namespace cmot
