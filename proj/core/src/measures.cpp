#include "cmot/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace cmot {

namespace {

constexpr double kNormalizationTol = 1e-12;

void normalize_in_place(std::vector<Point>& atoms, std::vector<double>& weights) {
    if (atoms.size() != weights.size())
        throw DimensionMismatchError("measure: atoms and weights differ in length");
    if (atoms.empty()) throw AllZeroWeightsError("measure: empty support");
    const int d = atoms[0].dim();
    for (const Point& p : atoms)
        if (p.dim() != d) throw DimensionMismatchError("measure: mixed point dimensions");
    for (double w : weights)
        if (w < 0.0 || !std::isfinite(w))
            throw NegativeWeightError("measure: negative or non-finite weight");

    // sort atoms (weights follow), then merge exact duplicates
    std::vector<std::size_t> order(atoms.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return atoms[a] < atoms[b]; });

    std::vector<Point> merged_atoms;
    std::vector<double> merged_weights;
    merged_atoms.reserve(atoms.size());
    merged_weights.reserve(atoms.size());
    for (std::size_t k : order) {
        if (!merged_atoms.empty() && merged_atoms.back() == atoms[k]) {
            merged_weights.back() += weights[k];
        } else {
            merged_atoms.push_back(atoms[k]);
            merged_weights.push_back(weights[k]);
        }
    }

    // drop zero-weight atoms
    std::vector<Point> out_atoms;
    std::vector<double> out_weights;
    for (std::size_t i = 0; i < merged_atoms.size(); ++i) {
        if (merged_weights[i] > 0.0) {
            out_atoms.push_back(merged_atoms[i]);
            out_weights.push_back(merged_weights[i]);
        }
    }
    if (out_atoms.empty()) throw AllZeroWeightsError("measure: all weights are zero");

    // renormalize only when needed so validation is exactly idempotent
    double sum = std::accumulate(out_weights.begin(), out_weights.end(), 0.0);
    if (std::abs(sum - 1.0) > kNormalizationTol) {
        for (double& w : out_weights) w /= sum;
    }
    atoms = std::move(out_atoms);
    weights = std::move(out_weights);
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<Point> atoms, std::vector<double> weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
    normalize_in_place(atoms_, weights_);
}

Point DiscreteMeasure::mean() const {
    Point m = Point::zero(dim());
    for (std::size_t i = 0; i < atoms_.size(); ++i) m = m + weights_[i] * atoms_[i];
    return m;
}

double DiscreteMeasure::weight_of(const Point& p) const {
    int i = index_of(p);
    return i < 0 ? 0.0 : weights_[static_cast<std::size_t>(i)];
}

int DiscreteMeasure::index_of(const Point& p) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), p);
    if (it != atoms_.end() && *it == p) return static_cast<int>(it - atoms_.begin());
    return -1;
}

DiscreteMeasure validate(const DiscreteMeasure& m) {
    return DiscreteMeasure(m.atoms(), m.weights());
}

double measure_distance(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d = std::max(d, std::abs(a.weights()[i] - b.weight_of(a.atoms()[i])));
    for (std::size_t i = 0; i < b.size(); ++i)
        d = std::max(d, std::abs(b.weights()[i] - a.weight_of(b.atoms()[i])));
    return d;
}

Coupling::Coupling(DiscreteMeasure source, std::vector<Point> targets, Eigen::MatrixXd matrix)
    : source_(std::move(source)), targets_(std::move(targets)), matrix_(std::move(matrix)) {
    if (matrix_.rows() != static_cast<Eigen::Index>(source_.size()) ||
        matrix_.cols() != static_cast<Eigen::Index>(targets_.size()))
        throw DimensionMismatchError("coupling: matrix shape does not match source/targets");
    for (std::size_t j = 1; j < targets_.size(); ++j)
        if (!(targets_[j - 1] < targets_[j]))
            throw DimensionMismatchError("coupling: targets must be sorted and distinct");
    for (Eigen::Index i = 0; i < matrix_.rows(); ++i) {
        for (Eigen::Index j = 0; j < matrix_.cols(); ++j) {
            double v = matrix_(i, j);
            if (!std::isfinite(v) || v < -1e-12)
                throw NegativeWeightError("coupling: negative entry");
            if (v < 0.0) matrix_(i, j) = 0.0;  // clamp solver noise
        }
        double rs = matrix_.row(i).sum();
        if (std::abs(rs - source_.weights()[static_cast<std::size_t>(i)]) > kRowSumTol) {
            std::ostringstream os;
            os << "coupling: row " << i << " sums to " << rs << ", expected "
               << source_.weights()[static_cast<std::size_t>(i)];
            throw DimensionMismatchError(os.str());
        }
    }
}

DiscreteMeasure Coupling::kernel_row(Eigen::Index i) const {
    double mass = row_mass(i);
    if (mass <= 0.0) throw ZeroMassRowError("coupling: zero-mass row");
    std::vector<Point> atoms;
    std::vector<double> weights;
    for (Eigen::Index j = 0; j < matrix_.cols(); ++j) {
        if (matrix_(i, j) > 0.0) {
            atoms.push_back(targets_[static_cast<std::size_t>(j)]);
            weights.push_back(matrix_(i, j) / mass);
        }
    }
    return DiscreteMeasure(std::move(atoms), std::move(weights));
}

DiscreteMeasure Coupling::target_marginal() const {
    std::vector<Point> atoms;
    std::vector<double> weights;
    for (Eigen::Index j = 0; j < matrix_.cols(); ++j) {
        double c = matrix_.col(j).sum();
        if (c > 0.0) {
            atoms.push_back(targets_[static_cast<std::size_t>(j)]);
            weights.push_back(c);
        }
    }
    return DiscreteMeasure(std::move(atoms), std::move(weights));
}

Point barycenter_of_row(const Coupling& coupling, Eigen::Index i) {
    double mass = coupling.row_mass(i);
    if (mass <= 0.0) throw ZeroMassRowError("barycenter_of_row: zero-mass row");
    Point m = Point::zero(coupling.source().dim());
    for (Eigen::Index j = 0; j < coupling.matrix().cols(); ++j)
        m = m + (coupling.matrix()(i, j) / mass) * coupling.targets()[static_cast<std::size_t>(j)];
    return m;
}

RadiusTable RadiusTable::uniform(double value) {
    if (value < 0.0 || std::isnan(value))
        throw NegativeWeightError("radius: must be nonnegative");
    RadiusTable r;
    r.uniform_ = value;
    return r;
}

RadiusTable RadiusTable::table(std::vector<Point> points, std::vector<double> values) {
    if (points.size() != values.size() || points.empty())
        throw DimensionMismatchError("radius table: points/values mismatch");
    for (double v : values)
        if (v < 0.0 || std::isnan(v)) throw NegativeWeightError("radius: must be nonnegative");
    RadiusTable r;
    r.points_ = std::move(points);
    r.values_ = std::move(values);
    return r;
}

double RadiusTable::at(const Point& x) const {
    if (uniform_) return *uniform_;
    for (std::size_t i = 0; i < points_.size(); ++i)
        if (points_[i] == x) return values_[i];
    std::ostringstream os;
    os << "radius table: no entry for point " << x;
    throw SchemaViolationError(os.str());
}

RadiusTable RadiusTable::scaled(double s) const {
    RadiusTable r = *this;
    if (r.uniform_) {
        *r.uniform_ *= s;
    } else {
        for (double& v : r.values_) v *= s;
    }
    return r;
}

namespace {

std::vector<Point> sorted_targets(std::vector<Point> targets) {
    if (targets.empty())
        throw DimensionMismatchError("constraint: candidate targets must be nonempty");
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    return targets;
}

}  // namespace

std::string to_string(ConstraintKind k) {
    switch (k) {
        case ConstraintKind::MartingaleBall: return "martingale_ball";
        case ConstraintKind::Martingale: return "martingale";
        case ConstraintKind::CapacityBound: return "capacity";
        case ConstraintKind::Unconstrained: return "unconstrained";
    }
    return "unknown";
}

ConstraintSpec ConstraintSpec::martingale_ball(RadiusTable radius, std::vector<Point> targets) {
    ConstraintSpec s;
    s.kind_ = ConstraintKind::MartingaleBall;
    s.radius_ = std::move(radius);
    s.targets_ = sorted_targets(std::move(targets));
    return s;
}

ConstraintSpec ConstraintSpec::martingale(std::vector<Point> targets) {
    ConstraintSpec s;
    s.kind_ = ConstraintKind::Martingale;
    s.radius_ = RadiusTable::uniform(std::numeric_limits<double>::infinity());
    s.targets_ = sorted_targets(std::move(targets));
    return s;
}

ConstraintSpec ConstraintSpec::capacity_bound(Eigen::MatrixXd reference, Eigen::MatrixXd bound,
                                              std::vector<Point> targets) {
    ConstraintSpec s;
    s.kind_ = ConstraintKind::CapacityBound;
    s.targets_ = sorted_targets(std::move(targets));
    if (reference.rows() != bound.rows() || reference.cols() != bound.cols())
        throw DimensionMismatchError("capacity: reference and bound shapes differ");
    if (reference.cols() != static_cast<Eigen::Index>(s.targets_.size()))
        throw DimensionMismatchError("capacity: columns must match candidate targets");
    for (Eigen::Index i = 0; i < reference.rows(); ++i) {
        double rs = reference.row(i).sum();
        if (std::abs(rs - 1.0) > 1e-9)
            throw DimensionMismatchError("capacity: reference rows must be probability vectors");
        for (Eigen::Index j = 0; j < reference.cols(); ++j) {
            if (reference(i, j) < 0.0)
                throw NegativeWeightError("capacity: negative reference entry");
            if (bound(i, j) < 0.0 || std::isnan(bound(i, j)))
                throw NegativeWeightError("capacity: bound must be nonnegative");
        }
    }
    s.reference_ = std::move(reference);
    s.bound_ = std::move(bound);
    return s;
}

ConstraintSpec ConstraintSpec::unconstrained(std::vector<Point> targets) {
    ConstraintSpec s;
    s.kind_ = ConstraintKind::Unconstrained;
    s.targets_ = sorted_targets(std::move(targets));
    return s;
}

bool ConstraintSpec::in_ball(const Point& x, const Point& y) const {
    if (kind_ == ConstraintKind::Martingale || kind_ == ConstraintKind::Unconstrained) return true;
    if (kind_ == ConstraintKind::CapacityBound) return true;  // caps handled per cell
    return distance(x, y) <= radius_.at(x) + kBallTol;
}

double ConstraintSpec::cell_cap(int i, int j, double alpha_weight) const {
    if (kind_ != ConstraintKind::CapacityBound) return std::numeric_limits<double>::infinity();
    double r = reference_(i, j);
    double a = bound_(i, j);
    if (r <= 0.0) return 0.0;  // kernels must be absolutely continuous w.r.t. the reference
    if (std::isinf(a)) return std::numeric_limits<double>::infinity();
    return alpha_weight * a * r;
}

bool ConstraintSpec::covers(const DiscreteMeasure& beta) const {
    for (const Point& p : beta.atoms())
        if (!std::binary_search(targets_.begin(), targets_.end(), p)) return false;
    return true;
}

CostSpec CostSpec::table(std::vector<Point> source_points, std::vector<Point> target_points,
                         Eigen::MatrixXd values) {
    CostSpec c;
    c.kind_ = CostKind::Table;
    if (values.rows() != static_cast<Eigen::Index>(source_points.size()) ||
        values.cols() != static_cast<Eigen::Index>(target_points.size()))
        throw DimensionMismatchError("cost table: shape mismatch");
    if (!values.allFinite()) throw DimensionMismatchError("cost table: non-finite value");
    c.source_points_ = std::move(source_points);
    c.target_points_ = std::move(target_points);
    c.values_ = std::move(values);
    return c;
}

CostSpec CostSpec::exp_difference() {
    CostSpec c;
    c.kind_ = CostKind::Difference;
    c.h_ = DifferenceFunction::Exp;
    return c;
}

CostSpec CostSpec::power_difference(double p) {
    CostSpec c;
    c.kind_ = CostKind::Difference;
    c.h_ = DifferenceFunction::Power;
    c.power_ = p;
    return c;
}

CostSpec CostSpec::sampled_difference(std::vector<double> offsets, std::vector<double> values) {
    if (offsets.size() != values.size())
        throw DimensionMismatchError("sampled cost: offsets/values mismatch");
    CostSpec c;
    c.kind_ = CostKind::Difference;
    c.h_ = DifferenceFunction::Samples;
    for (std::size_t i = 0; i < offsets.size(); ++i) c.samples_[offsets[i]] = values[i];
    return c;
}

double CostSpec::value(const Point& x, const Point& y) const {
    if (kind_ == CostKind::Table) {
        int i = -1, j = -1;
        for (std::size_t k = 0; k < source_points_.size(); ++k)
            if (source_points_[k] == x) i = static_cast<int>(k);
        for (std::size_t k = 0; k < target_points_.size(); ++k)
            if (target_points_[k] == y) j = static_cast<int>(k);
        if (i < 0 || j < 0) throw DimensionMismatchError("cost table: point not in table");
        return values_(i, j);
    }
    if (x.dim() != 1 || y.dim() != 1)
        throw DimensionMismatchError("difference cost: requires d = 1");
    double z = y.scalar() - x.scalar();
    switch (h_) {
        case DifferenceFunction::Exp: return std::exp(z);
        case DifferenceFunction::Power: return std::pow(std::abs(z), power_);
        case DifferenceFunction::Samples: {
            auto it = samples_.find(z);
            if (it == samples_.end()) {
                std::ostringstream os;
                os << "sampled cost: no sample at offset " << z;
                throw SchemaViolationError(os.str());
            }
            return it->second;
        }
    }
    return 0.0;
}

Eigen::MatrixXd CostSpec::matrix(const std::vector<Point>& source_atoms,
                                 const std::vector<Point>& targets) const {
    Eigen::MatrixXd m(source_atoms.size(), targets.size());
    for (std::size_t i = 0; i < source_atoms.size(); ++i)
        for (std::size_t j = 0; j < targets.size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                value(source_atoms[i], targets[j]);
    if (!m.allFinite()) throw DimensionMismatchError("cost: non-finite value");
    return m;
}

}  // namespace cmot
