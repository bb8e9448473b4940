#pragma once

// Seeded random instance builders shared by the unit and acceptance suites.
// Feasible instances are built constructively: random admissible kernels are
// drawn per source atom and beta is their pushforward, so a witness exists by
// construction and never needs a solver to establish.

#include <algorithm>
#include <random>
#include <vector>

#include "cmot/measures.hpp"

namespace cmot::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline DiscreteMeasure random_measure(Rng& rng, int n_atoms, double lo, double hi) {
    std::vector<Point> atoms;
    std::vector<double> weights;
    for (int i = 0; i < n_atoms; ++i) {
        atoms.emplace_back(uniform(rng, lo, hi));
        weights.push_back(uniform(rng, 0.2, 1.0));
    }
    return DiscreteMeasure(std::move(atoms), std::move(weights));
}

struct BallInstance {
    DiscreteMeasure alpha;
    DiscreteMeasure beta;
    ConstraintSpec constraint;
};

/// Feasible instance: per source atom, a mixture of mean-preserving pairs
/// inside the ball (possibly plus a Dirac at the atom); beta is the
/// pushforward. Atoms stay within a few units so exp costs remain tame.
inline BallInstance random_feasible_ball_instance(Rng& rng, int max_src, int max_tgt_pairs,
                                                  bool martingale_kind = false,
                                                  bool equal_weights = false) {
    const int n_src = uniform_int(rng, 1, max_src);
    DiscreteMeasure alpha = random_measure(rng, n_src, -2.0, 2.0);
    if (equal_weights)
        alpha = DiscreteMeasure(alpha.atoms(),
                                std::vector<double>(alpha.size(), 1.0 / alpha.size()));

    std::vector<Point> radius_points = alpha.atoms();
    std::vector<double> radius_values;
    for (std::size_t i = 0; i < alpha.size(); ++i) radius_values.push_back(uniform(rng, 0.4, 2.0));

    std::vector<Point> beta_atoms;
    std::vector<double> beta_weights;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        const double x = alpha.atoms()[i].scalar();
        const double a = radius_values[i];
        const double mass = alpha.weights()[i];
        const int pairs = uniform_int(rng, 1, std::max(1, max_tgt_pairs));
        std::vector<double> pair_mass;
        double total = 0.0;
        for (int p = 0; p < pairs; ++p) {
            pair_mass.push_back(uniform(rng, 0.2, 1.0));
            total += pair_mass.back();
        }
        bool keep_atom = uniform(rng, 0.0, 1.0) < 0.3;
        double atom_mass = keep_atom ? uniform(rng, 0.2, 1.0) : 0.0;
        total += atom_mass;
        for (int p = 0; p < pairs; ++p) {
            double u = uniform(rng, 0.2, 1.0) * a;
            double v = uniform(rng, 0.2, 1.0) * a;
            double w = pair_mass[static_cast<std::size_t>(p)] / total * mass;
            beta_atoms.emplace_back(x - u);
            beta_weights.push_back(w * v / (u + v));
            beta_atoms.emplace_back(x + v);
            beta_weights.push_back(w * u / (u + v));
        }
        if (keep_atom) {
            beta_atoms.emplace_back(x);
            beta_weights.push_back(atom_mass / total * mass);
        }
    }
    DiscreteMeasure beta(beta_atoms, beta_weights);

    BallInstance instance;
    instance.alpha = std::move(alpha);
    if (martingale_kind) {
        instance.constraint = ConstraintSpec::martingale(beta.atoms());
    } else {
        instance.constraint = ConstraintSpec::martingale_ball(
            RadiusTable::table(radius_points, radius_values), beta.atoms());
    }
    instance.beta = std::move(beta);
    return instance;
}

/// Shrinks the ball radii of an instance; small factors usually make the
/// instance infeasible while keeping the same marginals.
inline BallInstance shrink_radii(const BallInstance& instance, double factor) {
    BallInstance out = instance;
    out.constraint = ConstraintSpec::martingale_ball(instance.constraint.radius().scaled(factor),
                                                     instance.constraint.targets());
    return out;
}

/// Quadratic cost with small iid cell noise: generic enough to avoid ties.
inline CostSpec perturbed_quadratic_cost(Rng& rng, const DiscreteMeasure& alpha,
                                         const std::vector<Point>& targets) {
    Eigen::MatrixXd c(alpha.size(), targets.size());
    for (Eigen::Index i = 0; i < c.rows(); ++i)
        for (Eigen::Index j = 0; j < c.cols(); ++j) {
            double z = targets[static_cast<std::size_t>(j)].scalar() -
                       alpha.atoms()[static_cast<std::size_t>(i)].scalar();
            c(i, j) = z * z + 0.01 * uniform(rng, 0.0, 1.0);
        }
    return CostSpec::table(alpha.atoms(), targets, std::move(c));
}

inline std::vector<double> random_payoff(Rng& rng, std::size_t n, double lo = -1.0,
                                         double hi = 1.0) {
    std::vector<double> f(n);
    for (double& v : f) v = uniform(rng, lo, hi);
    return f;
}

inline std::vector<double> random_convex_payoff(Rng& rng, const std::vector<Point>& ys) {
    // convex sequence on sorted 1-D points: integrate increasing slopes
    std::vector<double> slopes(ys.size());
    double s = uniform(rng, -2.0, -1.0);
    for (double& v : slopes) {
        v = s;
        s += uniform(rng, 0.01, 1.0);
    }
    std::vector<double> f(ys.size());
    f[0] = uniform(rng, -1.0, 1.0);
    for (std::size_t j = 1; j < ys.size(); ++j)
        f[j] = f[j - 1] + slopes[j - 1] * (ys[j].scalar() - ys[j - 1].scalar());
    return f;
}

}  // namespace cmot::testing
