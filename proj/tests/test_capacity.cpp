#include <cmath>
#include <limits>

#include "cmot/capacity.hpp"
#include "doctest.h"
#include "support/generators.hpp"

using namespace cmot;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Feasible capacity instance built around a planted saturated plan: caps on
/// the plan's support equal its masses exactly, other cells get loose caps
/// but costs that make them unattractive. The planted plan is then the
/// unique optimizer and is geometrically extreme.
struct PlantedInstance {
    CapacityInstance instance;
    Eigen::MatrixXd planted;
};

PlantedInstance planted_capacity_instance(testing::Rng& rng, int m, int n) {
    // random source/target supports
    DiscreteMeasure alpha = testing::random_measure(rng, m, -2, 2);
    m = static_cast<int>(alpha.size());
    std::vector<Point> targets;
    while (static_cast<int>(targets.size()) < n)
        targets.emplace_back(testing::uniform(rng, -3, 3));
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    n = static_cast<int>(targets.size());

    // planted plan: each source row spreads over a random subset
    Eigen::MatrixXd plan = Eigen::MatrixXd::Zero(m, n);
    for (int i = 0; i < m; ++i) {
        int spread = std::min(n, testing::uniform_int(rng, 1, 3));
        std::vector<double> cut;
        for (int k = 0; k < spread; ++k) cut.push_back(testing::uniform(rng, 0.2, 1.0));
        double total = 0.0;
        for (double c : cut) total += c;
        std::vector<int> cols;
        while (static_cast<int>(cols.size()) < spread) {
            int j = testing::uniform_int(rng, 0, n - 1);
            if (std::find(cols.begin(), cols.end(), j) == cols.end()) cols.push_back(j);
        }
        for (int k = 0; k < spread; ++k)
            plan(i, cols[static_cast<std::size_t>(k)]) =
                alpha.weights()[static_cast<std::size_t>(i)] * cut[static_cast<std::size_t>(k)] / total;
    }
    std::vector<double> beta_weights(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) beta_weights[static_cast<std::size_t>(j)] = plan.col(j).sum();
    // beta validation drops zero columns; keep only used targets
    std::vector<Point> used_targets;
    std::vector<double> used_weights;
    std::vector<int> col_map;
    for (int j = 0; j < n; ++j) {
        if (beta_weights[static_cast<std::size_t>(j)] > 0.0) {
            used_targets.push_back(targets[static_cast<std::size_t>(j)]);
            used_weights.push_back(beta_weights[static_cast<std::size_t>(j)]);
            col_map.push_back(j);
        }
    }
    Eigen::MatrixXd used_plan(m, static_cast<Eigen::Index>(col_map.size()));
    for (std::size_t k = 0; k < col_map.size(); ++k)
        used_plan.col(static_cast<Eigen::Index>(k)) = plan.col(col_map[k]);

    PlantedInstance out;
    out.instance.alpha = alpha;
    out.instance.beta = DiscreteMeasure(used_targets, used_weights);
    const int nn = static_cast<int>(col_map.size());
    // uniform reference; bounds sized so caps equal the planted masses on the
    // support and stay loose elsewhere
    out.instance.reference = Eigen::MatrixXd::Constant(m, nn, 1.0 / nn);
    Eigen::MatrixXd bound(m, nn);
    Eigen::MatrixXd cost(m, nn);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < nn; ++j) {
            double mass = used_plan(i, j);
            double cap_scale =
                out.instance.alpha.weights()[static_cast<std::size_t>(i)] / nn;  // alpha_i * R_ij
            if (mass > 0.0) {
                bound(i, j) = mass / cap_scale;           // cap == planted mass
                cost(i, j) = testing::uniform(rng, 0, 1);  // cheap cells
            } else {
                bound(i, j) = testing::uniform(rng, 1.0, 2.0) / cap_scale * 0.5;
                cost(i, j) = 10.0 + testing::uniform(rng, 0, 1);  // dear cells
            }
        }
    }
    out.instance.bound = bound;
    out.instance.cost = CostSpec::table(alpha.atoms(), used_targets, cost);
    out.planted = used_plan;
    return out;
}

}  // namespace

TEST_SUITE_BEGIN("capacity");

TEST_CASE("infinite bounds reduce to plain transport") {
    testing::Rng rng(501);
    for (int trial = 0; trial < 10; ++trial) {
        DiscreteMeasure alpha = testing::random_measure(rng, 3, -2, 2);
        DiscreteMeasure beta = testing::random_measure(rng, 4, -3, 3);
        Eigen::MatrixXd cost_values(alpha.size(), beta.size());
        for (Eigen::Index i = 0; i < cost_values.rows(); ++i)
            for (Eigen::Index j = 0; j < cost_values.cols(); ++j)
                cost_values(i, j) = testing::uniform(rng, 0, 2);
        CostSpec cost = CostSpec::table(alpha.atoms(), beta.atoms(), cost_values);

        CapacityInstance instance;
        instance.alpha = alpha;
        instance.beta = beta;
        instance.reference =
            Eigen::MatrixXd::Constant(alpha.size(), beta.size(), 1.0 / beta.size());
        instance.bound = Eigen::MatrixXd::Constant(alpha.size(), beta.size(), kInf);
        instance.cost = cost;
        auto capped = solve_capacity(instance);

        auto plain = solve_dual(alpha, beta, ConstraintSpec::unconstrained(beta.atoms()), cost);
        CHECK(std::abs(capped.primal_value - plain.primal_value) <= 1e-9);
        CHECK(capped.gap <= 1e-7);
    }
}

TEST_CASE("tight uniform caps force the saturated product plan") {
    DiscreteMeasure alpha({Point(0.0), Point(1.0)}, {0.5, 0.5});
    DiscreteMeasure beta = alpha;
    CapacityInstance instance;
    instance.alpha = alpha;
    instance.beta = beta;
    instance.reference = Eigen::MatrixXd::Constant(2, 2, 0.5);
    instance.bound = Eigen::MatrixXd::Constant(2, 2, 1.0);  // caps 0.25 per cell
    Eigen::MatrixXd cost(2, 2);
    cost << 0.0, 1.0, 1.0, 0.0;
    instance.cost = CostSpec::table(alpha.atoms(), beta.atoms(), cost);

    auto report = solve_capacity(instance);
    for (Eigen::Index i = 0; i < 2; ++i)
        for (Eigen::Index j = 0; j < 2; ++j)
            CHECK(report.coupling.matrix()(i, j) == doctest::Approx(0.25));

    auto extremality = check_extremality(instance, report.coupling);
    CHECK(extremality.extreme);
    CHECK(extremality.saturated_cells.size() == 4);
    CHECK(extremality.interior_mass == doctest::Approx(0.0));
}

TEST_CASE("zero capacity is certified infeasible") {
    DiscreteMeasure alpha = DiscreteMeasure::dirac(Point(0.0));
    DiscreteMeasure beta({Point(-1.0), Point(1.0)}, {0.5, 0.5});
    CapacityInstance instance;
    instance.alpha = alpha;
    instance.beta = beta;
    instance.reference = Eigen::MatrixXd::Constant(1, 2, 0.5);
    instance.bound = Eigen::MatrixXd::Zero(1, 2);
    instance.cost = CostSpec::power_difference(1.0);
    CHECK_THROWS_AS(solve_capacity(instance), InfeasibleInstanceError);
    try {
        solve_capacity(instance);
    } catch (const InfeasibleInstanceError& e) {
        REQUIRE(e.report().certificate.has_value());
        CHECK(e.report().certificate->gap_infinite);
    }
}

TEST_CASE("insufficient caps yield a finite verified gap") {
    // caps sum to 0.8 < 1 on the only admissible row pattern
    DiscreteMeasure alpha = DiscreteMeasure::dirac(Point(0.0));
    DiscreteMeasure beta({Point(-1.0), Point(1.0)}, {0.5, 0.5});
    CapacityInstance instance;
    instance.alpha = alpha;
    instance.beta = beta;
    instance.reference = Eigen::MatrixXd::Constant(1, 2, 0.5);
    instance.bound = Eigen::MatrixXd::Constant(1, 2, 0.8);
    instance.cost = CostSpec::power_difference(1.0);
    try {
        solve_capacity(instance);
        FAIL("expected InfeasibleInstanceError");
    } catch (const InfeasibleInstanceError& e) {
        REQUIRE(e.report().certificate.has_value());
        CHECK(e.report().certificate->gap_infinite);  // caps sum below one: empty kernel sets
    }
}

TEST_CASE("planted saturated optimizers are geometrically extreme") {
    testing::Rng rng(509);
    int extreme_count = 0, tie_flagged = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto planted = planted_capacity_instance(rng, testing::uniform_int(rng, 2, 4),
                                                 testing::uniform_int(rng, 3, 6));
        auto report = solve_capacity(planted.instance);
        CHECK((report.coupling.matrix() - planted.planted).cwiseAbs().maxCoeff() <= 1e-8);
        auto extremality = check_extremality(planted.instance, report.coupling, 1e-9, 1e-6);
        if (extremality.extreme) {
            ++extreme_count;
        } else if (!report.unique_hint) {
            ++tie_flagged;
        }
        CHECK(report.gap <= 1e-7);
    }
    CHECK(extreme_count + tie_flagged == 100);
    CHECK(extreme_count >= 95);
}

TEST_CASE("basic solutions have few non-saturated occupied cells") {
    testing::Rng rng(521);
    for (int trial = 0; trial < 25; ++trial) {
        DiscreteMeasure alpha = testing::random_measure(rng, 3, -2, 2);
        DiscreteMeasure beta = testing::random_measure(rng, 4, -3, 3);
        const int m = static_cast<int>(alpha.size()), n = static_cast<int>(beta.size());
        CapacityInstance instance;
        instance.alpha = alpha;
        instance.beta = beta;
        instance.reference = Eigen::MatrixXd::Constant(m, n, 1.0 / n);
        // loose-ish caps: feasible but binding somewhere
        instance.bound = Eigen::MatrixXd::Constant(m, n, testing::uniform(rng, 1.5, 3.0) * n / m);
        Eigen::MatrixXd cost(m, n);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < n; ++j) cost(i, j) = testing::uniform(rng, 0, 1);
        instance.cost = CostSpec::table(alpha.atoms(), beta.atoms(), cost);
        try {
            auto report = solve_capacity(instance);
            auto extremality = check_extremality(instance, report.coupling);
            CHECK(static_cast<int>(extremality.interior_cells.size()) <= m + n - 1);
        } catch (const InfeasibleInstanceError&) {
            // acceptable: caps too tight for these marginals
        }
    }
}

TEST_CASE("midpoint of two optimizers under a tie cost is not extreme") {
    // two sources, two targets, symmetric cost 0: every feasible plan is
    // optimal; average two distinct vertices
    DiscreteMeasure alpha({Point(0.0), Point(1.0)}, {0.5, 0.5});
    DiscreteMeasure beta({Point(2.0), Point(3.0)}, {0.5, 0.5});
    CapacityInstance instance;
    instance.alpha = alpha;
    instance.beta = beta;
    instance.reference = Eigen::MatrixXd::Constant(2, 2, 0.5);
    instance.bound = Eigen::MatrixXd::Constant(2, 2, 2.0);  // caps 0.5: loose
    instance.cost = CostSpec::table(alpha.atoms(), beta.atoms(), Eigen::MatrixXd::Zero(2, 2));

    Eigen::MatrixXd v1(2, 2), v2(2, 2);
    v1 << 0.5, 0, 0, 0.5;
    v2 << 0, 0.5, 0.5, 0;
    Eigen::MatrixXd mid = 0.5 * (v1 + v2);
    auto extremality = check_extremality(instance, Coupling(alpha, beta.atoms(), mid));
    CHECK_FALSE(extremality.extreme);
    CHECK(extremality.interior_mass > 0.0);
    auto report = solve_capacity(instance);
    CHECK_FALSE(report.unique_hint);  // ties are flagged, never hidden
}

TEST_SUITE_END();
