#include <cmath>

#include "cmot/monotone.hpp"
#include "cmot/transport.hpp"
#include "doctest.h"
#include "support/generators.hpp"

using namespace cmot;

namespace {

DiscreteMeasure two_point_alpha() {
    return DiscreteMeasure({Point(0.0), Point(5.0)}, {0.5, 0.5});
}
DiscreteMeasure two_point_beta() {
    return DiscreteMeasure({Point(-2.0), Point(0.0), Point(2.0), Point(10.0)},
                           {0.25, 0.25, 0.25, 0.25});
}
Coupling straddle_plan() {
    Eigen::MatrixXd pi(2, 4);
    pi << 0.25, 0, 0.25, 0, 0, 0.25, 0, 0.25;
    return Coupling(two_point_alpha(), two_point_beta().atoms(), pi);
}

}  // namespace

TEST_SUITE_BEGIN("monotone");

TEST_CASE("the straddling plan is left monotone under radius six") {
    auto report = check_gamma_left_monotone(straddle_plan(), RadiusTable::uniform(6.0));
    CHECK(report.passes);
}

TEST_CASE("a genuinely crossing plan is caught with its triple") {
    // x = 0 splits to -1/+1; x = 1 sends mass to 0 inside both balls
    DiscreteMeasure alpha({Point(0.0), Point(1.0)}, {0.5, 0.5});
    std::vector<Point> targets{Point(-1.0), Point(0.0), Point(1.0), Point(2.0)};
    Eigen::MatrixXd pi(2, 4);
    pi << 0.25, 0, 0.25, 0, 0, 0.25, 0, 0.25;
    Coupling plan(alpha, targets, pi);
    auto report = check_gamma_left_monotone(plan, RadiusTable::uniform(3.0));
    REQUIRE_FALSE(report.passes);
    REQUIRE(report.triple.has_value());
    CHECK(report.triple->x == 0.0);
    CHECK(report.triple->x_prime == 1.0);
    CHECK(report.triple->y_minus == -1.0);
    CHECK(report.triple->y_prime == 0.0);
    CHECK(report.triple->y_plus == 1.0);

    SUBCASE("shrinking the right ball removes the violation") {
        // |y- - x'| = 2 > a(x') kills the forbidden configuration
        auto tight = check_gamma_left_monotone(plan, RadiusTable::uniform(1.0));
        CHECK(tight.passes);
    }
}

TEST_CASE("single-target rows pass vacuously") {
    DiscreteMeasure alpha({Point(0.0), Point(1.0)}, {0.5, 0.5});
    std::vector<Point> targets{Point(0.0), Point(1.0)};
    Eigen::MatrixXd pi(2, 2);
    pi << 0.5, 0, 0, 0.5;
    auto report = check_gamma_left_monotone(Coupling(alpha, targets, pi),
                                            RadiusTable::uniform(10.0));
    CHECK(report.passes);
}

TEST_CASE("optimizers pass every pairwise exchange test") {
    testing::Rng rng(307);
    for (int trial = 0; trial < 25; ++trial) {
        auto instance = testing::random_feasible_ball_instance(rng, 4, 2);
        auto report = solve_primal(instance.alpha, instance.beta, instance.constraint,
                                   CostSpec::exp_difference());
        auto pairs = competitor_check_all_pairs(report.coupling, instance.constraint,
                                                CostSpec::exp_difference());
        CHECK(pairs.passes);
        CHECK(pairs.guaranteed);
    }
}

TEST_CASE("left-monotonicity of optimizers under strictly convex marginal costs") {
    testing::Rng rng(311);
    for (int trial = 0; trial < 25; ++trial) {
        auto instance = testing::random_feasible_ball_instance(rng, 4, 2);
        auto report = solve_primal(instance.alpha, instance.beta, instance.constraint,
                                   CostSpec::exp_difference());
        auto mono = check_gamma_left_monotone(report.coupling, instance.constraint.radius());
        CHECK(mono.passes);
    }
}

TEST_CASE("a deliberately crossed plan fails the exchange test with a sound competitor") {
    // rows 0 and 1 each straddle with wide kernels whose mass the other row
    // could carry more cheaply under the exponential cost
    DiscreteMeasure alpha({Point(0.0), Point(1.0)}, {0.5, 0.5});
    std::vector<Point> targets{Point(-2.0), Point(-1.0), Point(0.0),
                               Point(1.0), Point(2.0), Point(3.0)};
    Eigen::MatrixXd crossed = Eigen::MatrixXd::Zero(2, 6);
    crossed(0, 0) = 0.25;  // 0 -> -2
    crossed(0, 4) = 0.25;  // 0 -> 2
    crossed(1, 1) = 0.25;  // 1 -> -1
    crossed(1, 5) = 0.25;  // 1 -> 3
    Coupling plan(alpha, targets, crossed);
    auto constraint = ConstraintSpec::martingale_ball(RadiusTable::uniform(6.0), targets);

    auto pairs = competitor_check_all_pairs(plan, constraint, CostSpec::exp_difference());
    REQUIRE_FALSE(pairs.passes);
    REQUIRE(pairs.competitor.has_value());
    const auto& violation = *pairs.competitor;
    CHECK(violation.improvement > 1e-8);

    // soundness: the competitor kernels respect mass balance and, substituted
    // into the equal-weight rows, improve the plan cost by half the kernel
    // improvement (both rows carry mass 1/2)
    const auto& m_i = violation.m_i;
    const auto& m_j = violation.m_j;
    double wi = plan.row_mass(violation.row_i);
    Eigen::MatrixXd substituted = plan.matrix();
    for (Eigen::Index j = 0; j < substituted.cols(); ++j) {
        substituted(violation.row_i, j) = wi * m_i.weight_of(targets[static_cast<std::size_t>(j)]);
        substituted(violation.row_j, j) = wi * m_j.weight_of(targets[static_cast<std::size_t>(j)]);
    }
    Coupling improved(alpha, targets, substituted);
    double before = evaluate_plan(plan, CostSpec::exp_difference());
    double after = evaluate_plan(improved, CostSpec::exp_difference());
    CHECK(before - after == doctest::Approx(wi * violation.improvement).epsilon(1e-9));
    CHECK(before - after > 0.0);

    // mass balance held exactly by construction
    for (std::size_t j = 0; j < targets.size(); ++j) {
        double lhs = m_i.weight_of(targets[j]) + m_j.weight_of(targets[j]);
        double rhs = plan.matrix()(violation.row_i, static_cast<Eigen::Index>(j)) / wi +
                     plan.matrix()(violation.row_j, static_cast<Eigen::Index>(j)) / wi;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("single-row couplings pass vacuously") {
    DiscreteMeasure alpha = DiscreteMeasure::dirac(Point(0.0));
    std::vector<Point> targets{Point(-1.0), Point(1.0)};
    Eigen::MatrixXd pi(1, 2);
    pi << 0.5, 0.5;
    auto constraint = ConstraintSpec::martingale_ball(RadiusTable::uniform(1.0), targets);
    auto report = competitor_check_all_pairs(Coupling(alpha, targets, pi), constraint,
                                             CostSpec::exp_difference());
    CHECK(report.passes);
}

TEST_CASE("incumbent mass no kernel can reach makes the exchange infeasible") {
    DiscreteMeasure alpha({Point(0.0), Point(5.0)}, {0.5, 0.5});
    std::vector<Point> targets{Point(0.0), Point(5.0), Point(100.0)};
    Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(2, 3);
    pi(0, 0) = 0.5;
    pi(1, 1) = 0.25;
    pi(1, 2) = 0.25;  // mass at 100: outside both unit balls
    Coupling plan(alpha, targets, pi);
    auto constraint = ConstraintSpec::martingale_ball(RadiusTable::uniform(1.0), targets);
    CHECK_THROWS_AS(competitor_check(plan, constraint, CostSpec::power_difference(2.0), 0, 1),
                    NoAdmissibleExchangeError);
}

TEST_CASE("two-point uniqueness probe on the worked example") {
    auto constraint = ConstraintSpec::martingale_ball(RadiusTable::uniform(6.0),
                                                      two_point_beta().atoms());
    auto report = uniqueness_probe(two_point_alpha(), two_point_beta(), constraint,
                                   CostSpec::exp_difference());
    CHECK(report.unique);
    CHECK(report.guaranteed);
    CHECK((report.plan.matrix() - straddle_plan().matrix()).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("two-point uniqueness on random instances with exponential cost") {
    testing::Rng rng(313);
    for (int trial = 0; trial < 50; ++trial) {
        auto instance = testing::random_feasible_ball_instance(rng, 2, 2);
        if (instance.alpha.size() != 2) continue;
        auto report = uniqueness_probe(instance.alpha, instance.beta, instance.constraint,
                                       CostSpec::exp_difference());
        CHECK(report.unique);
    }
}

TEST_CASE("disjoint admissible targets force uniqueness trivially") {
    DiscreteMeasure alpha({Point(0.0), Point(10.0)}, {0.5, 0.5});
    DiscreteMeasure beta({Point(-1.0), Point(1.0), Point(9.0), Point(11.0)},
                         {0.25, 0.25, 0.25, 0.25});
    auto constraint = ConstraintSpec::martingale_ball(RadiusTable::uniform(1.5), beta.atoms());
    auto report = uniqueness_probe(alpha, beta, constraint, CostSpec::exp_difference());
    CHECK(report.unique);
}

TEST_CASE("non-strict costs are flagged as not guaranteed") {
    auto constraint = ConstraintSpec::martingale_ball(RadiusTable::uniform(6.0),
                                                      two_point_beta().atoms());
    auto report = competitor_check_all_pairs(straddle_plan(), constraint,
                                             CostSpec::power_difference(1.0));
    CHECK_FALSE(report.guaranteed);
}

TEST_SUITE_END();
