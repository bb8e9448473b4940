#include <Eigen/Dense>

#include "cmot/measures.hpp"
#include "doctest.h"
#include "support/generators.hpp"

using namespace cmot;

TEST_SUITE_BEGIN("measures");

TEST_CASE("validate merges duplicates and normalizes") {
    DiscreteMeasure m({Point(0.0), Point(0.0), Point(1.0)}, {0.25, 0.25, 0.5});
    REQUIRE(m.size() == 2);
    CHECK(m.atoms()[0] == Point(0.0));
    CHECK(m.atoms()[1] == Point(1.0));
    CHECK(m.weights()[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(m.weights()[1] == doctest::Approx(0.5).epsilon(1e-14));

    DiscreteMeasure single({Point(3.0)}, {2.0});
    CHECK(single.weights()[0] == 1.0);
}

TEST_CASE("validate rejects degenerate weights") {
    CHECK_THROWS_AS(DiscreteMeasure({Point(0.0), Point(1.0)}, {0.0, 0.0}), AllZeroWeightsError);
    CHECK_THROWS_AS(DiscreteMeasure({Point(0.0)}, {-1.0}), NegativeWeightError);
}

TEST_CASE("validate is exactly idempotent") {
    testing::Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        DiscreteMeasure m = testing::random_measure(rng, testing::uniform_int(rng, 1, 8), -3, 3);
        DiscreteMeasure once = validate(m);
        DiscreteMeasure twice = validate(once);
        CHECK(once == twice);
    }
}

TEST_CASE("zero-weight atoms are dropped") {
    DiscreteMeasure m({Point(-1.0), Point(0.0), Point(1.0)}, {0.5, 0.0, 0.5});
    CHECK(m.size() == 2);
    CHECK(m.weight_of(Point(0.0)) == 0.0);
}

TEST_CASE("coupling validates row sums against the source") {
    DiscreteMeasure alpha({Point(0.0), Point(5.0)}, {0.5, 0.5});
    std::vector<Point> targets{Point(-2.0), Point(0.0), Point(2.0), Point(10.0)};
    Eigen::MatrixXd pi(2, 4);
    pi << 0.25, 0, 0.25, 0, 0, 0.25, 0, 0.25;
    Coupling c(alpha, targets, pi);
    CHECK(c.total_mass() == doctest::Approx(1.0));

    SUBCASE("perturbing one entry breaks the row-sum invariant") {
        Eigen::MatrixXd bad = pi;
        bad(0, 1) += 1e-6;
        CHECK_THROWS_AS(Coupling(alpha, targets, bad), DimensionMismatchError);
    }
    SUBCASE("negative masses are rejected") {
        Eigen::MatrixXd bad = pi;
        bad(0, 0) = -0.1;
        CHECK_THROWS_AS(Coupling(alpha, targets, bad), NegativeWeightError);
    }
}

TEST_CASE("row barycenters") {
    DiscreteMeasure alpha({Point(0.0), Point(5.0)}, {0.5, 0.5});
    std::vector<Point> targets{Point(-2.0), Point(0.0), Point(2.0), Point(10.0)};
    Eigen::MatrixXd pi(2, 4);
    pi << 0.25, 0, 0.25, 0, 0, 0.25, 0, 0.25;
    Coupling c(alpha, targets, pi);
    CHECK(barycenter_of_row(c, 0).scalar() == doctest::Approx(0.0));
    CHECK(barycenter_of_row(c, 1).scalar() == doctest::Approx(5.0));

    // row [1/4 at -2, 1/4 at 0, 1/4 at 2, 1/4 at 10] -> 2.5
    DiscreteMeasure one({Point(0.0)}, {1.0});
    Eigen::MatrixXd flat(1, 4);
    flat << 0.25, 0.25, 0.25, 0.25;
    CHECK(barycenter_of_row(Coupling(one, targets, flat), 0).scalar() == doctest::Approx(2.5));
}

TEST_CASE("kernel on a single atom has that barycenter exactly") {
    testing::Rng rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        double y = testing::uniform(rng, -5, 5);
        DiscreteMeasure src({Point(testing::uniform(rng, -5, 5))}, {1.0});
        Eigen::MatrixXd pi(1, 1);
        pi << 1.0;
        Coupling c(src, {Point(y)}, pi);
        CHECK(barycenter_of_row(c, 0).scalar() == y);
    }
}

TEST_CASE("zero mass rows are reported") {
    // a negligible source weight admits an all-zero row within the row-sum
    // tolerance; disintegrating it must fail loudly
    DiscreteMeasure alpha({Point(0.0), Point(1.0)}, {1.0, 1e-13});
    Eigen::MatrixXd pi(2, 2);
    pi << alpha.weights()[0], 0.0, 0.0, 0.0;
    Coupling c(alpha, {Point(-1.0), Point(1.0)}, pi);
    CHECK_THROWS_AS(c.kernel_row(1), ZeroMassRowError);
    CHECK_THROWS_AS(barycenter_of_row(c, 1), ZeroMassRowError);
    CHECK_NOTHROW(c.kernel_row(0));
}

TEST_CASE("constraint specs validate their tables") {
    std::vector<Point> targets{Point(-1.0), Point(1.0)};
    CHECK_THROWS_AS(ConstraintSpec::martingale_ball(RadiusTable::uniform(-1.0), targets),
                    NegativeWeightError);
    CHECK_THROWS_AS(ConstraintSpec::martingale({}), DimensionMismatchError);

    Eigen::MatrixXd r(1, 2), a(1, 2);
    r << 0.7, 0.7;  // not a probability row
    a << 1.0, 1.0;
    CHECK_THROWS_AS(ConstraintSpec::capacity_bound(r, a, targets), DimensionMismatchError);
}

TEST_CASE("difference costs evaluate h(y - x)") {
    CostSpec exp_cost = CostSpec::exp_difference();
    CHECK(exp_cost.value(Point(1.0), Point(3.0)) == doctest::Approx(std::exp(2.0)));

    CostSpec absolute = CostSpec::power_difference(1.0);
    CHECK(absolute.value(Point(5.0), Point(2.0)) == doctest::Approx(3.0));

    CostSpec sampled = CostSpec::sampled_difference({-1.0, 0.0, 1.0}, {4.0, 5.0, 6.0});
    CHECK(sampled.value(Point(0.0), Point(1.0)) == 6.0);
    CHECK_THROWS_AS(sampled.value(Point(0.0), Point(0.5)), SchemaViolationError);

    // difference costs are one-dimensional; higher dimensions take tables
    CHECK_THROWS_AS(exp_cost.value(Point(0.0, 0.0), Point(1.0, 1.0)), DimensionMismatchError);
}

TEST_SUITE_END();
