#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "crcs/certify.hpp"
#include "crcs/estimators.hpp"
#include "crcs/model.hpp"
#include "oracles.hpp"

using namespace crcs;

TEST_CASE("naive estimator fits each cause separately and reports sum violations") {
    Dataset d = validate_dataset({{1.0, 1}, {2.0, 2}}, 2);
    NaiveResult r = naive_estimate(d);
    REQUIRE(r.components.size() == 2);
    CHECK(r.components[0](1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.components[0](2.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.components[1](1.0) == doctest::Approx(0.0));
    CHECK(r.components[1](2.0) == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(r.sum_violations.size() == 1);
    CHECK(r.sum_violations[0].first == 2.0);
    CHECK(r.sum_violations[0].second == doctest::Approx(1.5).epsilon(1e-12));
    REQUIRE(r.per_cause_loglik.size() == 2);
    CHECK(r.per_cause_loglik[0] == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
    CHECK(r.per_cause_loglik[1] == doctest::Approx(0.0).epsilon(1e-12));

    SubDistSystem cone = r.as_cone_system();
    CHECK(cone.is_cone());
    CHECK(cone.K == 2);
    CHECK(cone.sum_at(2.0) == doctest::Approx(1.5));
}

TEST_CASE("maximizer splits mass evenly between a failure and a survivor") {
    Dataset d = validate_dataset({{1.0, 1}, {2.0, 0}}, 2);
    MleResult m = mle_estimate(d);
    CHECK(m.certificate.passed);
    CHECK(m.system.components[0](1.0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(m.system.components[1](2.0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(m.system.total_at_inf() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(m.tail_mass_total == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(m.certificate.beta == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(m.certificate.beta >= 0.0);
    CHECK(m.loglik == doctest::Approx(-std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("maximizer with failures from both causes") {
    Dataset d = validate_dataset({{1.0, 1}, {2.0, 2}}, 2);
    MleResult m = mle_estimate(d);
    CHECK(m.certificate.passed);
    CHECK(m.system.components[0](1.0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(m.system.components[1](2.0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(m.tail_mass_total == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(m.certificate.beta == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(m.loglik == doctest::Approx(-std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("all-survival sample keeps every component at zero") {
    Dataset d = validate_dataset({{1.0, 0}, {2.0, 0}}, 2);
    MleResult m = mle_estimate(d);
    CHECK(m.certificate.passed);
    CHECK(m.system.sum_at(2.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(m.tail_mass_total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(m.certificate.beta == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(m.loglik == doctest::Approx(0.0).epsilon(1e-9));

    UniquenessReport u = uniqueness_report(d, m);
    CHECK_FALSE(u.infinity_unique);
}

TEST_CASE("single cause reduces to the univariate fit") {
    testor::Rand rng(921, 0);
    for (int trial = 0; trial < 50; ++trial) {
        Dataset d = testor::random_dataset(rng, 1, rng.integer(2, 60), 8);
        NaiveResult nv = naive_estimate(d);
        MleResult m = mle_estimate(d);
        CHECK(m.certificate.passed);
        for (int j = 0; j < d.m(); ++j) {
            CHECK(m.system.components[0](d.times[j]) ==
                  doctest::Approx(nv.components[0](d.times[j])).epsilon(1e-8));
        }
        CHECK(nv.sum_violations.empty());
    }
}

TEST_CASE("maximizer beats the lattice oracle on tiny instances") {
    testor::Rand rng(922, 0);
    for (int trial = 0; trial < 12; ++trial) {
        int K = rng.integer(1, 2);
        int levels = K == 1 ? 8 : 4;
        Dataset d = testor::random_dataset(rng, K, rng.integer(2, 10), levels);
        if (K * d.m() > 8) continue;
        MleResult m = mle_estimate(d);
        CHECK(m.certificate.passed);
        SubDistSystem brute = brute_force_mle(d, 1e-3);
        CHECK(loglik(d, m.system) >= loglik(d, brute) - 1e-6);
    }
}

TEST_CASE("candidate support intervals and uniqueness points") {
    Dataset d = validate_dataset(
        {{1.0, 1}, {2.0, 0}, {3.0, 2}, {4.0, 1}, {5.0, 1}, {6.0, 0}}, 2);
    std::vector<CauseSupport> sup = support_sets(d);
    REQUIRE(sup.size() == 2);

    CHECK(sup[0].tk == std::vector<double>{1.0, 2.0, 4.0, 5.0, 6.0});
    REQUIRE(sup[0].intervals.size() == 3);
    CHECK(sup[0].intervals[0].left == -std::numeric_limits<double>::infinity());
    CHECK(sup[0].intervals[0].right == 1.0);
    CHECK_FALSE(sup[0].intervals[0].to_infinity);
    CHECK(sup[0].intervals[1].left == 2.0);
    CHECK(sup[0].intervals[1].right == 4.0);
    // the cause-only time 4 pins the fit flat through 5, so no (4, 5] interval
    CHECK(sup[0].intervals[2].to_infinity);
    CHECK(sup[0].intervals[2].left == 6.0);

    CHECK(sup[1].tk == std::vector<double>{2.0, 3.0, 6.0});
    REQUIRE(sup[1].intervals.size() == 2);
    CHECK(sup[1].intervals[0].left == 2.0);
    CHECK(sup[1].intervals[0].right == 3.0);
    CHECK(sup[1].intervals[1].to_infinity);

    // without survival at t_max there is no infinity interval
    Dataset d2 = validate_dataset({{1.0, 0}, {2.0, 1}}, 1);
    std::vector<CauseSupport> sup2 = support_sets(d2);
    REQUIRE(sup2[0].intervals.size() == 1);
    CHECK(sup2[0].intervals[0].left == 1.0);
    CHECK(sup2[0].intervals[0].right == 2.0);
    CHECK_FALSE(sup2[0].intervals[0].to_infinity);

    MleResult m = mle_estimate(d2);
    UniquenessReport u = uniqueness_report(d2, m);
    CHECK(u.infinity_unique);
    CHECK(u.unique_at[0] == std::vector<double>{1.0, 2.0});
}

TEST_CASE("estimate options are validated") {
    Dataset d = validate_dataset({{1.0, 1}, {2.0, 0}}, 1);
    EstimateOptions bad;
    bad.fenchel_tol = 0.0;
    CHECK_THROWS_AS(mle_estimate(d, bad), std::invalid_argument);
    bad = EstimateOptions{};
    bad.max_iters = 0;
    CHECK_THROWS_AS(mle_estimate(d, bad), std::invalid_argument);
    bad = EstimateOptions{};
    bad.interior_guard = -1.0;
    CHECK_THROWS_AS(mle_estimate(d, bad), std::invalid_argument);

    CHECK_THROWS_AS(brute_force_mle(d, 0.0), std::invalid_argument);
    testor::Rand rng(5, 0);
    Dataset big = testor::random_dataset(rng, 3, 40, 12);
    CHECK_THROWS_AS(brute_force_mle(big, 1e-3), std::invalid_argument);
}

TEST_CASE("mle certificate holds on random datasets") {
    testor::Rand rng(923, 0);
    for (int trial = 0; trial < 25; ++trial) {
        int K = rng.integer(1, 3);
        Dataset d = testor::random_dataset(rng, K, rng.integer(5, 120), 10);
        MleResult m = mle_estimate(d);
        CHECK(m.certificate.passed);
        CHECK(m.certificate.beta >= 0.0);
        CHECK_NOTHROW(validate_system(m.system));
        bool surv_at_max = d.survival_at_t_max();
        if (surv_at_max) {
            CHECK(std::fabs(m.certificate.beta) <= 1e-10);
        } else {
            CHECK(m.certificate.beta > 1e-10);
        }
        // naive marginal product never beats the joint maximum when K = 1;
        // for K > 1 the naive fit may be infeasible, so compare on the cone
        NaiveResult nv = naive_estimate(d);
        if (nv.sum_violations.empty()) {
            CHECK(loglik(d, m.system) >= loglik(d, nv.as_cone_system()) - 1e-9);
        }
    }
}
