#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "crcs/dist.hpp"
#include "crcs/metrics.hpp"
#include "crcs/model.hpp"
#include "crcs/simulate.hpp"
#include "crcs/truth.hpp"
#include "oracles.hpp"

using namespace crcs;

namespace {

ObsDist unit_uniform() {
    ObsDist g;
    g.kind = ObsDist::Kind::uniform;
    g.a = 0.0;
    g.b = 1.0;
    return g;
}

SystemView flat_view(int K, double level, double survivor) {
    SubDistSystem s;
    s.K = K;
    for (int k = 0; k < K; ++k) {
        StepFn f;
        f.baseline = level;
        s.components.push_back(f);
    }
    (void)survivor;
    return system_view(s);
}

}  // namespace

TEST_CASE("distances between two constant single-cause systems") {
    // F identically zero vs F0 identically 1/4 on [0, 1]: the integrands are
    // constant, so every value is exact in closed form
    ObsDist g = unit_uniform();
    SystemView zero = flat_view(1, 0.0, 1.0);
    SystemView quarter = flat_view(1, 0.25, 0.75);

    MetricValue h = hellinger(zero, quarter, g);
    double hsq = 0.5 * (0.25 + std::pow(1.0 - std::sqrt(0.75), 2));
    CHECK(h.value == doctest::Approx(std::sqrt(hsq)).epsilon(1e-14));
    CHECK(h.value == doctest::Approx(0.3660254037844387).epsilon(1e-13));
    CHECK(h.quadrature_error_bound <= 1e-12);

    MetricValue tv = total_variation(zero, quarter, g);
    CHECK(tv.value == doctest::Approx(0.25).epsilon(1e-14));

    MetricValue l1 = lr_distance(zero, quarter, g, 1);
    CHECK(l1.value == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(l1.value == 2.0 * tv.value);

    MetricValue l2 = lr_distance(zero, quarter, g, 2);
    CHECK(l2.value == doctest::Approx(std::sqrt(0.125)).epsilon(1e-13));

    CHECK(h.kind == "hellinger");
    CHECK(tv.kind == "tv");
    CHECK(l1.kind == "lr");
    CHECK(l1.r == 1);
}

TEST_CASE("identical views are at distance zero") {
    ObsDist g = unit_uniform();
    g.b = 3.0;
    testor::Rand rng(931, 0);
    SubDistSystem s = testor::random_system(rng, 2, 0.0, 3.0, 4);
    SystemView v = system_view(s);
    CHECK(hellinger(v, v, g).value == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(total_variation(v, v, g).value == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(lr_distance(v, v, g, 2).value == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("metric identities hold on random step systems") {
    ObsDist g = unit_uniform();
    g.b = 5.0;
    testor::Rand rng(932, 0);
    for (int trial = 0; trial < 30; ++trial) {
        int K = rng.integer(1, 3);
        SubDistSystem a = testor::random_system(rng, K, 0.0, 5.0, 4);
        SubDistSystem b = testor::random_system(rng, K, 0.0, 5.0, 4);
        SystemView va = system_view(a), vb = system_view(b);

        MetricValue h = hellinger(va, vb, g);
        MetricValue tv = total_variation(va, vb, g);
        MetricValue l1 = lr_distance(va, vb, g, 1);
        MetricValue l2 = lr_distance(va, vb, g, 2);

        CHECK(h.value >= 0.0);
        CHECK(h.value <= 1.0 + 1e-12);
        CHECK(l1.value == 2.0 * tv.value);  // exact, shared piece integrals

        // step against step integrates exactly once the pieces align
        CHECK(h.quadrature_error_bound <= 1e-9);
        CHECK(tv.quadrature_error_bound <= 1e-9);

        // total variation vs Hellinger and L2 vs Hellinger
        CHECK(tv.value <= std::sqrt(2.0) * h.value + 1e-9);
        CHECK(l2.value * l2.value <= 8.0 * h.value * h.value + 1e-9);

        // symmetry
        CHECK(hellinger(vb, va, g).value == doctest::Approx(h.value).epsilon(1e-13));
        CHECK(total_variation(vb, va, g).value == doctest::Approx(tv.value).epsilon(1e-13));
    }
}

TEST_CASE("survivor clamping keeps infeasible naive systems measurable") {
    // component sum exceeds one on part of the axis; the survivor view is
    // clamped at zero so the integrands stay defined
    SubDistSystem s;
    s.K = 2;
    s.sum_tolerance = std::numeric_limits<double>::infinity();
    s.components.push_back(make_step_fn({1.0}, {0.6}));
    s.components.push_back(make_step_fn({2.0}, {0.8}));
    SystemView v = system_view(s);
    CHECK(v.survivor(2.5) == 0.0);
    CHECK(v.survivor(0.5) == doctest::Approx(1.0));

    ObsDist g = unit_uniform();
    g.b = 3.0;
    SystemView truth = truth_view(default_truth_model());
    MetricValue h = hellinger(v, truth, g);
    CHECK(std::isfinite(h.value));
    CHECK(h.value >= 0.0);
    CHECK(h.value <= 1.0 + 1e-12);
    CHECK(std::isfinite(total_variation(v, truth, g).value));
}

TEST_CASE("truth and perturbed views expose their discontinuities") {
    TruthModel tm = default_truth_model();
    SystemView tv_view = truth_view(tm);
    CHECK(tv_view.K == tm.K);
    CHECK(tv_view.knots.empty());
    CHECK(tv_view.component(1, 1.0) == doctest::Approx(tm.F0k(1, 1.0)).epsilon(1e-14));
    CHECK(tv_view.survivor(1.0) ==
          doctest::Approx(1.0 - tm.F0plus(1.0)).epsilon(1e-14));

    PerturbedTruth pt = minimax_perturbation(tm, 1, 1.0, 100, 1.0);
    SystemView pv = perturbed_view(pt);
    CHECK(pv.knots.size() == 3);
    CHECK(pv.component(pt.k, pt.t0) == doctest::Approx(pt.F0k(pt.k, pt.t0)).epsilon(1e-14));

    // the perturbed view differs from the base only inside the window
    ObsDist g = tm.g;
    MetricValue diff = lr_distance(pv, tv_view, g, 1);
    CHECK(diff.value > 0.0);
    CHECK(diff.value < 0.1);
}

TEST_CASE("metrics reject mismatched shapes and bad weights") {
    ObsDist g = unit_uniform();
    SystemView v1 = flat_view(1, 0.1, 0.9);
    SystemView v2 = flat_view(2, 0.1, 0.8);
    CHECK_THROWS_AS(hellinger(v1, v2, g), std::invalid_argument);

    ObsDist bad = g;
    bad.b = -1.0;
    CHECK_THROWS_AS(hellinger(v1, v1, bad), std::invalid_argument);
}
