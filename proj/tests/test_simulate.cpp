#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

#include "crcs/dist.hpp"
#include "crcs/rng.hpp"
#include "crcs/simulate.hpp"
#include "crcs/truth.hpp"

using namespace crcs;

TEST_CASE("counter rng is pure, uniform in (0,1), and stream separated") {
    CounterRng r(42, 0);
    CHECK(r.uniform(0, 0) == r.uniform(0, 0));
    CHECK(r.uniform(0, 0) != r.uniform(0, 1));
    CHECK(r.uniform(0, 0) != r.uniform(1, 0));
    CounterRng r2(42, 1);
    CHECK(r.uniform(0, 0) != r2.uniform(0, 0));
    CounterRng r3(43, 0);
    CHECK(r.uniform(0, 0) != r3.uniform(0, 0));

    double lo = 1.0, hi = 0.0;
    for (std::uint64_t c = 0; c < 10000; ++c) {
        double u = r.uniform(c, 0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
    CHECK(lo < 0.01);
    CHECK(hi > 0.99);
}

TEST_CASE("observation distributions round trip cdf and quantile") {
    ObsDist u;
    u.kind = ObsDist::Kind::uniform;
    u.a = 0.5;
    u.b = 2.5;
    ObsDist te;
    te.kind = ObsDist::Kind::trunc_exponential;
    te.a = 0.0;
    te.b = 3.0;
    te.rate = 0.7;
    for (const ObsDist& g : {u, te}) {
        validate_obs_dist(g);
        CHECK(g.cdf(g.a) == doctest::Approx(0.0));
        CHECK(g.cdf(g.b) == doctest::Approx(1.0));
        for (double p : {0.05, 0.3, 0.5, 0.77, 0.99}) {
            double x = g.quantile(p);
            CHECK(g.cdf(x) == doctest::Approx(p).epsilon(1e-12));
            double h = 1e-6;
            double num = (g.cdf(x + h) - g.cdf(x - h)) / (2 * h);
            CHECK(g.pdf(x) == doctest::Approx(num).epsilon(1e-5));
        }
    }

    ObsDist bad = u;
    bad.b = bad.a;
    CHECK_THROWS_AS(validate_obs_dist(bad), std::invalid_argument);
}

TEST_CASE("cause shapes round trip cdf and quantile") {
    CauseShape e;
    e.kind = CauseShape::Kind::exponential;
    e.rate = 1.3;
    CauseShape w;
    w.kind = CauseShape::Kind::weibull;
    w.shape = 1.7;
    w.scale = 0.8;
    for (const CauseShape& s : {e, w}) {
        validate_cause_shape(s);
        CHECK(s.cdf(0.0) == doctest::Approx(0.0));
        for (double p : {0.1, 0.45, 0.9}) {
            double x = s.quantile(p);
            CHECK(s.cdf(x) == doctest::Approx(p).epsilon(1e-12));
            double h = 1e-6;
            double num = (s.cdf(x + h) - s.cdf(x - h)) / (2 * h);
            CHECK(s.pdf(x) == doctest::Approx(num).epsilon(1e-5));
        }
    }

    CauseShape bad = e;
    bad.rate = 0.0;
    CHECK_THROWS_AS(validate_cause_shape(bad), std::invalid_argument);
}

TEST_CASE("default model values and local quantities at t0 = 1") {
    TruthModel tm = default_truth_model();
    CHECK(tm.K == 2);
    CHECK(tm.F0k(1, 1.0) == doctest::Approx(0.5 * (1.0 - std::exp(-1.0))).epsilon(1e-14));
    CHECK(tm.F0plus(1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
    CHECK(tm.g.a == 0.0);
    CHECK(tm.g.b == 2.0);

    LocalTruth lt = local_truth_at(tm, 1.0);
    CHECK(lt.t0 == 1.0);
    CHECK(lt.F0k_at_t0[0] == doctest::Approx(tm.F0k(1, 1.0)).epsilon(1e-14));
    CHECK(lt.a.size() == 3);
    CHECK(lt.a[0] == doctest::Approx(1.0 / tm.F0k(1, 1.0)).epsilon(1e-13));
    CHECK(lt.a[2] == doctest::Approx(std::exp(1.0)).epsilon(1e-13));
    CHECK(lt.g_at_t0 == doctest::Approx(0.5));

    CHECK_THROWS_AS(local_truth_at(tm, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(local_truth_at(tm, 5.0), std::invalid_argument);
}

TEST_CASE("sampling is deterministic and matches population frequencies") {
    TruthModel tm = default_truth_model();
    Dataset a = sample_dataset(tm, 500, 11, 3);
    Dataset b = sample_dataset(tm, 500, 11, 3);
    REQUIRE(a.obs.size() == b.obs.size());
    for (size_t i = 0; i < a.obs.size(); ++i) {
        CHECK(a.obs[i].time == b.obs[i].time);
        CHECK(a.obs[i].status == b.obs[i].status);
    }
    Dataset c = sample_dataset(tm, 500, 11, 4);
    bool same = true;
    for (size_t i = 0; i < a.obs.size(); ++i)
        if (a.obs[i].time != c.obs[i].time) same = false;
    CHECK_FALSE(same);

    // P(status = k) = integral of F0k against g = 1/4 (1 + e^{-2}) per cause
    int n = 20000;
    Dataset big = sample_dataset(tm, n, 1, 0);
    double expect = 0.25 * (1.0 + std::exp(-2.0));
    CHECK(big.cause_total(1) / static_cast<double>(n) == doctest::Approx(expect).epsilon(0.05));
    CHECK(big.cause_total(2) / static_cast<double>(n) == doctest::Approx(expect).epsilon(0.05));

    CHECK_THROWS_AS(sample_dataset(tm, 0, 1, 0), std::invalid_argument);
}

TEST_CASE("perturbed sampling stays paired with the base draws") {
    TruthModel tm = default_truth_model();
    PerturbedTruth pt = minimax_perturbation(tm, 1, 1.0, 200, 1.0);
    CHECK(pt.lo() == doctest::Approx(1.0 - std::pow(200.0, -1.0 / 3.0)));
    CHECK(pt.hi() == doctest::Approx(1.0 + std::pow(200.0, -1.0 / 3.0)));

    int n = 4000;
    Dataset base = sample_dataset(tm, n, 9, 100);
    Dataset pert = sample_dataset(pt, n, 9, 100);
    REQUIRE(base.obs.size() == pert.obs.size());
    int differing = 0;
    for (size_t i = 0; i < base.obs.size(); ++i) {
        CHECK(base.obs[i].time == pert.obs[i].time);
        if (base.obs[i].status != pert.obs[i].status) {
            ++differing;
            // only the snap can flip a status, and only for cause k with the
            // observation time inside the flattening window
            CHECK((base.obs[i].status == 0 || base.obs[i].status == pt.k));
            CHECK((pert.obs[i].status == 0 || pert.obs[i].status == pt.k));
            CHECK(base.obs[i].time > pt.lo());
            CHECK(base.obs[i].time < pt.hi());
        }
    }
    CHECK(differing > 0);
    CHECK(differing < n / 10);

    // perturbed component is flat left of t0 and jumps there
    CHECK(pt.F0k(1, pt.lo()) == doctest::Approx(tm.F0k(1, pt.lo())));
    CHECK(pt.F0k(1, 0.5 * (pt.lo() + pt.t0)) == doctest::Approx(tm.F0k(1, pt.lo())));
    CHECK(pt.F0k(1, pt.t0) == doctest::Approx(tm.F0k(1, pt.hi())));
    CHECK(pt.F0k(2, pt.t0) == doctest::Approx(tm.F0k(2, pt.t0)));
    CHECK(pt.F0plus(pt.t0) ==
          doctest::Approx(tm.F0k(1, pt.hi()) + tm.F0k(2, pt.t0)).epsilon(1e-14));

    // window escaping the observation support is rejected
    CHECK_THROWS_AS(minimax_perturbation(tm, 1, 1.0, 100, 1.9), std::invalid_argument);
    CHECK_THROWS_AS(minimax_perturbation(tm, 3, 1.0, 100, 1.0), std::invalid_argument);
}

TEST_CASE("centered processes at a point") {
    TruthModel tm = default_truth_model();
    LocalTruth lt = local_truth_at(tm, 1.0);
    Dataset d = validate_dataset({{0.5, 1}, {1.5, 0}}, 2);
    WsValues w = w_s_processes(d, tm, lt, 1.0);
    double f01 = tm.F0k(1, 0.5), f02 = tm.F0k(2, 0.5);
    CHECK(w.wnk[0] == doctest::Approx((1.0 - f01) / 2.0).epsilon(1e-14));
    CHECK(w.wnk[1] == doctest::Approx((0.0 - f02) / 2.0).epsilon(1e-14));
    CHECK(w.wnplus == doctest::Approx((1.0 - f01 - f02) / 2.0).epsilon(1e-14));
    CHECK(w.snk[0] ==
          doctest::Approx(lt.a[0] * w.wnk[0] + lt.a[2] * w.wnplus).epsilon(1e-13));
    CHECK(w.snk[1] ==
          doctest::Approx(lt.a[1] * w.wnk[1] + lt.a[2] * w.wnplus).epsilon(1e-13));

    // nothing at or before t: all zero
    WsValues w0 = w_s_processes(d, tm, lt, 0.25);
    CHECK(w0.wnk[0] == 0.0);
    CHECK(w0.wnplus == 0.0);
}

TEST_CASE("rate envelope shape and frozen value") {
    CHECK(vn_envelope(1000, 1.0, 0.5) == doctest::Approx(0.31622776601683794).epsilon(1e-15));
    double cut = std::pow(1000.0, -1.0 / 3.0);
    CHECK(vn_envelope(1000, 0.5 * cut, 0.5) == doctest::Approx(cut).epsilon(1e-14));
    CHECK(vn_envelope(1000, -0.5 * cut, 0.5) == doctest::Approx(cut).epsilon(1e-14));
    // continuous across the cut
    CHECK(vn_envelope(1000, cut * (1 + 1e-9), 0.5) == doctest::Approx(cut).epsilon(1e-8));
    // beta = 1 makes the outer branch linear in |t|
    CHECK(vn_envelope(1000, 7.0, 1.0) == doctest::Approx(7.0).epsilon(1e-14));
    CHECK_THROWS_AS(vn_envelope(1000, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(vn_envelope(0, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("lower bound constants at the default local truth") {
    TruthModel tm = default_truth_model();
    LocalTruth lt = local_truth_at(tm, 1.0);
    MinimaxBound mb = minimax_bound(lt, 1, 1);
    CHECK(mb.d == doctest::Approx(0.2256932202751695).epsilon(1e-15));
    CHECK(mb.d == doctest::Approx(std::exp(-(5.0 * std::log(2.0) + 1.0) / 3.0)).epsilon(1e-14));
    CHECK(mb.bound == doctest::Approx(0.08958587839973811).epsilon(1e-13));
    CHECK(mb.single_risk_bound == doctest::Approx(0.09705463218776501).epsilon(1e-13));
    CHECK(mb.bound <= mb.single_risk_bound);

    // d^r B^{-r/3} factors through r, so the r = 2 bound is the square
    MinimaxBound mb2 = minimax_bound(lt, 1, 2);
    CHECK(mb2.bound == doctest::Approx(mb.bound * mb.bound).epsilon(1e-12));
    CHECK_THROWS_AS(minimax_bound(lt, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(minimax_bound(lt, 1, 0), std::invalid_argument);
}

TEST_CASE("two point risk smoke run with the naive estimator") {
    TruthModel tm = default_truth_model();
    TwoPointRisk tp = two_point_risk(tm, 1, 1.0, 50, 1.0, 10, 7, EstimatorKind::naive, 1);
    CHECK(tp.failures == 0);
    CHECK(tp.risk_at_F0 >= 0.0);
    CHECK(tp.risk_at_Fnk >= 0.0);
    CHECK(tp.max_risk == doctest::Approx(std::max(tp.risk_at_F0, tp.risk_at_Fnk)));
    CHECK(tp.scaled_max_risk ==
          doctest::Approx(std::pow(50.0, 1.0 / 3.0) * tp.max_risk).epsilon(1e-13));
    CHECK(tp.bound == doctest::Approx(0.08958587839973811).epsilon(1e-12));

    TwoPointRisk again = two_point_risk(tm, 1, 1.0, 50, 1.0, 10, 7, EstimatorKind::naive, 1);
    CHECK(tp.risk_at_F0 == again.risk_at_F0);
    CHECK(tp.risk_at_Fnk == again.risk_at_Fnk);
}

TEST_CASE("rate experiment smoke run") {
    RateConfig cfg;
    cfg.tm = default_truth_model();
    cfg.n_grid = {30, 60};
    cfg.reps = 20;
    cfg.base_seed = 3;
    RateTable t = rate_experiment(cfg);

    // 10 metrics per estimator at K = 2, both estimators, two sample sizes
    CHECK(t.rows.size() == 40);
    std::set<std::string> metrics;
    for (const RateRow& row : t.rows) {
        metrics.insert(row.metric);
        CHECK((row.n == 30 || row.n == 60));
        if (std::isfinite(row.median)) {
            CHECK(row.q25 <= row.median + 1e-15);
            CHECK(row.median <= row.q75 + 1e-15);
        }
    }
    CHECK(metrics.size() == 20);
    CHECK(metrics.count("mle_hellinger") == 1);
    CHECK(metrics.count("naive_l2") == 1);
    CHECK(metrics.count("mle_uniform_stat") == 1);
    CHECK(metrics.count("naive_jump_gap_k2") == 1);
    CHECK(t.slopes.size() == 20);

    RateTable t2 = rate_experiment(cfg);
    REQUIRE(t2.rows.size() == t.rows.size());
    for (size_t i = 0; i < t.rows.size(); ++i) {
        CHECK(t.rows[i].median == t2.rows[i].median);
        CHECK(t.rows[i].q25 == t2.rows[i].q25);
        CHECK(t.rows[i].q75 == t2.rows[i].q75);
    }

    RateConfig bad = cfg;
    bad.n_grid = {5, 60};
    CHECK_THROWS_AS(rate_experiment(bad), std::invalid_argument);
    bad = cfg;
    bad.n_grid = {60};
    CHECK_THROWS_AS(rate_experiment(bad), std::invalid_argument);
    bad = cfg;
    bad.reps = 10;
    CHECK_THROWS_AS(rate_experiment(bad), std::invalid_argument);
    bad = cfg;
    bad.run_naive = bad.run_mle = false;
    CHECK_THROWS_AS(rate_experiment(bad), std::invalid_argument);
}

TEST_CASE("quantiles and slopes") {
    CHECK(quantile_type7({4.0, 1.0, 3.0, 2.0}, 0.25) == doctest::Approx(1.75).epsilon(1e-15));
    CHECK(quantile_type7({4.0, 1.0, 3.0, 2.0}, 0.5) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(quantile_type7({4.0, 1.0, 3.0, 2.0}, 0.0) == 1.0);
    CHECK(quantile_type7({4.0, 1.0, 3.0, 2.0}, 1.0) == 4.0);
    CHECK(quantile_type7({5.0}, 0.37) == 5.0);
    CHECK_THROWS_AS(quantile_type7({}, 0.5), std::invalid_argument);

    CHECK(ols_slope({0.0, 1.0, 2.0}, {1.0, 3.0, 5.0}) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(std::isnan(ols_slope({1.0}, {2.0})));
    CHECK(std::isnan(ols_slope({2.0, 2.0}, {1.0, 5.0})));
}
