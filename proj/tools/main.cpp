#include <cstdio>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "crcs/certify.hpp"
#include "crcs/estimators.hpp"
#include "crcs/io.hpp"
#include "crcs/metrics.hpp"
#include "crcs/model.hpp"
#include "crcs/simulate.hpp"
#include "crcs/truth.hpp"

// Exit codes: 0 success, 2 bad input, 3 estimator did not converge,
// 4 certification failed.

namespace {

using nlohmann::json;

struct EstimateArgs {
    std::string method = "mle";
    int k = 1;
    std::string input;
    std::string out;
    bool certify = false;
    double tol = 1e-8;
    int max_iters = 10000;
};

struct CertifyArgs {
    std::string input;
    std::string data;
    int k = 0;  // 0: take it from the estimate file
    double tol = 1e-8;
    std::string out;
};

struct MetricsArgs {
    std::string input;
    std::string truth;
    std::string baseline;
    std::string out;
};

struct SimulateArgs {
    std::string config;
    std::string out;
};

struct RatesArgs {
    std::string config;
    std::string out_csv;
    std::string out_json;
};

struct MinimaxArgs {
    std::string config;
    std::string out;
    bool eval_only = false;
};

void dump_json(const std::string& path, const json& j) {
    if (!path.empty()) crcs::write_text_file(path, j.dump(2) + "\n");
}

int run_estimate(const EstimateArgs& a) {
    crcs::Dataset d = crcs::read_dataset_csv(a.input, a.k);
    if (a.method == "naive") {
        crcs::NaiveResult r = crcs::naive_estimate(d);
        json j = crcs::naive_to_json(r, d.K, d.n);
        bool passed = true;
        if (a.certify) {
            crcs::FenchelReport rep = crcs::fenchel_check(d, r.as_cone_system(), a.tol);
            j["certificate"] = crcs::fenchel_to_json(rep);
            passed = rep.passed;
        }
        dump_json(a.out, j);
        std::printf("naive estimate: n=%d k=%d loglik=%s violations=%zu\n", d.n, d.K,
                    crcs::fmt17(j.at("loglik").get<double>()).c_str(), r.sum_violations.size());
        if (!passed) {
            std::fprintf(stderr, "certification failed\n");
            return 4;
        }
        return 0;
    }
    crcs::EstimateOptions opts;
    opts.fenchel_tol = a.tol;
    opts.max_iters = a.max_iters;
    try {
        crcs::MleResult r = crcs::mle_estimate(d, opts);
        dump_json(a.out, crcs::mle_to_json(r, d.K, d.n));
        std::printf("mle estimate: n=%d k=%d loglik=%s beta=%s sweeps=%d certified=%s\n", d.n, d.K,
                    crcs::fmt17(r.loglik).c_str(), crcs::fmt17(r.certificate.beta).c_str(),
                    r.iterations, r.certificate.passed ? "yes" : "no");
        if (a.certify && !r.certificate.passed) return 4;
        return 0;
    } catch (const crcs::MleNonConvergence& e) {
        dump_json(a.out, crcs::mle_to_json(e.best, d.K, d.n));
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}

int run_certify(const CertifyArgs& a) {
    json ej = json::parse(crcs::read_text_file(a.input));
    crcs::SubDistSystem sys = crcs::system_from_json(ej);
    int k = a.k > 0 ? a.k : ej.at("k").get<int>();
    crcs::Dataset d = crcs::read_dataset_csv(a.data, k);
    crcs::FenchelReport rep = crcs::fenchel_check(d, sys, a.tol);
    dump_json(a.out, crcs::fenchel_to_json(rep));
    double worst = 0.0;
    for (const crcs::CauseCondition& c : rep.per_cause) {
        if (c.max_inequality_violation > worst) worst = c.max_inequality_violation;
        if (c.max_equality_gap > worst) worst = c.max_equality_gap;
    }
    std::printf("certificate: beta=%s worst=%s passed=%s\n", crcs::fmt17(rep.beta).c_str(),
                crcs::fmt17(worst).c_str(), rep.passed ? "yes" : "no");
    return rep.passed ? 0 : 4;
}

int run_metrics(const MetricsArgs& a) {
    crcs::SubDistSystem sys = crcs::system_from_json(json::parse(crcs::read_text_file(a.input)));
    crcs::TruthModel tm = crcs::truth_model_from_json(json::parse(crcs::read_text_file(a.truth)));
    crcs::SystemView F = crcs::system_view(sys);
    crcs::SystemView F0 =
        a.baseline.empty()
            ? crcs::truth_view(tm)
            : crcs::system_view(crcs::system_from_json(json::parse(crcs::read_text_file(a.baseline))));
    crcs::MetricValue h = crcs::hellinger(F, F0, tm.g);
    crcs::MetricValue tv = crcs::total_variation(F, F0, tm.g);
    crcs::MetricValue l1 = crcs::lr_distance(F, F0, tm.g, 1);
    crcs::MetricValue l2 = crcs::lr_distance(F, F0, tm.g, 2);
    json j{{"hellinger", h.value},
           {"tv", tv.value},
           {"l1", l1.value},
           {"l2", l2.value},
           {"quadrature_error_bounds",
            json{{"hellinger", h.quadrature_error_bound},
                 {"tv", tv.quadrature_error_bound},
                 {"l1", l1.quadrature_error_bound},
                 {"l2", l2.quadrature_error_bound}}}};
    dump_json(a.out, j);
    std::printf("hellinger=%s tv=%s l1=%s l2=%s\n", crcs::fmt17(h.value).c_str(),
                crcs::fmt17(tv.value).c_str(), crcs::fmt17(l1.value).c_str(),
                crcs::fmt17(l2.value).c_str());
    return 0;
}

int run_simulate(const SimulateArgs& a) {
    json cfg = json::parse(crcs::read_text_file(a.config));
    crcs::TruthModel tm = crcs::truth_model_from_json(cfg.at("truth"));
    int n = cfg.at("n").get<int>();
    std::uint64_t seed = cfg.value("seed", 0ULL);
    std::uint64_t stream = cfg.value("stream", 0ULL);
    crcs::Dataset d = crcs::sample_dataset(tm, n, seed, stream);
    crcs::write_dataset_csv(a.out, d);
    std::printf("wrote %d observations to %s\n", d.n, a.out.c_str());
    return 0;
}

int run_rates(const RatesArgs& a) {
    crcs::RateConfig cfg = crcs::rate_config_from_json(json::parse(crcs::read_text_file(a.config)));
    crcs::RateTable t = crcs::rate_experiment(cfg);
    std::printf("metric slope\n");
    for (const std::pair<std::string, double>& s : t.slopes)
        std::printf("%s %s\n", s.first.c_str(), crcs::fmt17(s.second).c_str());
    if (t.failures > 0)
        std::fprintf(stderr, "%d replications failed and were excluded\n", t.failures);
    if (!a.out_csv.empty()) crcs::write_text_file(a.out_csv, crcs::rate_table_to_csv(t));
    dump_json(a.out_json, crcs::rate_table_to_json(t));
    return 0;
}

int run_minimax(const MinimaxArgs& a) {
    json cfg = json::parse(crcs::read_text_file(a.config));
    crcs::TruthModel tm = crcs::truth_model_from_json(cfg.at("truth"));
    double t0 = cfg.at("t0").get<double>();
    int k = cfg.value("cause", 1);
    int r = cfg.value("r", 1);
    crcs::LocalTruth lt = crcs::local_truth_at(tm, t0);
    crcs::MinimaxBound mb = crcs::minimax_bound(lt, k, r);
    json j{{"d", mb.d},
           {"bound", mb.bound},
           {"single_risk_bound", mb.single_risk_bound},
           {"cause", k},
           {"r", r},
           {"t0", t0}};
    std::printf("d=%s bound=%s single_risk_bound=%s\n", crcs::fmt17(mb.d).c_str(),
                crcs::fmt17(mb.bound).c_str(), crcs::fmt17(mb.single_risk_bound).c_str());
    if (!a.eval_only) {
        double c = cfg.value("c", 1.0);
        int n = cfg.at("n").get<int>();
        int reps = cfg.at("reps").get<int>();
        std::uint64_t seed = cfg.value("seed", 0ULL);
        std::string est = cfg.value("estimator", std::string("mle"));
        crcs::EstimatorKind kind;
        if (est == "naive")
            kind = crcs::EstimatorKind::naive;
        else if (est == "mle")
            kind = crcs::EstimatorKind::mle;
        else
            throw std::invalid_argument("minimax: unknown estimator " + est);
        crcs::TwoPointRisk tp = crcs::two_point_risk(tm, k, c, n, t0, reps, seed, kind, r);
        j["risk_at_F0"] = tp.risk_at_F0;
        j["risk_at_Fnk"] = tp.risk_at_Fnk;
        j["max_risk"] = tp.max_risk;
        j["scaled_max_risk"] = tp.scaled_max_risk;
        j["failures"] = tp.failures;
        std::printf("max_risk=%s scaled=%s failures=%d\n", crcs::fmt17(tp.max_risk).c_str(),
                    crcs::fmt17(tp.scaled_max_risk).c_str(), tp.failures);
    }
    dump_json(a.out, j);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"current status competing risks toolkit"};
    app.require_subcommand(1);

    EstimateArgs ea;
    CLI::App* est = app.add_subcommand("estimate", "fit the naive or maximum likelihood estimator");
    est->add_option("--method", ea.method, "naive or mle")->check(CLI::IsMember({"naive", "mle"}));
    est->add_option("--k", ea.k, "number of competing risks")->required();
    est->add_option("--input", ea.input, "dataset CSV")->required();
    est->add_option("--out", ea.out, "output JSON path");
    est->add_flag("--certify", ea.certify, "fail with exit 4 unless the fit certifies");
    est->add_option("--tol", ea.tol, "certificate tolerance");
    est->add_option("--max-iters", ea.max_iters, "sweep limit");

    CertifyArgs ca;
    CLI::App* cert = app.add_subcommand("certify", "check optimality conditions for a saved fit");
    cert->add_option("--input", ca.input, "estimate JSON")->required();
    cert->add_option("--data", ca.data, "dataset CSV")->required();
    cert->add_option("--k", ca.k, "number of competing risks (default: from the estimate)");
    cert->add_option("--tol", ca.tol, "certificate tolerance");
    cert->add_option("--out", ca.out, "report JSON path");

    MetricsArgs ma;
    CLI::App* met = app.add_subcommand("metrics", "distances between a fit and a truth or baseline");
    met->add_option("--input", ma.input, "estimate JSON")->required();
    met->add_option("--truth", ma.truth, "truth model JSON (also provides g)")->required();
    met->add_option("--baseline", ma.baseline, "compare against this estimate instead of the truth");
    met->add_option("--out", ma.out, "output JSON path");

    SimulateArgs sa;
    CLI::App* sim = app.add_subcommand("simulate", "draw a dataset from a truth model");
    sim->add_option("--config", sa.config, "config JSON with truth, n, seed")->required();
    sim->add_option("--out", sa.out, "dataset CSV path")->required();

    RatesArgs ra;
    CLI::App* rat = app.add_subcommand("rates", "replicate fits over a grid of sample sizes");
    rat->add_option("--config", ra.config, "rate experiment JSON")->required();
    rat->add_option("--out-csv", ra.out_csv, "per-size quantile table CSV");
    rat->add_option("--out-json", ra.out_json, "summary JSON");

    MinimaxArgs xa;
    CLI::App* mm = app.add_subcommand("minimax", "local risk lower bound and two-point risk");
    mm->add_option("--config", xa.config, "config JSON")->required();
    mm->add_option("--out", xa.out, "output JSON path");
    mm->add_flag("--eval-only", xa.eval_only, "only evaluate the bound");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (est->parsed()) return run_estimate(ea);
        if (cert->parsed()) return run_certify(ca);
        if (met->parsed()) return run_metrics(ma);
        if (sim->parsed()) return run_simulate(sa);
        if (rat->parsed()) return run_rates(ra);
        if (mm->parsed()) return run_minimax(xa);
    } catch (const crcs::MleNonConvergence& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
