#include "crcs/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

#include "crcs/certify.hpp"
#include "crcs/metrics.hpp"
#include "crcs/parallel.hpp"
#include "crcs/rng.hpp"

namespace crcs {

namespace {

Dataset sample_core(const TruthModel& tm, const PerturbedTruth* pt, int n, std::uint64_t seed,
                    std::uint64_t stream) {
    validate_truth_model(tm);
    if (n < 1) throw std::invalid_argument("sample_dataset: n must be positive");
    std::vector<double> cum(tm.K);
    double acc = 0.0;
    for (int k = 0; k < tm.K; ++k) {
        acc += tm.p[k];
        cum[k] = acc;
    }
    CounterRng rng(seed, stream);
    std::vector<Observation> raw;
    raw.reserve(n);
    for (int i = 0; i < n; ++i) {
        double t = tm.g.quantile(rng.uniform(i, 0));
        double uy = rng.uniform(i, 1);
        int cause = 0;
        for (int k = 1; k <= tm.K; ++k)
            if (uy < cum[k - 1]) {
                cause = k;
                break;
            }
        int status = 0;
        if (cause > 0) {
            double x = tm.shapes[cause - 1].quantile(rng.uniform(i, 2));
            if (pt != nullptr && cause == pt->k && x > pt->lo() && x <= pt->hi()) x = pt->t0;
            if (x <= t) status = cause;
        }
        Observation o;
        o.time = t;
        o.status = status;
        raw.push_back(o);
    }
    return validate_dataset(raw, tm.K);
}

double fit_component_at(const Dataset& d, EstimatorKind est, int k, double t, double fenchel_tol) {
    if (est == EstimatorKind::naive) return naive_estimate(d).components[k - 1](t);
    EstimateOptions opts;
    opts.fenchel_tol = fenchel_tol;
    return mle_estimate(d, opts).system.components[k - 1](t);
}

std::vector<std::string> metric_names(int K) {
    std::vector<std::string> names = {"hellinger", "l1", "l2"};
    for (int k = 1; k <= K; ++k) names.push_back("err_t0_k" + std::to_string(k));
    for (int k = 1; k <= K; ++k) names.push_back("jump_gap_k" + std::to_string(k));
    for (int k = 1; k <= K; ++k) names.push_back("local_sup_k" + std::to_string(k));
    names.push_back("uniform_stat");
    return names;
}

// Per-replication statistics for one fitted system, in metric_names order.
std::vector<double> eval_system(const SubDistSystem& sys, const TruthModel& tm,
                                const SystemView& tv, const RateConfig& cfg, int n, int* flagged) {
    std::vector<double> out;
    SystemView fv = system_view(sys);
    out.push_back(hellinger(fv, tv, tm.g).value);
    out.push_back(lr_distance(fv, tv, tm.g, 1).value);
    out.push_back(lr_distance(fv, tv, tm.g, 2).value);
    for (int k = 1; k <= tm.K; ++k)
        out.push_back(std::abs(sys.components[k - 1](cfg.t0) - tm.F0k(k, cfg.t0)));
    for (int k = 1; k <= tm.K; ++k) {
        const std::vector<double>& jt = sys.components[k - 1].jump_t;
        auto it = std::upper_bound(jt.begin(), jt.end(), cfg.t0);
        double tplus, tminus;
        bool edge = false;
        if (it == jt.end()) {
            tplus = tm.g.b;
            edge = true;
        } else {
            tplus = *it;
        }
        if (it == jt.begin()) {
            tminus = tm.g.a;
            edge = true;
        } else {
            tminus = *(it - 1);
        }
        if (edge) ++*flagged;
        out.push_back(tplus - tminus);
    }
    double w = std::pow(n, -1.0 / 3.0);
    for (int k = 1; k <= tm.K; ++k) {
        double c0 = tm.F0k(k, cfg.t0);
        const StepFn& f = sys.components[k - 1];
        out.push_back(std::max(std::abs(f(cfg.t0 - w) - c0), std::abs(f(cfg.t0 + w) - c0)));
    }
    out.push_back(uniform_rate_statistic(sys, tm, cfg.t0, cfg.window, n, cfg.beta));
    return out;
}

}  // namespace

Dataset sample_dataset(const TruthModel& tm, int n, std::uint64_t seed, std::uint64_t stream) {
    return sample_core(tm, nullptr, n, seed, stream);
}

Dataset sample_dataset(const PerturbedTruth& pt, int n, std::uint64_t seed, std::uint64_t stream) {
    return sample_core(pt.base, &pt, n, seed, stream);
}

WsValues w_s_processes(const Dataset& d, const TruthModel& tm, const LocalTruth& lt, double t) {
    if (tm.K != d.K) throw std::invalid_argument("w_s_processes: K mismatch");
    if (static_cast<int>(lt.a.size()) != d.K + 1)
        throw std::invalid_argument("w_s_processes: local truth K mismatch");
    WsValues out;
    out.wnk.assign(d.K, 0.0);
    for (const Observation& o : d.obs) {
        if (o.time > t) continue;
        double fplus = 0.0;
        for (int k = 1; k <= d.K; ++k) {
            double f = tm.F0k(k, o.time);
            fplus += f;
            out.wnk[k - 1] += (o.status == k ? 1.0 : 0.0) - f;
        }
        out.wnplus += (o.status != 0 ? 1.0 : 0.0) - fplus;
    }
    for (double& w : out.wnk) w /= d.n;
    out.wnplus /= d.n;
    for (int k = 0; k < d.K; ++k) out.snk.push_back(lt.a[k] * out.wnk[k] + lt.a[d.K] * out.wnplus);
    return out;
}

double vn_envelope(int n, double t, double beta) {
    if (n < 1) throw std::invalid_argument("vn_envelope: n must be positive");
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("vn_envelope: beta must be in (0,1]");
    double n13 = std::pow(n, -1.0 / 3.0);
    double at = std::abs(t);
    if (at <= n13) return n13;
    return std::pow(n, -(1.0 - beta) / 3.0) * std::pow(at, beta);
}

double uniform_rate_statistic(const SubDistSystem& est, const TruthModel& tm, double t0, double r,
                              int n, double beta) {
    validate_truth_model(tm);
    if (!(r > 0.0)) throw std::invalid_argument("uniform_rate_statistic: window half-width must be positive");
    SumView sv = system_sum(est);
    double lo = t0 - r, hi = t0 + r;
    double best = 0.0;
    auto consider = [&](double t, double fhat) {
        double ratio = std::abs(fhat - tm.F0plus(t)) / vn_envelope(n, t - t0, beta);
        if (ratio > best) best = ratio;
    };
    const StepFn& tot = sv.total;
    for (double t : tot.jump_t) {
        if (t < lo || t > hi) continue;
        consider(t, tot(t));
        consider(t, tot.left_limit(t));
    }
    for (int i = 0; i < 512; ++i) {
        double t = lo + (hi - lo) * i / 511.0;
        consider(t, tot(t));
    }
    return best;
}

PerturbedTruth minimax_perturbation(const TruthModel& tm, int k, double c, int n, double t0) {
    local_truth_at(tm, t0);
    if (k < 1 || k > tm.K) throw std::invalid_argument("minimax_perturbation: cause out of range");
    if (!(c > 0.0 && std::isfinite(c)))
        throw std::invalid_argument("minimax_perturbation: c must be positive");
    if (n < 1) throw std::invalid_argument("minimax_perturbation: n must be positive");
    double eps = c * std::pow(n, -1.0 / 3.0);
    if (!(t0 - eps >= tm.g.a && t0 + eps <= tm.g.b))
        throw std::invalid_argument("minimax_perturbation: window leaves the observation support");
    PerturbedTruth pt;
    pt.base = tm;
    pt.k = k;
    pt.t0 = t0;
    pt.eps = eps;
    return pt;
}

MinimaxBound minimax_bound(const LocalTruth& lt, int k, int r) {
    if (k < 1 || k > static_cast<int>(lt.F0k_at_t0.size()))
        throw std::invalid_argument("minimax_bound: cause out of range");
    if (r < 1) throw std::invalid_argument("minimax_bound: r must be a positive integer");
    MinimaxBound out;
    out.d = std::pow(2.0, -5.0 / 3.0) * std::exp(-1.0 / 3.0);
    double fk = lt.F0k_at_t0[k - 1];
    double dens = lt.f0k_at_t0[k - 1];
    double dr = std::pow(out.d, r);
    double joint = (lt.g_at_t0 / dens) * (1.0 / fk + 1.0 / (1.0 - lt.F0plus_at_t0));
    double single = (lt.g_at_t0 / dens) * (1.0 / fk + 1.0 / (1.0 - fk));
    out.bound = dr * std::pow(joint, -r / 3.0);
    out.single_risk_bound = dr * std::pow(single, -r / 3.0);
    return out;
}

TwoPointRisk two_point_risk(const TruthModel& tm, int k, double c, int n, double t0, int reps,
                            std::uint64_t seed, EstimatorKind est, int r) {
    if (reps < 1) throw std::invalid_argument("two_point_risk: reps must be positive");
    if (r < 1) throw std::invalid_argument("two_point_risk: r must be a positive integer");
    PerturbedTruth pt = minimax_perturbation(tm, k, c, n, t0);
    LocalTruth lt = local_truth_at(tm, t0);
    double target0 = tm.F0k(k, t0);
    double target1 = pt.F0k(k, t0);
    struct Slot {
        bool ok = false;
        double e0 = 0.0, e1 = 0.0;
    };
    std::vector<Slot> slots(reps);
    parallel_for(reps, [&](int rep) {
        Slot s;
        try {
            Dataset d0 = sample_dataset(tm, n, seed, 2ULL * rep);
            Dataset d1 = sample_dataset(pt, n, seed, 2ULL * rep + 1ULL);
            double v0 = fit_component_at(d0, est, k, t0, 1e-8);
            double v1 = fit_component_at(d1, est, k, t0, 1e-8);
            s.e0 = std::pow(std::abs(v0 - target0), r);
            s.e1 = std::pow(std::abs(v1 - target1), r);
            s.ok = true;
        } catch (const MleNonConvergence&) {
            s.ok = false;
        }
        slots[rep] = s;
    });
    TwoPointRisk out;
    int kept = 0;
    for (const Slot& s : slots) {
        if (!s.ok) {
            ++out.failures;
            continue;
        }
        out.risk_at_F0 += s.e0;
        out.risk_at_Fnk += s.e1;
        ++kept;
    }
    if (kept == 0) throw std::runtime_error("two_point_risk: every replication failed");
    out.risk_at_F0 /= kept;
    out.risk_at_Fnk /= kept;
    out.max_risk = std::max(out.risk_at_F0, out.risk_at_Fnk);
    out.scaled_max_risk = std::pow(n, r / 3.0) * out.max_risk;
    out.bound = minimax_bound(lt, k, r).bound;
    return out;
}

RateTable rate_experiment(const RateConfig& cfg) {
    validate_truth_model(cfg.tm);
    if (cfg.n_grid.size() < 2)
        throw std::invalid_argument("rate_experiment: n_grid needs at least two sizes");
    for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
        if (cfg.n_grid[i] < 10) throw std::invalid_argument("rate_experiment: sample sizes must be at least 10");
        if (i > 0 && cfg.n_grid[i] <= cfg.n_grid[i - 1])
            throw std::invalid_argument("rate_experiment: n_grid must be strictly increasing");
    }
    if (cfg.reps < 20) throw std::invalid_argument("rate_experiment: at least 20 replications");
    if (!cfg.run_naive && !cfg.run_mle)
        throw std::invalid_argument("rate_experiment: no estimator selected");
    local_truth_at(cfg.tm, cfg.t0);

    std::vector<std::string> names = metric_names(cfg.tm.K);
    SystemView tv = truth_view(cfg.tm);
    RateTable table;

    struct RepResult {
        bool failed = false;
        std::string note;
        int flagged = 0;
        std::vector<double> vals[2];
    };

    for (int n : cfg.n_grid) {
        std::vector<RepResult> res(cfg.reps);
        parallel_for(cfg.reps, [&](int rep) {
            RepResult rr;
            try {
                std::uint64_t stream = (static_cast<std::uint64_t>(n) << 20) + rep;
                Dataset d = sample_dataset(cfg.tm, n, cfg.base_seed, stream);
                if (cfg.run_naive) {
                    SubDistSystem sys = naive_estimate(d).as_cone_system();
                    rr.vals[0] = eval_system(sys, cfg.tm, tv, cfg, n, &rr.flagged);
                }
                if (cfg.run_mle) {
                    EstimateOptions opts;
                    opts.fenchel_tol = cfg.fenchel_tol;
                    SubDistSystem sys = mle_estimate(d, opts).system;
                    rr.vals[1] = eval_system(sys, cfg.tm, tv, cfg, n, &rr.flagged);
                }
            } catch (const std::exception& e) {
                rr.failed = true;
                rr.note = "n=" + std::to_string(n) + " rep=" + std::to_string(rep) + ": " + e.what();
            }
            res[rep] = std::move(rr);
        });
        for (int est = 0; est < 2; ++est) {
            if ((est == 0 && !cfg.run_naive) || (est == 1 && !cfg.run_mle)) continue;
            for (std::size_t mi = 0; mi < names.size(); ++mi) {
                std::vector<double> vals;
                for (const RepResult& rr : res)
                    if (!rr.failed) vals.push_back(rr.vals[est][mi]);
                if (vals.empty()) continue;
                RateRow row;
                row.n = n;
                row.metric = (est == 0 ? "naive_" : "mle_") + names[mi];
                row.q25 = quantile_type7(vals, 0.25);
                row.median = quantile_type7(vals, 0.5);
                row.q75 = quantile_type7(vals, 0.75);
                table.rows.push_back(row);
            }
        }
        for (const RepResult& rr : res) {
            if (rr.failed) {
                ++table.failures;
                table.failure_notes.push_back(rr.note);
            }
            table.flagged += rr.flagged;
        }
    }

    for (int est = 0; est < 2; ++est) {
        if ((est == 0 && !cfg.run_naive) || (est == 1 && !cfg.run_mle)) continue;
        for (const std::string& name : names) {
            std::string full = (est == 0 ? "naive_" : "mle_") + name;
            std::vector<double> xs, ys;
            for (const RateRow& row : table.rows)
                if (row.metric == full && row.median > 0.0) {
                    xs.push_back(std::log(static_cast<double>(row.n)));
                    ys.push_back(std::log(row.median));
                }
            table.slopes.emplace_back(full, ols_slope(xs, ys));
        }
    }
    return table;
}

double quantile_type7(std::vector<double> v, double p) {
    if (v.empty()) throw std::invalid_argument("quantile_type7: empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile_type7: p must be in [0,1]");
    std::sort(v.begin(), v.end());
    double h = (v.size() - 1) * p;
    std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] + (h - lo) * (v[lo + 1] - v[lo]);
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("ols_slope: length mismatch");
    if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= x.size();
    my /= y.size();
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sxy / sxx;
}

}  // namespace crcs
