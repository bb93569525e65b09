#include "crcs/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "crcs/isotonic.hpp"

namespace crcs {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPosInf = std::numeric_limits<double>::infinity();
// Collapses float noise between pooled coordinate values when the iterate
// is turned into a step function; genuine jumps are far larger.
constexpr double kJumpMergeEps = 1e-10;
// Sweep movement below this counts as a stall; together with a passing
// certificate it terminates the ascent.
constexpr double kStallTol = 1e-13;
constexpr int kInnerMax = 40;
constexpr double kInnerStall = 1e-15;
// Sweep movement below this with a failing certificate switches to the
// stationarity polish; block steps compare criterion values and cannot
// resolve increments below one ulp of the criterion.
constexpr double kPolishTrigger = 1e-5;

// ---- naive estimator ----

std::vector<std::vector<double>> naive_values(const Dataset& d) {
    const int m = d.m();
    std::vector<double> w(m), y(m);
    for (int j = 0; j < m; ++j) w[j] = d.total_at(j);
    std::vector<std::vector<double>> vals(d.K);
    for (int k = 1; k <= d.K; ++k) {
        for (int j = 0; j < m; ++j) y[j] = d.count_at(j, k) / w[j];
        vals[k - 1] = gcm_left_slopes(make_cum_sum_diagram(w, y));
    }
    return vals;
}

double marginal_loglik(const Dataset& d, int k, const std::vector<double>& v) {
    double acc = 0.0;
    for (int j = 0; j < d.m(); ++j) {
        double c = d.count_at(j, k);
        double rest = d.total_at(j) - c;
        if (c > 0.0) {
            if (!(v[j] > 0.0)) return kNegInf;
            acc += c * std::log(v[j]);
        }
        if (rest > 0.0) {
            if (!(v[j] < 1.0)) return kNegInf;
            acc += rest * std::log(1.0 - v[j]);
        }
    }
    return acc / d.n;
}

// ---- MLE via block coordinate ascent on the cone criterion ----
//
// State: per cause a value chain on that cause's grid (times carrying
// cause-k or survival mass), plus one shared tail mass tau beyond t_max.
// A block step optimizes one chain together with s = last value + tau
// through a diagonal quadratic model projected onto the order cone, with
// Armijo backtracking. After each sweep the scalar tau is re-optimized
// exactly, which drives beta to its sign law at machine precision.

struct Block {
    int k = 0;                  // cause, 1..K
    std::vector<int> jidx;      // time indices of the grid
    std::vector<double> ck;     // cause-k counts on the grid
    std::vector<int> sidx;      // grid position -> survival entry, -1 if none
    std::vector<int> surv_pos;  // survival entry -> grid position
};

struct Work {
    const Dataset* d = nullptr;
    int K = 0, m = 0, n = 0;
    bool any_surv = false;
    std::vector<int> surv_j;     // time indices with survival mass
    std::vector<double> surv_c;  // survival counts there
    std::vector<std::vector<int>> pos;  // pos[k-1][j]: grid slot covering t_j, -1 below grid
    std::vector<char> skipped;          // cause has no observations at all
    std::vector<Block> blocks;          // non-skipped causes only
    std::vector<std::vector<double>> u; // values per cause (empty when skipped)
    double tau = 0.0;

    double back(int k1) const {  // component value at t_max, 1-based cause
        const auto& v = u[k1 - 1];
        return v.empty() ? 0.0 : v.back();
    }
    double total_back() const {
        double s = 0.0;
        for (int k = 1; k <= K; ++k) s += back(k);
        return s;
    }
};

Work build_work(const Dataset& d) {
    Work wk;
    wk.d = &d;
    wk.K = d.K;
    wk.m = d.m();
    wk.n = d.n;
    for (int j = 0; j < wk.m; ++j)
        if (d.count_at(j, 0) > 0) {
            wk.surv_j.push_back(j);
            wk.surv_c.push_back(d.count_at(j, 0));
        }
    wk.any_surv = !wk.surv_j.empty();
    wk.pos.assign(wk.K, std::vector<int>(wk.m, -1));
    wk.skipped.assign(wk.K, 0);
    wk.u.assign(wk.K, {});
    for (int k = 1; k <= wk.K; ++k) {
        if (d.cause_total(k) == 0) {
            wk.skipped[k - 1] = 1;
            continue;
        }
        Block b;
        b.k = k;
        for (int j = 0; j < wk.m; ++j)
            if (d.count_at(j, k) > 0 || d.count_at(j, 0) > 0) b.jidx.push_back(j);
        int cur = -1;
        size_t next = 0;
        for (int j = 0; j < wk.m; ++j) {
            if (next < b.jidx.size() && b.jidx[next] == j) cur = static_cast<int>(next++);
            wk.pos[k - 1][j] = cur;
        }
        b.ck.resize(b.jidx.size());
        b.sidx.assign(b.jidx.size(), -1);
        for (size_t a = 0; a < b.jidx.size(); ++a) b.ck[a] = d.count_at(b.jidx[a], k);
        b.surv_pos.resize(wk.surv_j.size());
        for (size_t i = 0; i < wk.surv_j.size(); ++i) {
            int a = wk.pos[k - 1][wk.surv_j[i]];
            b.surv_pos[i] = a;   // survival times always lie on the grid
            b.sidx[a] = static_cast<int>(i);
        }
        wk.u[k - 1].assign(b.jidx.size(), 0.0);
        wk.blocks.push_back(std::move(b));
    }
    return wk;
}

// Terms of the cone criterion that involve block b, as a function of its
// chain z (values followed by s when survival mass exists anywhere).
double block_partial(const Work& wk, const Block& b, const std::vector<double>& base,
                     double other_inf, const std::vector<double>& z) {
    const size_t mk = b.jidx.size();
    double acc = 0.0;
    for (size_t a = 0; a < mk; ++a)
        if (b.ck[a] > 0.0) {
            if (!(z[a] > 0.0)) return kNegInf;
            acc += b.ck[a] * std::log(z[a]);
        }
    double top = z.back();  // s when survival exists, else last value
    if (wk.any_surv) {
        for (size_t i = 0; i < wk.surv_j.size(); ++i) {
            double s = base[i] + top - z[b.surv_pos[i]];
            if (!(s > 0.0)) return kNegInf;
            acc += wk.surv_c[i] * std::log(s);
        }
    }
    return acc / wk.n - (other_inf + top);
}

// One inner iteration: diagonal quadratic model, order-cone projection,
// Armijo backtracking. Returns the max coordinate movement.
double block_inner_step(Work& wk, const Block& b, const std::vector<double>& base,
                        double other_inf, double guard, std::vector<double>& z) {
    const size_t mk = b.jidx.size();
    const size_t L = z.size();
    const double nd = wk.n;
    std::vector<double> g(L), w(L);
    const double ztop = z.back();
    for (size_t a = 0; a < mk; ++a) {
        double gg = 0.0, ww = 0.0;
        if (b.ck[a] > 0.0) {
            gg += b.ck[a] / z[a];
            ww += b.ck[a] / (z[a] * z[a]);
        }
        if (b.sidx[a] >= 0) {
            int i = b.sidx[a];
            double s = base[i] + ztop - z[a];
            gg -= wk.surv_c[i] / s;
            ww += wk.surv_c[i] / (s * s);
        }
        g[a] = gg / nd;
        w[a] = ww / nd;
        if (!wk.any_surv && a + 1 == mk) g[a] -= 1.0;  // d(-F_+(inf))/dv_last
    }
    if (wk.any_surv) {
        double sg = 0.0, sw = 0.0;
        for (size_t i = 0; i < wk.surv_j.size(); ++i) {
            double s = base[i] + ztop - z[b.surv_pos[i]];
            sg += wk.surv_c[i] / s;
            sw += wk.surv_c[i] / (s * s);
        }
        g[L - 1] = sg / nd - 1.0;
        w[L - 1] = sw / nd;
    }

    std::vector<double> y(L);
    for (size_t a = 0; a < L; ++a) y[a] = z[a] + g[a] / w[a];
    std::vector<double> p = weighted_isotonic(y, w);
    for (size_t a = 0; a < L; ++a) {
        if (p[a] < 0.0) p[a] = 0.0;  // constant lower bound: clipping is exact
        if (a < mk && b.ck[a] > 0.0 && p[a] < guard) p[a] = guard;
        if (a > 0 && p[a] < p[a - 1]) p[a] = p[a - 1];
    }

    double gtd = 0.0, dmax = 0.0;
    for (size_t a = 0; a < L; ++a) {
        gtd += g[a] * (p[a] - z[a]);
        dmax = std::max(dmax, std::abs(p[a] - z[a]));
    }
    if (!(gtd > 0.0) || dmax == 0.0) return 0.0;

    const double f0 = block_partial(wk, b, base, other_inf, z);
    std::vector<double> zt(L);
    double lam = 1.0;
    for (int h = 0; h < 60; ++h) {
        for (size_t a = 0; a < L; ++a) zt[a] = z[a] + lam * (p[a] - z[a]);
        double f1 = block_partial(wk, b, base, other_inf, zt);
        if (f1 >= f0 + 0.1 * lam * gtd) {
            z.swap(zt);
            return lam * dmax;
        }
        lam *= 0.5;
    }
    return 0.0;
}

double visit_block(Work& wk, const Block& b, double guard) {
    const size_t mk = b.jidx.size();
    const size_t L = mk + (wk.any_surv ? 1 : 0);
    // Residual survivor mass contributed by the other causes at each
    // survival time; nonnegative by construction.
    std::vector<double> base(wk.surv_j.size(), 0.0);
    for (int k2 = 1; k2 <= wk.K; ++k2) {
        if (k2 == b.k || wk.skipped[k2 - 1]) continue;
        const auto& v = wk.u[k2 - 1];
        for (size_t i = 0; i < wk.surv_j.size(); ++i) {
            int a = wk.pos[k2 - 1][wk.surv_j[i]];
            double diff = v.back() - (a >= 0 ? v[a] : 0.0);
            base[i] += diff > 0.0 ? diff : 0.0;
        }
    }
    double other_inf = wk.total_back() - wk.back(b.k);

    std::vector<double> z(L);
    std::copy(wk.u[b.k - 1].begin(), wk.u[b.k - 1].end(), z.begin());
    if (wk.any_surv) z[L - 1] = z[mk - 1] + wk.tau;

    double moved = 0.0;
    for (int it = 0; it < kInnerMax; ++it) {
        double step = block_inner_step(wk, b, base, other_inf, guard, z);
        moved = std::max(moved, step);
        if (step <= kInnerStall) break;
    }
    std::copy(z.begin(), z.begin() + mk, wk.u[b.k - 1].begin());
    if (wk.any_surv) wk.tau = std::max(0.0, z[L - 1] - z[mk - 1]);
    return moved;
}

// Exact scalar maximization over the tail mass; phi'(tau) = -beta(tau),
// so the optimum enforces beta >= 0 with equality iff tau > 0.
double polish_tail(Work& wk) {
    if (!wk.any_surv) {
        double old = wk.tau;
        wk.tau = 0.0;
        return old;
    }
    const double nd = wk.n;
    std::vector<double> dres(wk.surv_j.size(), 0.0);
    for (int k = 1; k <= wk.K; ++k) {
        if (wk.skipped[k - 1]) continue;
        const auto& v = wk.u[k - 1];
        for (size_t i = 0; i < wk.surv_j.size(); ++i) {
            int a = wk.pos[k - 1][wk.surv_j[i]];
            double diff = v.back() - (a >= 0 ? v[a] : 0.0);
            dres[i] += diff > 0.0 ? diff : 0.0;
        }
    }
    auto dphi = [&](double t) {
        double s = 0.0;
        for (size_t i = 0; i < dres.size(); ++i) {
            double den = dres[i] + t;
            if (!(den > 0.0)) return kPosInf;
            s += wk.surv_c[i] / den;
        }
        return s / nd - 1.0;
    };
    double old = wk.tau;
    if (dphi(0.0) <= 0.0) {
        wk.tau = 0.0;
        return std::abs(old);
    }
    double lo = 0.0, hi = std::max(1.0, 2.0 * wk.tau);
    for (int i = 0; i < 80 && dphi(hi) > 0.0; ++i) hi *= 2.0;
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double f = dphi(t);
        if (std::abs(f) <= 1e-15) break;
        if (f > 0.0) lo = t; else hi = t;
        double fp = 0.0;
        for (size_t i = 0; i < dres.size(); ++i) {
            double den = dres[i] + t;
            fp -= wk.surv_c[i] / (den * den);
        }
        fp /= nd;
        double tn = t - f / fp;
        if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
        if (std::abs(tn - t) <= 1e-17 * (1.0 + tn)) {
            t = tn;
            break;
        }
        t = tn;
    }
    wk.tau = t;
    return std::abs(t - old);
}

// Damped Newton solve of the stationarity system over the level runs of
// every chain, plus the tail when positive. Block sweeps accept steps by
// comparing criterion values, so they park once improvements fall below
// one ulp of the criterion, which leaves certificate gaps near the square
// root of machine epsilon; the stationarity residual is a gradient and
// stays well scaled there. Level boundaries are kept fixed: zero runs
// stay pinned and run order must be preserved. Leaves the state untouched
// when the solve degenerates or no damped step is acceptable.
double newton_polish(Work& wk) {
    struct PRun {
        size_t bi = 0, lo = 0, hi = 0;
        double cmass = 0.0;
        bool last = false;
        int var = -1;
    };
    std::vector<PRun> runs;
    std::vector<std::vector<int>> slot_run(wk.blocks.size());
    std::vector<int> last_run(wk.blocks.size(), -1);
    int nvar = 0;
    for (size_t bi = 0; bi < wk.blocks.size(); ++bi) {
        const Block& b = wk.blocks[bi];
        const auto& u = wk.u[b.k - 1];
        slot_run[bi].assign(u.size(), -1);
        size_t a = 0;
        while (a < u.size()) {
            size_t e = a;
            while (e + 1 < u.size() && u[e + 1] == u[a]) ++e;
            PRun r;
            r.bi = bi;
            r.lo = a;
            r.hi = e;
            for (size_t q = a; q <= e; ++q) r.cmass += b.ck[q];
            r.last = e + 1 == u.size();
            if (u[a] > 0.0) r.var = nvar++;
            int id = static_cast<int>(runs.size());
            for (size_t q = a; q <= e; ++q) slot_run[bi][q] = id;
            if (r.last) last_run[bi] = id;
            runs.push_back(r);
            a = e + 1;
        }
    }
    const bool tau_free = wk.any_surv && wk.tau > 0.0;
    const int tvar = tau_free ? nvar++ : -1;
    if (nvar == 0) return 0.0;

    std::vector<double> rv(runs.size());
    for (size_t r = 0; r < runs.size(); ++r) rv[r] = wk.u[wk.blocks[runs[r].bi].k - 1][runs[r].lo];

    // Survivor mass per survival entry as an affine map of the free
    // variables; a fixed tail or a below-grid cause folds into the offset.
    const size_t ns = wk.surv_j.size();
    std::vector<std::vector<std::pair<int, double>>> coef(ns);
    std::vector<double> off(ns, 0.0);
    for (size_t i = 0; i < ns; ++i) {
        if (tau_free)
            coef[i].push_back({tvar, 1.0});
        else
            off[i] += wk.tau;
        for (size_t bi = 0; bi < wk.blocks.size(); ++bi) {
            const Block& b = wk.blocks[bi];
            int lr = last_run[bi];
            int cr = b.surv_pos[i] >= 0 ? slot_run[bi][b.surv_pos[i]] : -1;
            if (cr == lr) continue;
            if (runs[lr].var < 0) return 0.0;  // all-zero chain, nothing to polish
            coef[i].push_back({runs[lr].var, 1.0});
            if (cr >= 0) {
                if (runs[cr].var >= 0)
                    coef[i].push_back({runs[cr].var, -1.0});
                else
                    off[i] -= rv[cr];
            }
        }
    }

    std::vector<double> x(nvar);
    for (size_t r = 0; r < runs.size(); ++r)
        if (runs[r].var >= 0) x[runs[r].var] = rv[r];
    if (tau_free) x[tvar] = wk.tau;

    const double nd = wk.n;
    auto surv_at = [&](const std::vector<double>& xx, size_t i) {
        double s = off[i];
        for (const auto& [v, c] : coef[i]) s += c * xx[v];
        return s;
    };
    auto phi = [&](const std::vector<double>& xx) {
        double acc = 0.0, top = tau_free ? xx[tvar] : wk.tau;
        for (size_t r = 0; r < runs.size(); ++r) {
            double v = runs[r].var >= 0 ? xx[runs[r].var] : rv[r];
            if (runs[r].cmass > 0.0) {
                if (!(v > 0.0)) return kNegInf;
                acc += runs[r].cmass * std::log(v);
            }
            if (runs[r].last) top += v;
        }
        for (size_t i = 0; i < ns; ++i) {
            double s = surv_at(xx, i);
            if (!(s > 0.0)) return kNegInf;
            acc += wk.surv_c[i] * std::log(s);
        }
        return acc / nd - top;
    };
    auto feasible = [&](const std::vector<double>& xx) {
        for (size_t r = 0; r < runs.size(); ++r) {
            if (runs[r].var < 0) continue;
            double v = xx[runs[r].var];
            if (!(v > 0.0)) return false;
            if (r > 0 && runs[r - 1].bi == runs[r].bi) {
                double pv = runs[r - 1].var >= 0 ? xx[runs[r - 1].var] : rv[r - 1];
                if (!(v > pv)) return false;
            }
        }
        if (tau_free && !(xx[tvar] >= 0.0)) return false;
        return true;
    };

    std::vector<double> g(nvar), hess(static_cast<size_t>(nvar) * nvar), del(nvar), xt(nvar);
    double moved = 0.0;
    double f0 = phi(x);
    if (f0 == kNegInf) return 0.0;
    for (int it = 0; it < 60; ++it) {
        std::fill(g.begin(), g.end(), 0.0);
        std::fill(hess.begin(), hess.end(), 0.0);
        for (const PRun& r : runs) {
            if (r.var < 0) continue;
            double v = x[r.var];
            if (r.cmass > 0.0) {
                g[r.var] += r.cmass / v / nd;
                hess[static_cast<size_t>(r.var) * nvar + r.var] -= r.cmass / (v * v) / nd;
            }
            if (r.last) g[r.var] -= 1.0;
        }
        if (tau_free) g[tvar] -= 1.0;
        for (size_t i = 0; i < ns; ++i) {
            double s = surv_at(x, i);
            if (!(s > 0.0)) return moved;
            double gs = wk.surv_c[i] / s / nd;
            double ws = wk.surv_c[i] / (s * s) / nd;
            for (const auto& [v1, c1] : coef[i]) {
                g[v1] += c1 * gs;
                for (const auto& [v2, c2] : coef[i])
                    hess[static_cast<size_t>(v1) * nvar + v2] -= c1 * c2 * ws;
            }
        }
        double gmax = 0.0;
        for (double gv : g) gmax = std::max(gmax, std::abs(gv));
        if (gmax <= 1e-15) break;

        // Gaussian elimination with partial pivoting on H del = -g.
        for (int c = 0; c < nvar; ++c) del[c] = -g[c];
        for (int c = 0; c < nvar; ++c) {
            int piv = c;
            for (int r2 = c + 1; r2 < nvar; ++r2)
                if (std::abs(hess[static_cast<size_t>(r2) * nvar + c]) >
                    std::abs(hess[static_cast<size_t>(piv) * nvar + c]))
                    piv = r2;
            if (hess[static_cast<size_t>(piv) * nvar + c] == 0.0) return moved;
            if (piv != c) {
                for (int c2 = c; c2 < nvar; ++c2)
                    std::swap(hess[static_cast<size_t>(piv) * nvar + c2],
                              hess[static_cast<size_t>(c) * nvar + c2]);
                std::swap(del[piv], del[c]);
            }
            double pv = hess[static_cast<size_t>(c) * nvar + c];
            for (int r2 = c + 1; r2 < nvar; ++r2) {
                double f = hess[static_cast<size_t>(r2) * nvar + c] / pv;
                if (f == 0.0) continue;
                for (int c2 = c; c2 < nvar; ++c2)
                    hess[static_cast<size_t>(r2) * nvar + c2] -=
                        f * hess[static_cast<size_t>(c) * nvar + c2];
                del[r2] -= f * del[c];
            }
        }
        for (int c = nvar - 1; c >= 0; --c) {
            double s = del[c];
            for (int c2 = c + 1; c2 < nvar; ++c2)
                s -= hess[static_cast<size_t>(c) * nvar + c2] * del[c2];
            del[c] = s / hess[static_cast<size_t>(c) * nvar + c];
        }

        double dmax = 0.0;
        for (double dv : del) dmax = std::max(dmax, std::abs(dv));
        if (!(dmax > 0.0) || !std::isfinite(dmax)) break;

        double lam = 1.0;
        bool accepted = false;
        for (int h = 0; h < 60; ++h, lam *= 0.5) {
            for (int c = 0; c < nvar; ++c) xt[c] = x[c] + lam * del[c];
            if (tau_free && xt[tvar] < 0.0) xt[tvar] = 0.0;
            if (!feasible(xt)) continue;
            double f1 = phi(xt);
            if (f1 >= f0 - 1e-12 * (1.0 + std::abs(f0))) {
                double step = 0.0;
                for (int c = 0; c < nvar; ++c) step = std::max(step, std::abs(xt[c] - x[c]));
                x.swap(xt);
                f0 = f1;
                moved = std::max(moved, step);
                accepted = true;
                if (step <= 1e-17 * (1.0 + dmax)) it = 60;
                break;
            }
        }
        if (!accepted) break;
    }
    if (moved == 0.0) return 0.0;

    for (const PRun& r : runs)
        if (r.var >= 0) {
            auto& u = wk.u[wk.blocks[r.bi].k - 1];
            for (size_t q = r.lo; q <= r.hi; ++q) u[q] = x[r.var];
        }
    if (tau_free) wk.tau = std::max(0.0, x[tvar]);
    return moved;
}

SubDistSystem iterate_system(const Work& wk, double sum_tolerance) {
    std::vector<double> share(wk.K, 0.0);
    if (wk.tau > 0.0) {
        double tot = 0.0;
        for (int k = 1; k <= wk.K; ++k) {
            const auto& v = wk.u[k - 1];
            if (v.empty()) continue;
            double last = v.back() - (v.size() >= 2 ? v[v.size() - 2] : 0.0);
            share[k - 1] = last > 0.0 ? last : 0.0;
            tot += share[k - 1];
        }
        for (int k = 1; k <= wk.K; ++k)
            share[k - 1] = tot > 0.0 ? wk.tau * share[k - 1] / tot : wk.tau / wk.K;
    }
    SubDistSystem sys;
    sys.K = wk.K;
    sys.sum_tolerance = sum_tolerance;
    sys.components.resize(wk.K);
    size_t bi = 0;
    for (int k = 1; k <= wk.K; ++k) {
        if (wk.skipped[k - 1]) {
            sys.components[k - 1] = StepFn{0.0, {}, {}, share[k - 1]};
            continue;
        }
        const Block& b = wk.blocks[bi++];
        std::vector<double> t(b.jidx.size());
        for (size_t a = 0; a < t.size(); ++a) t[a] = wk.d->times[b.jidx[a]];
        sys.components[k - 1] =
            make_step_fn(t, wk.u[k - 1], 0.0, share[k - 1], kJumpMergeEps);
    }
    return sys;
}

double report_violation(const FenchelReport& r) {
    double v = 0.0;
    for (const auto& pc : r.per_cause)
        v = std::max({v, pc.max_inequality_violation, pc.max_equality_gap});
    return v;
}

// ---- brute force oracle helpers ----

// The oracle works on per-cause jump masses rather than values: with
// p >= 0 and sum p <= 1, every chain is monotone, capped by one, and
// every column sum stays capped as well, because each column sum is a
// partial sum of p. The feasible set is a scaled simplex with an exact
// finite projection; no solver code is shared with the ICM.
void oracle_simplex_project(std::vector<double>& p) {
    double s = 0.0;
    for (double z : p) s += std::max(z, 0.0);
    if (s <= 1.0) {
        for (double& z : p) z = std::max(z, 0.0);
        return;
    }
    std::vector<double> srt(p);
    std::sort(srt.begin(), srt.end(), std::greater<double>());
    double cum = 0.0, theta = 0.0;
    for (size_t i = 0; i < srt.size(); ++i) {
        cum += srt[i];
        double th = (cum - 1.0) / (i + 1.0);
        if (srt[i] - th > 0.0)
            theta = th;
        else
            break;
    }
    for (double& z : p) z = std::max(z - theta, 0.0);
}

// Values at the observation times from jump masses, cause by cause.
void oracle_values(const std::vector<double>& p, int K, int m, std::vector<double>& f) {
    for (int k = 0; k < K; ++k) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j) {
            acc += p[k * m + j];
            f[k * m + j] = acc;
        }
    }
}

double oracle_loglik(const Dataset& d, const std::vector<double>& v) {
    const int K = d.K, m = d.m();
    double acc = 0.0;
    for (int j = 0; j < m; ++j) {
        double col = 0.0;
        for (int k = 1; k <= K; ++k) {
            double f = v[(k - 1) * m + j];
            col += f;
            double c = d.count_at(j, k);
            if (c > 0.0) {
                if (!(f > 0.0)) return kNegInf;
                acc += c * std::log(f);
            }
        }
        double c0 = d.count_at(j, 0);
        if (c0 > 0.0) {
            if (!(col < 1.0)) return kNegInf;
            acc += c0 * std::log(1.0 - col);
        }
    }
    return acc / d.n;
}

}  // namespace

NaiveResult naive_estimate(const Dataset& d) {
    auto vals = naive_values(d);
    NaiveResult out;
    out.components.reserve(d.K);
    out.per_cause_loglik.resize(d.K);
    for (int k = 1; k <= d.K; ++k) {
        out.components.push_back(make_step_fn(d.times, vals[k - 1]));
        out.per_cause_loglik[k - 1] = marginal_loglik(d, k, vals[k - 1]);
    }
    for (int j = 0; j < d.m(); ++j) {
        double s = 0.0;
        for (int k = 0; k < d.K; ++k) s += vals[k][j];
        if (s > 1.0 + 1e-12) out.sum_violations.emplace_back(d.times[j], s);
    }
    return out;
}

SubDistSystem NaiveResult::as_cone_system() const {
    SubDistSystem s;
    s.K = static_cast<int>(components.size());
    s.components = components;
    s.sum_tolerance = kPosInf;
    return s;
}

MleResult mle_estimate(const Dataset& d, const EstimateOptions& opts) {
    if (!(opts.fenchel_tol > 0.0)) throw std::invalid_argument("fenchel_tol must be positive");
    if (opts.max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
    if (!(opts.interior_guard > 0.0))
        throw std::invalid_argument("interior_guard must be positive");

    Work wk = build_work(d);

    // Start from the naive fit, shrunk inside the constraint and floored
    // away from zero at points carrying cause mass.
    {
        auto vals = naive_values(d);
        double max_plus = 0.0;
        for (int j = 0; j < wk.m; ++j) {
            double s = 0.0;
            for (int k = 0; k < wk.K; ++k) s += vals[k][j];
            max_plus = std::max(max_plus, s);
        }
        double rho = (1.0 - 1e-6) / std::max(1.0, max_plus);
        for (const Block& b : wk.blocks) {
            auto& u = wk.u[b.k - 1];
            for (size_t a = 0; a < b.jidx.size(); ++a) {
                u[a] = rho * vals[b.k - 1][b.jidx[a]];
                if (b.ck[a] > 0.0 && u[a] < opts.interior_guard) u[a] = opts.interior_guard;
                if (a > 0 && u[a] < u[a - 1]) u[a] = u[a - 1];
            }
        }
        if (wk.any_surv) {
            double fp = 0.0;
            for (int k = 1; k <= wk.K; ++k) fp += wk.back(k);
            wk.tau = std::max(1.0 - fp, opts.interior_guard);
        }
    }

    SubDistSystem sys;
    FenchelReport rep;
    int sweeps = 0;
    int dead_sweeps = 0;
    double last_viol = kPosInf;
    while (sweeps < opts.max_iters) {
        ++sweeps;
        double moved = 0.0;
        for (const Block& b : wk.blocks)
            moved = std::max(moved, visit_block(wk, b, opts.interior_guard));
        moved = std::max(moved, polish_tail(wk));
        if (last_viol > opts.fenchel_tol && moved <= kPolishTrigger)
            moved = std::max(moved, newton_polish(wk));

        sys = iterate_system(wk, kPosInf);
        rep = fenchel_check(d, sys, opts.fenchel_tol);
        double viol = report_violation(rep);
        last_viol = viol;
        if (viol <= opts.fenchel_tol && moved <= kStallTol) {
            MleResult res;
            res.system = iterate_system(wk, 1e-10);
            // beta >= 0 is exact at the maximizer, but the tail root is
            // solved to 1e-15 and system reassembly reorders sums, so the
            // reported beta can land an ulp below zero. beta is increasing
            // in the tail, so nudging it up restores the sign.
            if (wk.any_surv && rep.beta < 0.0) {
                double delta = 1e-17 * (1.0 + wk.tau);
                for (int i = 0; i < 60 && rep.beta < 0.0; ++i, delta *= 2.0) {
                    wk.tau += delta;
                    res.system = iterate_system(wk, 1e-10);
                    rep = fenchel_check(d, res.system, opts.fenchel_tol);
                }
            }
            res.tail_mass_total = wk.tau;
            res.tail_unique = !d.survival_at_t_max();
            res.certificate = rep;
            res.loglik = loglik(d, res.system);
            res.iterations = sweeps;
            return res;
        }
        dead_sweeps = moved == 0.0 ? dead_sweeps + 1 : 0;
        if (dead_sweeps >= 3) break;
    }

    MleResult best;
    best.system = iterate_system(wk, kPosInf);
    best.tail_mass_total = wk.tau;
    best.tail_unique = !d.survival_at_t_max();
    best.certificate = rep;
    best.loglik = loglik(d, best.system);
    best.iterations = sweeps;
    std::ostringstream msg;
    msg << "mle_estimate: no certificate after " << sweeps << " sweeps (violation "
        << report_violation(rep) << ")";
    throw MleNonConvergence(msg.str(), std::move(best));
}

SubDistSystem brute_force_mle(const Dataset& d, double resolution) {
    const int K = d.K, m = d.m();
    if (K * m > 8)
        throw std::invalid_argument("brute_force_mle: K * distinct times must be <= 8");
    if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be positive");

    // Coarse lattice sweep: every monotone chain per cause over multiples
    // of 1/8, pruned by the column sum cap.
    const int k_levels = 8;
    std::vector<std::vector<int>> chains;
    {
        std::vector<int> cur(m, 0);
        auto rec = [&](auto&& self, int pos, int floor_lv) -> void {
            if (pos == m) {
                chains.push_back(cur);
                return;
            }
            for (int lv = floor_lv; lv <= k_levels; ++lv) {
                cur[pos] = lv;
                self(self, pos + 1, lv);
            }
        };
        rec(rec, 0, 0);
    }

    std::vector<std::pair<double, std::vector<double>>> top;  // best lattice points
    std::vector<int> colsum(m, 0);
    std::vector<int> pick(K, 0);
    std::vector<double> flat(K * m, 0.0);
    auto eval_pick = [&]() {
        for (int k = 0; k < K; ++k)
            for (int j = 0; j < m; ++j)
                flat[k * m + j] = chains[pick[k]][j] / double(k_levels);
        double v = oracle_loglik(d, flat);
        if (v == kNegInf) return;
        top.emplace_back(v, flat);
        std::sort(top.begin(), top.end(),
                  [](const auto& a, const auto& b) { return a.first > b.first; });
        if (top.size() > 2) top.pop_back();
    };
    auto joint = [&](auto&& self, int k) -> void {
        if (k == K) {
            eval_pick();
            return;
        }
        for (size_t c = 0; c < chains.size(); ++c) {
            bool ok = true;
            for (int j = 0; j < m && ok; ++j)
                ok = colsum[j] + chains[c][j] <= k_levels;
            if (!ok) continue;
            for (int j = 0; j < m; ++j) colsum[j] += chains[c][j];
            pick[k] = static_cast<int>(c);
            self(self, k + 1);
            for (int j = 0; j < m; ++j) colsum[j] -= chains[c][j];
        }
    };
    joint(joint, 0);

    // Projected gradient ascent on the concave likelihood from each seed,
    // run in jump mass coordinates so every iterate is feasible exactly;
    // the interior blend keeps every needed log term finite at the start.
    std::vector<std::vector<double>> seeds;
    for (const auto& t : top) {
        std::vector<double> p(K * m);
        for (int k = 0; k < K; ++k)
            for (int j = 0; j < m; ++j)
                p[k * m + j] = t.second[k * m + j] - (j > 0 ? t.second[k * m + j - 1] : 0.0);
        seeds.push_back(std::move(p));
    }
    seeds.emplace_back(K * m, 0.0);
    const double center = 1.0 / ((m + 1.0) * (K + 1.0));
    for (auto& s : seeds)
        for (double& z : s) z = 0.9 * z + 0.1 * center;

    std::vector<double> best;
    double best_v = kNegInf;
    std::vector<double> fval(K * m), gf(K * m), gp(K * m), trial(K * m), tf(K * m), dir(K * m);
    for (auto& p : seeds) {
        oracle_values(p, K, m, fval);
        double fv = oracle_loglik(d, fval);
        double step = 0.25;
        for (int it = 0; it < 1500; ++it) {
            oracle_values(p, K, m, fval);
            for (int j = 0; j < m; ++j) {
                double col = 0.0;
                for (int k = 0; k < K; ++k) col += fval[k * m + j];
                double surv_term =
                    d.count_at(j, 0) > 0 ? d.count_at(j, 0) / (1.0 - col) : 0.0;
                for (int k = 0; k < K; ++k) {
                    double c = d.count_at(j, k + 1);
                    double g = c > 0.0 ? c / fval[k * m + j] : 0.0;
                    gf[k * m + j] = (g - surv_term) / d.n;
                }
            }
            // A jump mass moves every later value of its cause equally.
            for (int k = 0; k < K; ++k) {
                double acc = 0.0;
                for (int j = m - 1; j >= 0; --j) {
                    acc += gf[k * m + j];
                    gp[k * m + j] = acc;
                }
            }
            trial = p;
            for (size_t i = 0; i < trial.size(); ++i) trial[i] += step * gp[i];
            oracle_simplex_project(trial);
            double gtd = 0.0, dmax = 0.0;
            for (size_t i = 0; i < trial.size(); ++i) {
                dir[i] = trial[i] - p[i];
                gtd += gp[i] * dir[i];
                dmax = std::max(dmax, std::abs(dir[i]));
            }
            if (dmax <= std::min(resolution, 1e-13)) break;
            if (!(gtd > 0.0)) {
                step *= 0.5;
                if (step < 1e-9) break;
                continue;
            }
            double lam = 1.0;
            bool ok = false;
            for (int h = 0; h < 50; ++h) {
                for (size_t i = 0; i < trial.size(); ++i) trial[i] = p[i] + lam * dir[i];
                oracle_values(trial, K, m, tf);
                double f1 = oracle_loglik(d, tf);
                if (f1 >= fv + 0.1 * lam * gtd) {
                    p.swap(trial);
                    fv = f1;
                    ok = true;
                    break;
                }
                lam *= 0.5;
            }
            if (!ok) break;
            step = lam == 1.0 ? std::min(step * 1.3, 4.0) : std::max(step * 0.7, 1e-6);
        }
        if (fv > best_v) {
            best_v = fv;
            oracle_values(p, K, m, fval);
            best = fval;
        }
    }
    if (best.empty()) throw std::runtime_error("brute_force_mle: no feasible point found");

    SubDistSystem sys;
    sys.K = K;
    sys.sum_tolerance = 1e-8;
    sys.components.resize(K);
    std::vector<double> col(m);
    for (int k = 0; k < K; ++k) {
        for (int j = 0; j < m; ++j) {
            col[j] = std::min(1.0, std::max(0.0, best[k * m + j]));
            if (j > 0) col[j] = std::max(col[j], col[j - 1]);
        }
        sys.components[k] = make_step_fn(d.times, col, 0.0, 0.0, 1e-9);
    }
    return sys;
}

std::vector<CauseSupport> support_sets(const Dataset& d) {
    std::vector<CauseSupport> out(d.K);
    for (int k = 1; k <= d.K; ++k) {
        CauseSupport& cs = out[k - 1];
        int prev = -1;  // previous relevant time index
        for (int j = 0; j < d.m(); ++j) {
            bool causek = d.count_at(j, k) > 0;
            bool surv = d.count_at(j, 0) > 0;
            if (!causek && !surv) continue;
            cs.tk.push_back(d.times[j]);
            if (causek) {
                if (prev < 0)
                    cs.intervals.push_back({-kPosInf, d.times[j], false});
                else if (d.count_at(prev, 0) > 0)
                    cs.intervals.push_back({d.times[prev], d.times[j], false});
                // a cause-only predecessor pins the fit flat across the gap
            }
            prev = j;
        }
        if (cs.tk.empty() || cs.tk.back() != d.t_max()) cs.tk.push_back(d.t_max());
        if (d.survival_at_t_max()) cs.intervals.push_back({d.t_max(), 0.0, true});
    }
    return out;
}

UniquenessReport uniqueness_report(const Dataset& d, const MleResult& m) {
    (void)m;
    UniquenessReport r;
    auto sup = support_sets(d);
    r.unique_at.reserve(sup.size());
    for (auto& cs : sup) r.unique_at.push_back(std::move(cs.tk));
    r.infinity_unique = !d.survival_at_t_max();
    return r;
}

}  // namespace crcs
