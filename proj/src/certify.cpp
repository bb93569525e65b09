#include "crcs/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace crcs {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTailJumpEps = 1e-12;

struct Grids {
    int m = 0;
    double n = 0.0;
    std::vector<std::vector<double>> Fk;  // K x m component values at distinct times
    std::vector<double> surv;             // F_{K+1} at distinct times
};

Grids eval_grids(const Dataset& d, const SubDistSystem& F) {
    if (F.K != d.K) throw std::invalid_argument("system K differs from dataset K");
    Grids g;
    g.m = d.m();
    g.n = static_cast<double>(d.n);
    double finf = F.total_at_inf();
    g.Fk.assign(static_cast<size_t>(d.K), std::vector<double>(g.m));
    g.surv.assign(g.m, 0.0);
    for (int j = 0; j < g.m; ++j) {
        double fplus = 0.0;
        for (int k = 0; k < d.K; ++k) {
            double v = F.components[static_cast<size_t>(k)](d.times[j]);
            g.Fk[static_cast<size_t>(k)][j] = v;
            fplus += v;
        }
        g.surv[static_cast<size_t>(j)] = finf - fplus;
    }
    return g;
}

void require_feasible(const Dataset& d, const Grids& g) {
    for (int j = 0; j < g.m; ++j) {
        for (int k = 1; k <= d.K; ++k) {
            if (d.count_at(j, k) > 0 && !(g.Fk[static_cast<size_t>(k - 1)][j] > 0.0)) {
                std::ostringstream os;
                os << "component " << k << " vanishes at mass point t=" << d.times[j];
                throw std::runtime_error(os.str());
            }
        }
        if (d.count_at(j, 0) > 0 && !(g.surv[static_cast<size_t>(j)] > 0.0)) {
            std::ostringstream os;
            os << "survivor mass zero at t=" << d.times[j];
            throw std::runtime_error(os.str());
        }
    }
}

}  // namespace

StepFn vnk(const Dataset& d, int k) {
    if (k < 1 || k > d.K + 1) throw std::invalid_argument("k out of range");
    int status = (k == d.K + 1) ? 0 : k;
    StepFn f;
    double cum = 0.0;
    for (int j = 0; j < d.m(); ++j) {
        int c = d.count_at(j, status);
        if (c > 0) {
            cum += static_cast<double>(c) / d.n;
            f.jump_t.push_back(d.times[j]);
            f.jump_v.push_back(cum);
        }
    }
    return f;
}

double loglik(const Dataset& d, const SubDistSystem& F) {
    Grids g = eval_grids(d, F);
    double s = 0.0;
    for (int j = 0; j < g.m; ++j) {
        double fplus = 0.0;
        for (int k = 1; k <= d.K; ++k) {
            double v = g.Fk[static_cast<size_t>(k - 1)][j];
            fplus += v;
            int c = d.count_at(j, k);
            if (c > 0) {
                if (!(v > 0.0)) return kNegInf;
                s += c * std::log(v);
            }
        }
        int c0 = d.count_at(j, 0);
        if (c0 > 0) {
            double one_minus = 1.0 - fplus;
            if (!(one_minus > 0.0)) return kNegInf;
            s += c0 * std::log(one_minus);
        }
    }
    return s / g.n;
}

double cone_loglik(const Dataset& d, const SubDistSystem& F) {
    Grids g = eval_grids(d, F);
    double s = 0.0;
    for (int j = 0; j < g.m; ++j) {
        for (int k = 1; k <= d.K; ++k) {
            int c = d.count_at(j, k);
            if (c > 0) {
                double v = g.Fk[static_cast<size_t>(k - 1)][j];
                if (!(v > 0.0)) return kNegInf;
                s += c * std::log(v);
            }
        }
        int c0 = d.count_at(j, 0);
        if (c0 > 0) {
            double v = g.surv[static_cast<size_t>(j)];
            if (!(v > 0.0)) return kNegInf;
            s += c0 * std::log(v);
        }
    }
    return s / g.n - F.total_at_inf();
}

double beta_stat(const Dataset& d, const SubDistSystem& F) {
    Grids g = eval_grids(d, F);
    double acc = 0.0;
    for (int j = 0; j < g.m; ++j) {
        int c0 = d.count_at(j, 0);
        if (c0 == 0) continue;
        double v = g.surv[static_cast<size_t>(j)];
        if (!(v > 0.0)) {
            std::ostringstream os;
            os << "survivor mass zero at t=" << d.times[j];
            throw std::runtime_error(os.str());
        }
        acc += c0 / v;
    }
    return 1.0 - acc / g.n;
}

double fenchel_h(const Dataset& d, const SubDistSystem& F, int k, double t) {
    if (k < 1 || k > d.K) throw std::invalid_argument("k out of range");
    Grids g = eval_grids(d, F);
    require_feasible(d, g);
    double h = 0.0;
    for (int j = g.m - 1; j >= 0 && d.times[j] >= t; --j) {
        int ck = d.count_at(j, k);
        int c0 = d.count_at(j, 0);
        if (ck > 0) h += ck / (g.n * g.Fk[static_cast<size_t>(k - 1)][j]);
        if (c0 > 0) h -= c0 / (g.n * g.surv[static_cast<size_t>(j)]);
    }
    return h;
}

FenchelReport fenchel_check(const Dataset& d, const SubDistSystem& F, double tol) {
    Grids g = eval_grids(d, F);
    require_feasible(d, g);
    int m = g.m;

    // Right-tail sums per time index: H_k(t_j), A_k(t_j), and the left sum B(t_j).
    std::vector<double> B(static_cast<size_t>(m) + 1, 0.0);  // B[j] = sum over j' < j
    for (int j = 0; j < m; ++j) {
        double add = 0.0;
        int c0 = d.count_at(j, 0);
        if (c0 > 0) add = c0 / (g.n * g.surv[static_cast<size_t>(j)]);
        B[static_cast<size_t>(j) + 1] = B[static_cast<size_t>(j)] + add;
    }
    double beta = 1.0 - B[static_cast<size_t>(m)];

    FenchelReport rep;
    rep.beta = beta;
    rep.tol = tol;
    rep.per_cause.resize(static_cast<size_t>(d.K));

    for (int k = 1; k <= d.K; ++k) {
        CauseCondition& cc = rep.per_cause[static_cast<size_t>(k - 1)];
        std::vector<double> H(static_cast<size_t>(m) + 1, 0.0);  // H[j] at t_j; H[m] beyond t_max
        std::vector<double> A(static_cast<size_t>(m) + 1, 0.0);
        for (int j = m - 1; j >= 0; --j) {
            double h = H[static_cast<size_t>(j) + 1];
            double a = A[static_cast<size_t>(j) + 1];
            int ck = d.count_at(j, k);
            int c0 = d.count_at(j, 0);
            if (ck > 0) {
                double term = ck / (g.n * g.Fk[static_cast<size_t>(k - 1)][j]);
                h += term;
                a += term;
            }
            if (c0 > 0) h -= c0 / (g.n * g.surv[static_cast<size_t>(j)]);
            H[static_cast<size_t>(j)] = h;
            A[static_cast<size_t>(j)] = a;
        }

        double worst = -std::numeric_limits<double>::infinity();
        cc.worst_t = d.times.back();
        auto consider = [&](double value, double t) {
            if (value > worst) {
                worst = value;
                cc.worst_t = t;
            }
        };
        for (int j = 0; j < m; ++j) {
            double viol = H[static_cast<size_t>(j)] - beta;
            if (viol > cc.max_inequality_violation) cc.max_inequality_violation = viol;
            consider(viol, d.times[j]);
            double primal = A[static_cast<size_t>(j)] + B[static_cast<size_t>(j)] - 1.0;
            if (primal > cc.primal_inequality_violation) cc.primal_inequality_violation = primal;
        }
        // Beyond t_max: H = 0 and A = 0, B = 1 - beta; both routes give -beta.
        if (-beta > cc.max_inequality_violation) cc.max_inequality_violation = -beta;
        if (-beta > cc.primal_inequality_violation) cc.primal_inequality_violation = -beta;
        consider(-beta, d.times.back());

        // Index of the first distinct time >= t; H and B at an off-grid t
        // equal their values at that time (both change only across times).
        auto idx_at = [&](double t) {
            return static_cast<size_t>(
                std::lower_bound(d.times.begin(), d.times.end(), t) - d.times.begin());
        };
        const StepFn& f = F.components[static_cast<size_t>(k - 1)];
        for (size_t i = 0; i < f.jump_count(); ++i) {
            size_t j = idx_at(f.jump_t[i]);
            double h = H[j];
            double a = A[j];
            double b = B[j];
            double gap = std::fabs(h - beta);
            if (gap > cc.max_equality_gap) cc.max_equality_gap = gap;
            consider(gap, f.jump_t[i]);
            cc.stationarity_integral += (a + b - 1.0) * f.jump_size(i);
        }
        if (f.tail_mass > kTailJumpEps) {
            // A point of increase beyond t_max requires H there (= 0) to hit beta.
            double gap = std::fabs(beta);
            if (gap > cc.max_equality_gap) cc.max_equality_gap = gap;
            consider(gap, d.times.back());
            cc.stationarity_integral += (0.0 + B[static_cast<size_t>(m)] - 1.0) * f.tail_mass;
        }
    }

    rep.passed = true;
    for (const CauseCondition& cc : rep.per_cause)
        if (cc.max_inequality_violation > tol || cc.max_equality_gap > tol) rep.passed = false;
    return rep;
}

}  // namespace crcs
