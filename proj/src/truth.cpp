#include "crcs/truth.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace crcs {

double ObsDist::cdf(double t) const {
    if (t <= a) return 0.0;
    if (t >= b) return 1.0;
    if (kind == Kind::uniform) return (t - a) / (b - a);
    return -std::expm1(-rate * (t - a)) / -std::expm1(-rate * (b - a));
}

double ObsDist::pdf(double t) const {
    if (t < a || t > b) return 0.0;
    if (kind == Kind::uniform) return 1.0 / (b - a);
    return rate * std::exp(-rate * (t - a)) / -std::expm1(-rate * (b - a));
}

double ObsDist::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("ObsDist::quantile: u must be in (0,1)");
    if (kind == Kind::uniform) return a + u * (b - a);
    return a - std::log1p(u * std::expm1(-rate * (b - a))) / rate;
}

double CauseShape::cdf(double t) const {
    if (t <= 0.0) return 0.0;
    if (kind == Kind::exponential) return -std::expm1(-rate * t);
    return -std::expm1(-std::pow(t / scale, shape));
}

double CauseShape::pdf(double t) const {
    if (t <= 0.0) return 0.0;
    if (kind == Kind::exponential) return rate * std::exp(-rate * t);
    double z = t / scale;
    return (shape / scale) * std::pow(z, shape - 1.0) * std::exp(-std::pow(z, shape));
}

double CauseShape::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("CauseShape::quantile: u must be in (0,1)");
    if (kind == Kind::exponential) return -std::log1p(-u) / rate;
    return scale * std::pow(-std::log1p(-u), 1.0 / shape);
}

void validate_obs_dist(const ObsDist& g) {
    if (!(std::isfinite(g.a) && std::isfinite(g.b) && g.a < g.b))
        throw std::invalid_argument("ObsDist: interval must be bounded with a < b");
    if (g.kind == ObsDist::Kind::trunc_exponential && !(g.rate > 0.0 && std::isfinite(g.rate)))
        throw std::invalid_argument("ObsDist: rate must be positive");
}

void validate_cause_shape(const CauseShape& s) {
    if (s.kind == CauseShape::Kind::exponential) {
        if (!(s.rate > 0.0 && std::isfinite(s.rate)))
            throw std::invalid_argument("CauseShape: rate must be positive");
    } else {
        if (!(s.shape > 0.0 && std::isfinite(s.shape)) || !(s.scale > 0.0 && std::isfinite(s.scale)))
            throw std::invalid_argument("CauseShape: shape and scale must be positive");
    }
}

double TruthModel::F0k(int k, double t) const { return p[k - 1] * shapes[k - 1].cdf(t); }

double TruthModel::f0k(int k, double t) const { return p[k - 1] * shapes[k - 1].pdf(t); }

double TruthModel::F0plus(double t) const {
    double s = 0.0;
    for (int k = 1; k <= K; ++k) s += F0k(k, t);
    return s;
}

void validate_truth_model(const TruthModel& tm) {
    if (tm.K < 1) throw std::invalid_argument("TruthModel: K must be at least 1");
    if (static_cast<int>(tm.p.size()) != tm.K || static_cast<int>(tm.shapes.size()) != tm.K)
        throw std::invalid_argument("TruthModel: p and shapes must have K entries");
    double sum = 0.0;
    for (double pk : tm.p) {
        if (!(pk > 0.0 && std::isfinite(pk)))
            throw std::invalid_argument("TruthModel: cause probabilities must be positive");
        sum += pk;
    }
    if (sum > 1.0 + 1e-12)
        throw std::invalid_argument("TruthModel: cause probabilities must sum to at most 1");
    for (const CauseShape& s : tm.shapes) validate_cause_shape(s);
    validate_obs_dist(tm.g);
}

TruthModel default_truth_model() {
    TruthModel tm;
    tm.K = 2;
    tm.p = {0.5, 0.5};
    CauseShape e;
    e.kind = CauseShape::Kind::exponential;
    e.rate = 1.0;
    tm.shapes = {e, e};
    tm.g.kind = ObsDist::Kind::uniform;
    tm.g.a = 0.0;
    tm.g.b = 2.0;
    return tm;
}

LocalTruth local_truth_at(const TruthModel& tm, double t0) {
    validate_truth_model(tm);
    LocalTruth lt;
    lt.t0 = t0;
    lt.g_at_t0 = tm.g.pdf(t0);
    if (!(lt.g_at_t0 > 0.0))
        throw std::invalid_argument("local_truth_at: observation density vanishes at t0");
    for (int k = 1; k <= tm.K; ++k) {
        double v = tm.F0k(k, t0);
        double dv = tm.f0k(k, t0);
        if (!(v > 0.0 && v < tm.p[k - 1]))
            throw std::invalid_argument("local_truth_at: F0k(t0) must be strictly inside (0, p_k) for cause " +
                                        std::to_string(k));
        if (!(dv > 0.0))
            throw std::invalid_argument("local_truth_at: density of cause " + std::to_string(k) +
                                        " vanishes at t0");
        lt.F0k_at_t0.push_back(v);
        lt.f0k_at_t0.push_back(dv);
    }
    lt.F0plus_at_t0 = tm.F0plus(t0);
    if (!(lt.F0plus_at_t0 < 1.0))
        throw std::invalid_argument("local_truth_at: survivor probability vanishes at t0");
    for (int k = 1; k <= tm.K; ++k) lt.a.push_back(1.0 / lt.F0k_at_t0[k - 1]);
    lt.a.push_back(1.0 / (1.0 - lt.F0plus_at_t0));
    return lt;
}

double PerturbedTruth::F0k(int cause, double t) const {
    if (cause != k || t < lo() || t >= hi()) return base.F0k(cause, t);
    if (t < t0) return base.F0k(cause, lo());
    return base.F0k(cause, hi());
}

double PerturbedTruth::F0plus(double t) const {
    double s = 0.0;
    for (int c = 1; c <= base.K; ++c) s += F0k(c, t);
    return s;
}

}  // namespace crcs
