#include "crcs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crcs {

namespace {

// 16-node Gauss-Legendre rule on [-1, 1], positive half; nodes mirror.
constexpr int kHalf = 8;
constexpr double kNode[kHalf] = {
    0.09501250983763744, 0.28160355077925891, 0.45801677765722739, 0.61787624440264375,
    0.75540440835500303, 0.86563120238783174, 0.94457502307323258, 0.98940093499164993,
};
constexpr double kWeight[kHalf] = {
    0.18945061045506850, 0.18260341504492359, 0.16915651939500254, 0.14959598881657673,
    0.12462897125553387, 0.09515851168249278, 0.06225352393864789, 0.02715245941175409,
};

std::vector<double> build_cuts(const SystemView& F, const SystemView& F0, const ObsDist& g) {
    validate_obs_dist(g);
    if (F.K != F0.K) throw std::invalid_argument("metrics: systems must share K");
    std::vector<double> cuts;
    for (int i = 0; i < 64; ++i) cuts.push_back(g.a + (g.b - g.a) * i / 63.0);
    for (const std::vector<double>* ks : {&F.knots, &F0.knots})
        for (double t : *ks)
            if (t > g.a && t < g.b) cuts.push_back(t);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    return cuts;
}

template <class Fn>
double integrate(const std::vector<double>& cuts, int split, const Fn& fn) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double w = (cuts[i + 1] - cuts[i]) / split;
        for (int part = 0; part < split; ++part) {
            double x0 = cuts[i] + w * part;
            double mid = x0 + 0.5 * w;
            double half = 0.5 * w;
            double s = 0.0;
            for (int q = 0; q < kHalf; ++q)
                s += kWeight[q] * (fn(mid - half * kNode[q]) + fn(mid + half * kNode[q]));
            acc += s * half;
        }
    }
    return acc;
}

// Sums integral of per-component integrand over causes 1..K plus survivor.
template <class Make>
void accumulate(const SystemView& F, const SystemView& F0, const ObsDist& g,
                const std::vector<double>& cuts, const Make& make, double* coarse, double* fine) {
    *coarse = 0.0;
    *fine = 0.0;
    for (int k = 1; k <= F.K + 1; ++k) {
        auto fk = [&](double t) {
            double a = k <= F.K ? F.component(k, t) : F.survivor(t);
            double b = k <= F.K ? F0.component(k, t) : F0.survivor(t);
            return make(a, b) * g.pdf(t);
        };
        *coarse += integrate(cuts, 1, fk);
        *fine += integrate(cuts, 2, fk);
    }
}

}  // namespace

SystemView system_view(const SubDistSystem& s) {
    SystemView v;
    v.K = s.K;
    v.component = [s](int k, double t) { return s.components[k - 1](t); };
    v.survivor = [s](double t) { return std::max(0.0, 1.0 - s.sum_at(t)); };
    for (const StepFn& f : s.components)
        v.knots.insert(v.knots.end(), f.jump_t.begin(), f.jump_t.end());
    std::sort(v.knots.begin(), v.knots.end());
    v.knots.erase(std::unique(v.knots.begin(), v.knots.end()), v.knots.end());
    return v;
}

SystemView truth_view(const TruthModel& tm) {
    validate_truth_model(tm);
    SystemView v;
    v.K = tm.K;
    v.component = [tm](int k, double t) { return tm.F0k(k, t); };
    v.survivor = [tm](double t) { return std::max(0.0, 1.0 - tm.F0plus(t)); };
    return v;
}

SystemView perturbed_view(const PerturbedTruth& pt) {
    SystemView v;
    v.K = pt.base.K;
    v.component = [pt](int k, double t) { return pt.F0k(k, t); };
    v.survivor = [pt](double t) { return std::max(0.0, 1.0 - pt.F0plus(t)); };
    v.knots = {pt.lo(), pt.t0, pt.hi()};
    return v;
}

MetricValue hellinger(const SystemView& F, const SystemView& F0, const ObsDist& g) {
    std::vector<double> cuts = build_cuts(F, F0, g);
    double coarse, fine;
    accumulate(F, F0, g, cuts,
               [](double a, double b) {
                   double d = std::sqrt(std::max(0.0, a)) - std::sqrt(std::max(0.0, b));
                   return d * d;
               },
               &coarse, &fine);
    MetricValue m;
    m.kind = "hellinger";
    m.value = std::sqrt(std::max(0.0, 0.5 * fine));
    m.quadrature_error_bound = std::abs(m.value - std::sqrt(std::max(0.0, 0.5 * coarse)));
    return m;
}

MetricValue total_variation(const SystemView& F, const SystemView& F0, const ObsDist& g) {
    std::vector<double> cuts = build_cuts(F, F0, g);
    double coarse, fine;
    accumulate(F, F0, g, cuts, [](double a, double b) { return std::abs(a - b); }, &coarse, &fine);
    MetricValue m;
    m.kind = "tv";
    m.value = 0.5 * fine;
    m.quadrature_error_bound = 0.5 * std::abs(fine - coarse);
    return m;
}

MetricValue lr_distance(const SystemView& F, const SystemView& F0, const ObsDist& g, int r) {
    if (r < 1) throw std::invalid_argument("lr_distance: r must be a positive integer");
    std::vector<double> cuts = build_cuts(F, F0, g);
    double coarse, fine;
    accumulate(F, F0, g, cuts,
               [r](double a, double b) { return std::pow(std::abs(a - b), r); }, &coarse, &fine);
    MetricValue m;
    m.kind = "lr";
    m.r = r;
    m.value = r == 1 ? fine : std::pow(fine, 1.0 / r);
    m.quadrature_error_bound =
        r == 1 ? std::abs(fine - coarse) : std::abs(m.value - std::pow(coarse, 1.0 / r));
    return m;
}

}  // namespace crcs
