#include "crcs/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace crcs {

int Dataset::total_at(int j) const {
    int s = 0;
    for (int k = 0; k <= K; ++k) s += counts[j][k];
    return s;
}

int Dataset::cause_total(int k) const {
    int s = 0;
    for (int j = 0; j < m(); ++j) s += counts[j][k];
    return s;
}

Dataset validate_dataset(const std::vector<Observation>& raw, int K) {
    if (K < 1) throw std::invalid_argument("K must be >= 1");
    if (raw.empty()) throw std::invalid_argument("dataset is empty");
    for (size_t i = 0; i < raw.size(); ++i) {
        if (!std::isfinite(raw[i].time)) {
            std::ostringstream os;
            os << "row " << i << ": non-finite time";
            throw std::invalid_argument(os.str());
        }
        if (raw[i].status < 0 || raw[i].status > K) {
            std::ostringstream os;
            os << "row " << i << ": status " << raw[i].status
               << " out of range [0.." << K << "]";
            throw std::invalid_argument(os.str());
        }
    }
    Dataset d;
    d.K = K;
    d.obs = raw;
    std::stable_sort(d.obs.begin(), d.obs.end(),
                     [](const Observation& a, const Observation& b) { return a.time < b.time; });
    d.n = static_cast<int>(d.obs.size());
    for (const Observation& o : d.obs) {
        if (d.times.empty() || o.time > d.times.back()) {
            d.times.push_back(o.time);
            d.counts.emplace_back(K + 1, 0);
        }
        d.counts.back()[o.status] += 1;
    }
    return d;
}

double StepFn::operator()(double t) const {
    if (std::isinf(t) && t > 0) return at_inf();
    auto it = std::upper_bound(jump_t.begin(), jump_t.end(), t);
    if (it == jump_t.begin()) return baseline;
    return jump_v[static_cast<size_t>(it - jump_t.begin()) - 1];
}

double StepFn::at_inf() const {
    return (jump_v.empty() ? baseline : jump_v.back()) + tail_mass;
}

double StepFn::left_limit(double t) const {
    auto it = std::lower_bound(jump_t.begin(), jump_t.end(), t);
    if (it == jump_t.begin()) return baseline;
    return jump_v[static_cast<size_t>(it - jump_t.begin()) - 1];
}

double step_eval(const StepFn& f, double t) { return f(t); }

StepFn make_step_fn(const std::vector<double>& t, const std::vector<double>& v,
                    double baseline, double tail_mass, double merge_eps) {
    if (t.size() != v.size()) throw std::invalid_argument("grid and value lengths differ");
    StepFn f;
    f.baseline = baseline;
    f.tail_mass = tail_mass;
    double cur = baseline;
    for (size_t i = 0; i < t.size(); ++i) {
        if (i > 0 && !(t[i] > t[i - 1])) throw std::invalid_argument("grid not strictly increasing");
        if (v[i] > cur + merge_eps) {
            f.jump_t.push_back(t[i]);
            f.jump_v.push_back(v[i]);
            cur = v[i];
        }
    }
    return f;
}

void validate_step_fn(const StepFn& f, bool cap_at_one, double tol) {
    if (!(f.baseline >= 0.0)) throw std::invalid_argument("negative baseline");
    if (!(f.tail_mass >= 0.0)) throw std::invalid_argument("negative tail_mass");
    if (f.jump_t.size() != f.jump_v.size())
        throw std::invalid_argument("jump time/value lengths differ");
    double prev = f.baseline;
    for (size_t i = 0; i < f.jump_t.size(); ++i) {
        if (!std::isfinite(f.jump_t[i]) || !std::isfinite(f.jump_v[i]))
            throw std::invalid_argument("non-finite jump");
        if (i > 0 && !(f.jump_t[i] > f.jump_t[i - 1]))
            throw std::invalid_argument("jump times not strictly increasing");
        if (!(f.jump_v[i] > prev))
            throw std::invalid_argument("jump values not strictly increasing");
        prev = f.jump_v[i];
    }
    if (cap_at_one && f.at_inf() > 1.0 + tol)
        throw std::invalid_argument("step function exceeds 1");
}

double SubDistSystem::sum_at(double t) const {
    double s = 0.0;
    for (const StepFn& f : components) s += f(t);
    return s;
}

double SubDistSystem::total_at_inf() const {
    double s = 0.0;
    for (const StepFn& f : components) s += f.at_inf();
    return s;
}

void validate_system(const SubDistSystem& s) {
    if (s.K < 1) throw std::invalid_argument("K must be >= 1");
    if (static_cast<int>(s.components.size()) != s.K)
        throw std::invalid_argument("component count differs from K");
    bool cone = s.is_cone();
    for (const StepFn& f : s.components) validate_step_fn(f, !cone, cone ? 0.0 : s.sum_tolerance);
    if (!cone) system_sum(s);  // throws on a sum violation
}

SumView system_sum(const SubDistSystem& s) {
    SumView view;
    std::vector<double> grid;
    for (const StepFn& f : s.components)
        grid.insert(grid.end(), f.jump_t.begin(), f.jump_t.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    double base = 0.0, tail = 0.0;
    for (const StepFn& f : s.components) {
        base += f.baseline;
        tail += f.tail_mass;
    }
    view.total.baseline = base;
    view.total.tail_mass = tail;
    double prev = base;
    for (double t : grid) {
        double v = s.sum_at(t);
        if (v > prev) {
            view.total.jump_t.push_back(t);
            view.total.jump_v.push_back(v);
            prev = v;
        }
    }
    view.at_inf = view.total.at_inf();
    if (!s.is_cone()) {
        for (size_t i = 0; i < view.total.jump_t.size(); ++i) {
            if (view.total.jump_v[i] > 1.0 + s.sum_tolerance) {
                std::ostringstream os;
                os << "component sum " << view.total.jump_v[i] << " exceeds 1 at t="
                   << view.total.jump_t[i];
                throw std::invalid_argument(os.str());
            }
        }
        if (view.at_inf > 1.0 + s.sum_tolerance) {
            std::ostringstream os;
            os << "component sum " << view.at_inf << " exceeds 1 at infinity";
            throw std::invalid_argument(os.str());
        }
    }
    return view;
}

}  // namespace crcs
