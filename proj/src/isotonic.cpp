#include "crcs/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace crcs {

CumSumDiagram make_cum_sum_diagram(const std::vector<double>& w,
                                   const std::vector<double>& resp) {
    if (w.size() != resp.size()) throw std::invalid_argument("length mismatch");
    CumSumDiagram d;
    d.x.reserve(w.size() + 1);
    d.y.reserve(w.size() + 1);
    d.x.push_back(0.0);
    d.y.push_back(0.0);
    for (size_t i = 0; i < w.size(); ++i) {
        if (!(w[i] > 0.0)) throw std::invalid_argument("weights must be positive");
        d.x.push_back(d.x.back() + w[i]);
        d.y.push_back(d.y.back() + w[i] * resp[i]);
    }
    return d;
}

namespace {

// PAVA over (value, weight) pairs; maximal pooled blocks.
void pava_blocks(const std::vector<double>& y, const std::vector<double>& w,
                 std::vector<double>& bv, std::vector<double>& bw,
                 std::vector<int>& bn) {
    bv.clear();
    bw.clear();
    bn.clear();
    for (size_t i = 0; i < y.size(); ++i) {
        bv.push_back(y[i]);
        bw.push_back(w[i]);
        bn.push_back(1);
        while (bv.size() >= 2 && bv[bv.size() - 2] >= bv.back()) {
            double tw = bw[bw.size() - 2] + bw.back();
            double v = (bv[bv.size() - 2] * bw[bw.size() - 2] + bv.back() * bw.back()) / tw;
            bv.pop_back();
            bw.pop_back();
            int cnt = bn.back();
            bn.pop_back();
            bv.back() = v;
            bw.back() = tw;
            bn.back() += cnt;
        }
    }
}

std::vector<double> expand_blocks(const std::vector<double>& bv, const std::vector<int>& bn) {
    std::vector<double> out;
    for (size_t b = 0; b < bv.size(); ++b)
        out.insert(out.end(), static_cast<size_t>(bn[b]), bv[b]);
    return out;
}

}  // namespace

std::vector<double> gcm_left_slopes(const CumSumDiagram& d) {
    if (d.x.empty() || d.x[0] != 0.0 || d.y.empty() || d.y[0] != 0.0)
        throw std::invalid_argument("diagram must start at the origin");
    size_t m = d.x.size() - 1;
    std::vector<double> slope(m), width(m);
    for (size_t i = 0; i < m; ++i) {
        width[i] = d.x[i + 1] - d.x[i];
        if (!(width[i] > 0.0)) throw std::invalid_argument("diagram x not strictly increasing");
        slope[i] = (d.y[i + 1] - d.y[i]) / width[i];
    }
    // Left GCM slopes are the isotonic fit of segment slopes weighted by width.
    std::vector<double> bv, bw;
    std::vector<int> bn;
    pava_blocks(slope, width, bv, bw, bn);
    return expand_blocks(bv, bn);
}

std::vector<double> weighted_isotonic(const std::vector<double>& y,
                                      const std::vector<double>& w) {
    if (y.size() != w.size()) throw std::invalid_argument("length mismatch");
    for (double wi : w)
        if (!(wi > 0.0)) throw std::invalid_argument("weights must be positive");
    std::vector<double> bv, bw;
    std::vector<int> bn;
    pava_blocks(y, w, bv, bw, bn);
    return expand_blocks(bv, bn);
}

std::vector<double> weighted_isotonic(const std::vector<double>& y,
                                      const std::vector<double>& w,
                                      const std::vector<double>& lower,
                                      const std::vector<double>& upper) {
    size_t m = y.size();
    bool has_lo = !lower.empty(), has_hi = !upper.empty();
    if ((has_lo && lower.size() != m) || (has_hi && upper.size() != m))
        throw std::invalid_argument("bound length mismatch");
    if (!has_lo && !has_hi) return weighted_isotonic(y, w);

    // Feasibility: the running max of the lower bounds must stay below upper.
    double runmax = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < m; ++i) {
        if (has_lo) runmax = std::max(runmax, lower[i]);
        if (has_hi && runmax > upper[i]) {
            std::ostringstream os;
            os << "infeasible bounds: running lower max " << runmax << " exceeds upper["
               << i << "]=" << upper[i];
            throw std::invalid_argument(os.str());
        }
    }

    auto clip = [&](std::vector<double>& v) {
        for (size_t i = 0; i < m; ++i) {
            if (has_lo && v[i] < lower[i]) v[i] = lower[i];
            if (has_hi && v[i] > upper[i]) v[i] = upper[i];
        }
    };
    auto objective = [&](const std::vector<double>& v) {
        double s = 0.0;
        for (size_t i = 0; i < m; ++i) s += w[i] * (v[i] - y[i]) * (v[i] - y[i]);
        return s;
    };

    bool const_lo = !has_lo || std::equal(lower.begin() + 1, lower.end(), lower.begin());
    bool const_hi = !has_hi || std::equal(upper.begin() + 1, upper.end(), upper.begin());
    if (const_lo && const_hi) {
        // Clipping a PAVA fit at constant levels preserves optimality.
        std::vector<double> v = weighted_isotonic(y, w);
        clip(v);
        return v;
    }

    // Dykstra between the monotone cone (PAVA projects in the w-norm) and the box.
    std::vector<double> x = y, p(m, 0.0), q(m, 0.0), tmp(m);
    double prev_obj = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200000; ++it) {
        for (size_t i = 0; i < m; ++i) tmp[i] = x[i] + p[i];
        std::vector<double> s = weighted_isotonic(tmp, w);
        for (size_t i = 0; i < m; ++i) p[i] = tmp[i] - s[i];
        for (size_t i = 0; i < m; ++i) x[i] = s[i] + q[i];
        clip(x);
        for (size_t i = 0; i < m; ++i) q[i] = s[i] + q[i] - x[i];

        double obj = objective(x);
        double mono_gap = 0.0;
        for (size_t i = 1; i < m; ++i) mono_gap = std::max(mono_gap, x[i - 1] - x[i]);
        if (std::fabs(prev_obj - obj) < 1e-12 && mono_gap < 1e-10) {
            // Snap residual monotonicity noise without leaving the box.
            for (size_t i = 1; i < m; ++i)
                if (x[i] < x[i - 1]) x[i] = x[i - 1];
            if (has_hi)
                for (size_t i = 0; i < m; ++i)
                    if (x[i] > upper[i]) x[i] = upper[i];
            return x;
        }
        prev_obj = obj;
    }
    throw std::runtime_error("bounded isotonic regression did not converge");
}

}  // namespace crcs
