#pragma once

#include <vector>

// Cumulative sum diagram, greatest convex minorant, and weighted isotonic
// regression with optional pointwise bounds. These are the inner solvers
// shared by both estimators.

namespace crcs {

// points (x_j, y_j), j = 0..m, starting at the origin; x strictly increasing.
struct CumSumDiagram {
    std::vector<double> x;
    std::vector<double> y;
};

CumSumDiagram make_cum_sum_diagram(const std::vector<double>& w,
                                   const std::vector<double>& resp);

// Left derivatives of the greatest convex minorant at x_1..x_m.
// Pooled blocks are maximal, so the output is independent of tie order.
std::vector<double> gcm_left_slopes(const CumSumDiagram& d);

// Minimizes sum w_i (x_i - y_i)^2 over nondecreasing x. Plain PAVA.
std::vector<double> weighted_isotonic(const std::vector<double>& y,
                                      const std::vector<double>& w);

// Same with per-element bounds lower <= x <= upper; pass an empty vector to
// drop a side. Constant bounds are handled exactly by clipping the PAVA fit;
// genuinely varying bounds go through Dykstra alternating projections,
// iterated until the objective changes by less than 1e-12.
std::vector<double> weighted_isotonic(const std::vector<double>& y,
                                      const std::vector<double>& w,
                                      const std::vector<double>& lower,
                                      const std::vector<double>& upper);

}  // namespace crcs
