#pragma once

#include <functional>
#include <string>
#include <vector>

#include "crcs/dist.hpp"
#include "crcs/model.hpp"
#include "crcs/truth.hpp"

namespace crcs {

struct MetricValue {
    std::string kind;  // "hellinger", "tv", or "lr"
    int r = 0;         // lr only
    double value = 0.0;
    double quadrature_error_bound = 0.0;
};

// Pointwise access to K sub-distribution functions plus the survivor
// component, together with the discontinuity locations the quadrature must
// cut at. The survivor is clamped at zero so step systems whose total
// exceeds one still produce defined metrics.
struct SystemView {
    int K = 0;
    std::function<double(int, double)> component;  // k in 1..K
    std::function<double(double)> survivor;
    std::vector<double> knots;
};

SystemView system_view(const SubDistSystem& s);
SystemView truth_view(const TruthModel& tm);
SystemView perturbed_view(const PerturbedTruth& pt);

// All three integrate against g over [g.a, g.b] with pieces cut at every
// knot of either view plus 64 uniform points, 16-node Gauss-Legendre per
// piece. The reported value uses once-halved pieces; the error bound is the
// difference from the unhalved pass. Distances between the same pair of
// views share piece sets, so the r = 1 norm equals exactly twice the total
// variation.
MetricValue hellinger(const SystemView& F, const SystemView& F0, const ObsDist& g);
MetricValue total_variation(const SystemView& F, const SystemView& F0, const ObsDist& g);
MetricValue lr_distance(const SystemView& F, const SystemView& F0, const ObsDist& g, int r);

}  // namespace crcs
