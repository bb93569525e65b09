#pragma once

#include <vector>

#include "crcs/dist.hpp"

namespace crcs {

// Data-generating model: a subject fails from cause k with probability p_k
// (residual probability: never fails), failure times follow the cause shape,
// and the inspection time is drawn from g independently. The k-th
// sub-distribution function is F0k(t) = p_k * cdf_k(t).
struct TruthModel {
    int K = 1;
    std::vector<double> p;
    std::vector<CauseShape> shapes;
    ObsDist g;

    double F0k(int k, double t) const;   // k in 1..K
    double f0k(int k, double t) const;   // density of F0k
    double F0plus(double t) const;
};

void validate_truth_model(const TruthModel& tm);

// K = 2, equal cause probabilities 1/2, unit exponential failure times,
// uniform inspection on (0, 2).
TruthModel default_truth_model();

// Snapshot of the model at one interior point t0: values, densities, and the
// inverse weights 1/F0k(t0) (per cause) and 1/(1 - F0plus(t0)).
struct LocalTruth {
    double t0 = 0.0;
    std::vector<double> F0k_at_t0;
    std::vector<double> f0k_at_t0;
    double F0plus_at_t0 = 0.0;
    double g_at_t0 = 0.0;
    std::vector<double> a;  // size K+1, a[K] is the survivor weight
};

// Requires 0 < F0k(t0) < p_k and f0k(t0) > 0 for every cause and g(t0) > 0.
LocalTruth local_truth_at(const TruthModel& tm, double t0);

// One component flattened on [t0 - eps, t0) and [t0, t0 + eps); the window
// mass of that component collapses to an atom at t0. Still a valid
// sub-distribution system, and usable as a sampling truth.
struct PerturbedTruth {
    TruthModel base;
    int k = 1;
    double t0 = 0.0;
    double eps = 0.0;

    double lo() const { return t0 - eps; }
    double hi() const { return t0 + eps; }
    double F0k(int cause, double t) const;
    double F0plus(double t) const;
};

}  // namespace crcs
