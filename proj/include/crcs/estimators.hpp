#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "crcs/certify.hpp"
#include "crcs/model.hpp"

// The two estimators. The naive estimator solves K separate univariate
// current status problems, one per cause, and may violate F_+ <= 1. The
// MLE maximizes the joint likelihood over systems with F_+ <= 1; it is
// computed by block coordinate ascent on the equivalent cone criterion
// (survival terms use F_+(inf) - F_+ and the total mass enters as
// -F_+(inf)), with iterative convex minorant steps per block and a
// Fenchel certificate as the termination authority.

namespace crcs {

struct NaiveResult {
    std::vector<StepFn> components;
    // Distinct times where the component sum exceeds 1, with the sum value.
    std::vector<std::pair<double, double>> sum_violations;
    std::vector<double> per_cause_loglik;  // marginal average log likelihoods

    SubDistSystem as_cone_system() const;
};

struct MleResult {
    SubDistSystem system;
    double tail_mass_total = 0.0;  // mass beyond t_max, 1 - F_+(t_max)
    bool tail_unique = true;
    double loglik = 0.0;
    FenchelReport certificate;
    int iterations = 0;
};

struct EstimateOptions {
    double fenchel_tol = 1e-8;
    int max_iters = 10000;
    double interior_guard = 1e-10;
};

NaiveResult naive_estimate(const Dataset& d);

// Thrown when the ascent fails to certify within max_iters; carries the
// best iterate so callers may retry with a larger budget.
struct MleNonConvergence : std::runtime_error {
    MleResult best;
    MleNonConvergence(const std::string& msg, MleResult b)
        : std::runtime_error(msg), best(std::move(b)) {}
};

MleResult mle_estimate(const Dataset& d, const EstimateOptions& opts = {});

// Independent oracle for tiny instances (K * distinct times <= 8):
// coarse lattice enumeration over monotone component values with the
// F_+ <= 1 constraint, then projected gradient ascent from the best
// lattice points, refined below `resolution`. Shares no code with the ICM.
SubDistSystem brute_force_mle(const Dataset& d, double resolution);

// Candidate support: mass can sit only on (left, right] intervals whose
// left end carries a survival observation (or is -infinity when nothing
// relevant precedes), whose right end carries a cause-k observation, and
// with no cause-k or survival observation strictly between; plus
// (t_max, inf) iff a survival observation sits at t_max.
struct MassInterval {
    double left = 0.0;   // -infinity allowed
    double right = 0.0;  // ignored when to_infinity
    bool to_infinity = false;
};

struct CauseSupport {
    std::vector<double> tk;  // times where the MLE component is unique
    std::vector<MassInterval> intervals;
};

std::vector<CauseSupport> support_sets(const Dataset& d);

struct UniquenessReport {
    std::vector<std::vector<double>> unique_at;  // per cause, = tk
    bool infinity_unique = true;                 // no survival observation at t_max
};

UniquenessReport uniqueness_report(const Dataset& d, const MleResult& m);

}  // namespace crcs
