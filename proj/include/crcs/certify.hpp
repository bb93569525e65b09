#pragma once

#include <vector>

#include "crcs/model.hpp"

// Optimality certification for candidate maximizers. The MLE is
// characterized by a Fenchel duality system: with
//   H_k(t) = (1/n) sum_{T_i >= t} [ d_k^i / F_k(T_i) - d_{K+1}^i / F_{K+1}(T_i) ]
// and beta = 1 - (1/n) sum_i d_{K+1}^i / F_{K+1}(T_i), a feasible system is
// the MLE iff H_k(t) <= beta for all t and H_k(t) = beta at every point of
// increase of F_k. F_{K+1}(t) = F_+(inf) - F_+(t) throughout.

namespace crcs {

struct CauseCondition {
    double max_inequality_violation = 0.0;  // max_t (H_k(t) - beta)_+
    double max_equality_gap = 0.0;          // max over jumps of |H_k - beta|
    double worst_t = 0.0;
    // Diagnostics from the equivalent primal condition pair:
    // A_k(t) = (1/n) sum_{T_i >= t} d_k^i / F_k(T_i),
    // B(t)   = (1/n) sum_{T_i < t} d_{K+1}^i / F_{K+1}(T_i).
    double stationarity_integral = 0.0;       // sum over jumps of (A_k+B-1) dF_k
    double primal_inequality_violation = 0.0; // max_t (A_k(t)+B(t)-1)_+
};

struct FenchelReport {
    double beta = 0.0;
    double tol = 0.0;
    bool passed = false;
    std::vector<CauseCondition> per_cause;
};

// Cumulative empirical process for one status: V(t) = #{T_i <= t, status k}/n.
// k ranges over 1..K+1, where K+1 means status 0.
StepFn vnk(const Dataset& d, int k);

// Average log likelihood over the sample; returns -infinity when a needed
// term has a nonpositive argument. Survival terms use log(1 - F_+(T_i)).
double loglik(const Dataset& d, const SubDistSystem& F);

// Cone criterion: survival terms use log(F_+(inf) - F_+(T_i)) and the
// total mass enters linearly as -F_+(inf).
double cone_loglik(const Dataset& d, const SubDistSystem& F);

// beta = 1 - (1/n) sum over survival observations of 1/F_{K+1}(T_i).
// Throws if the survivor function vanishes at a survival mass point.
double beta_stat(const Dataset& d, const SubDistSystem& F);

// H_k at an arbitrary t (k in 1..K); exposed for diagnostics and tests.
double fenchel_h(const Dataset& d, const SubDistSystem& F, int k, double t);

// Full certificate. Inequalities are evaluated at every distinct
// observation time plus one point beyond t_max (where H_k = 0); equalities
// at the jump points of each component, plus a virtual jump beyond t_max
// for components carrying tail mass.
FenchelReport fenchel_check(const Dataset& d, const SubDistSystem& F, double tol);

}  // namespace crcs
