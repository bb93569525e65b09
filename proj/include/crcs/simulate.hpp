#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "crcs/estimators.hpp"
#include "crcs/model.hpp"
#include "crcs/truth.hpp"

namespace crcs {

// Draws n observations: T from g, the failure cause from p (residual
// probability: no failure ever), the failure time from that cause's shape,
// status k when the failure happened by T. Observation i consumes the
// counter-i draws of stream (seed, stream), dims 0 = T, 1 = cause, 2 = X.
Dataset sample_dataset(const TruthModel& tm, int n, std::uint64_t seed, std::uint64_t stream = 0);

// Same draws as the base model; a failure time of the perturbed cause that
// lands inside (t0 - eps, t0 + eps] snaps to t0, which realizes the
// flattened component exactly while keeping all other draws paired.
Dataset sample_dataset(const PerturbedTruth& pt, int n, std::uint64_t seed, std::uint64_t stream = 0);

// Centered empirical processes at t: wnk[k-1] averages
// (status == k) - F0k(T_i) over T_i <= t, wnplus the same for any failure,
// and snk[k-1] = a_k * wnk[k-1] + a_{K+1} * wnplus.
struct WsValues {
    std::vector<double> wnk;
    double wnplus = 0.0;
    std::vector<double> snk;
};
WsValues w_s_processes(const Dataset& d, const TruthModel& tm, const LocalTruth& lt, double t);

// Local rate envelope: n^{-1/3} inside |t| <= n^{-1/3}, then
// n^{-(1-beta)/3} |t|^beta.
double vn_envelope(int n, double t, double beta);

// sup over [t0 - r, t0 + r] of |est_+(t) - F0plus(t)| / vn_envelope(n, t - t0, beta),
// evaluated at every jump of the estimated total in the window (both
// one-sided limits) and on a 512-point uniform grid.
double uniform_rate_statistic(const SubDistSystem& est, const TruthModel& tm, double t0, double r,
                              int n, double beta);

// Flattens cause k over the window of half-width c * n^{-1/3} around t0.
// The window must stay inside the observation support and the local truth
// hypotheses must hold at t0.
PerturbedTruth minimax_perturbation(const TruthModel& tm, int k, double c, int n, double t0);

// Local asymptotic lower bound for the n^{r/3}-scaled risk
// |Fhat_k(t0) - F_k(t0)|^r: d^r * [(g/f0k) (1/F0k + 1/(1 - F0plus))]^{-r/3}
// at t0, with d = 2^{-5/3} e^{-1/3}. single_risk_bound replaces the
// survivor weight by 1/(1 - F0k), the K = 1 form; it is never smaller.
struct MinimaxBound {
    double d = 0.0;
    double bound = 0.0;
    double single_risk_bound = 0.0;
};
MinimaxBound minimax_bound(const LocalTruth& lt, int k, int r);

enum class EstimatorKind { naive, mle };

// Monte Carlo risk of the chosen estimator at t0 under the base truth and
// under the flattened alternative, each with its own target value.
// Replication i uses streams 2i (base) and 2i + 1 (alternative).
// Replications where the fit fails to certify are excluded and counted.
struct TwoPointRisk {
    double risk_at_F0 = 0.0;
    double risk_at_Fnk = 0.0;
    double max_risk = 0.0;
    double scaled_max_risk = 0.0;  // n^{r/3} * max_risk
    double bound = 0.0;
    int failures = 0;
};
TwoPointRisk two_point_risk(const TruthModel& tm, int k, double c, int n, double t0, int reps,
                            std::uint64_t seed, EstimatorKind est, int r);

struct RateConfig {
    TruthModel tm;
    double t0 = 1.0;
    std::vector<int> n_grid;
    int reps = 100;
    std::uint64_t base_seed = 1;
    bool run_naive = true;
    bool run_mle = true;
    double window = 0.5;  // half-width for uniform_rate_statistic
    double beta = 0.5;
    double fenchel_tol = 1e-8;
};

struct RateRow {
    int n = 0;
    std::string metric;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
};

struct RateTable {
    std::vector<RateRow> rows;
    std::vector<std::pair<std::string, double>> slopes;  // log-median vs log-n
    int failures = 0;
    std::vector<std::string> failure_notes;
    int flagged = 0;  // jump gap statistics that hit the support edge
};

// For each n and estimator, reps replications of: sample, fit, then record
// Hellinger, L1, and L2 distances to the truth, the per-cause error at t0,
// the per-cause gap between the nearest fitted jumps around t0 (support
// edge substituted and flagged when a side has none), the per-cause sup of
// |Fhat_k - F0k(t0)| over [t0 - n^{-1/3}, t0 + n^{-1/3}], and the uniform
// rate statistic. Both estimators see the same datasets. Rows hold type-7
// quantiles over surviving replications; slopes are least squares on
// (log n, log median).
RateTable rate_experiment(const RateConfig& cfg);

// Type-7 quantile of the values in v (linear interpolation of order stats).
double quantile_type7(std::vector<double> v, double p);

// Least squares slope of y on x; NaN when fewer than two points.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace crcs
