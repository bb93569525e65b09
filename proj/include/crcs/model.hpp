#pragma once

#include <limits>
#include <string>
#include <vector>

// Core domain types for current status data with K competing risks:
// observations (T, status), tie-aggregated datasets, right-continuous
// step functions and systems of sub-distribution functions.

namespace crcs {

// status 0: still event-free at `time`; status k in 1..K: failure from
// cause k had occurred by `time`.
struct Observation {
    double time = 0.0;
    int status = 0;
};

// Tie-aggregated sample. counts[j][s] is the number of observations at
// times[j] with status s (s = 0 is the event-free column).
struct Dataset {
    int K = 1;
    std::vector<Observation> obs;          // sorted by time
    std::vector<double> times;             // distinct, strictly increasing
    std::vector<std::vector<int>> counts;  // m x (K+1)
    int n = 0;

    int m() const { return static_cast<int>(times.size()); }
    double t_max() const { return times.back(); }
    int count_at(int j, int status) const { return counts[j][status]; }
    int total_at(int j) const;
    bool survival_at_t_max() const { return counts.back()[0] > 0; }
    int cause_total(int k) const;  // observations with status k over all times
};

// Sorts, checks statuses and finiteness, aggregates ties.
Dataset validate_dataset(const std::vector<Observation>& raw, int K);

// Nondecreasing right-continuous step function. jump_v holds function
// values at the jump times (not increments); tail_mass is mass placed
// beyond the last jump, so value at infinity = last value + tail_mass.
struct StepFn {
    double baseline = 0.0;
    std::vector<double> jump_t;  // strictly increasing
    std::vector<double> jump_v;  // strictly increasing
    double tail_mass = 0.0;

    double operator()(double t) const;
    double at_inf() const;
    double left_limit(double t) const;  // value just before t
    size_t jump_count() const { return jump_t.size(); }
    double jump_size(size_t i) const { return jump_v[i] - (i == 0 ? baseline : jump_v[i - 1]); }
};

double step_eval(const StepFn& f, double t);

// Builds a StepFn from values sampled on a strictly increasing grid.
// A grid point opens a new level only when its value exceeds the current
// level by more than merge_eps; later points within merge_eps are dropped.
StepFn make_step_fn(const std::vector<double>& t, const std::vector<double>& v,
                    double baseline = 0.0, double tail_mass = 0.0,
                    double merge_eps = 0.0);

// Structural checks; with cap_at_one also enforces value(inf) <= 1 + tol.
void validate_step_fn(const StepFn& f, bool cap_at_one = true, double tol = 1e-10);

// K sub-distribution functions. sum_tolerance = +inf disables the
// F_+ <= 1 constraint, which turns the type into the cone used by the
// unconstrained characterization of the MLE.
struct SubDistSystem {
    int K = 0;
    std::vector<StepFn> components;
    double sum_tolerance = 1e-10;

    bool is_cone() const {
        return !(sum_tolerance < std::numeric_limits<double>::infinity());
    }
    double sum_at(double t) const;
    double total_at_inf() const;
    // F_{K+1}(t) = F_+(inf) - F_+(t)
    double survivor_at(double t) const { return total_at_inf() - sum_at(t); }
};

void validate_system(const SubDistSystem& s);

struct SumView {
    StepFn total;  // F_+
    double at_inf = 0.0;
    double survivor(double t) const { return at_inf - total(t); }
};

// Merged pointwise sum; throws naming a witness time if the system is not
// a cone and the sum exceeds 1 + sum_tolerance somewhere.
SumView system_sum(const SubDistSystem& s);

}  // namespace crcs
