#pragma once

#include <functional>

namespace crcs {

// Worker count: CRCS_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
int thread_budget();

// Runs fn(0), ..., fn(n - 1), possibly on several threads. Work must be
// index-pure: results may only be written to per-index slots, so output is
// identical at every budget. The first exception thrown is rethrown on the
// caller after all workers finish.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace crcs
