#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace maxlab {

/// Thread budget: MAXLAB_THREADS caps it, hardware concurrency is the default.
unsigned thread_budget();

/// Runs body(i) for i in [0, n), possibly on several threads.  Results must be
/// written to per-index slots so the outcome is independent of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Fixed-tree pairwise summation; bitwise reproducible regardless of thread
/// count upstream.
double pairwise_sum(const std::vector<double>& terms);

/// Locale-independent %.17g rendering used for all CSV/JSON numbers.
std::string format_double(double v);

}  // namespace maxlab
